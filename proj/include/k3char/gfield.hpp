#pragma once

// Finite fields F_{p^k} and linear algebra over GF(2).
//
// FpK is the reference implementation: dense coefficient vectors modulo a
// fixed irreducible polynomial. FieldTables is the counting representation
// built from it: every element is stored as its discrete log with respect to
// a primitive element, and addition goes through a Zech table.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "k3char/error.hpp"
#include "k3char/qnum.hpp"

namespace k3char {

namespace detail {

// polynomials over F_p, coefficients low to high, no trailing zeros
using FpPoly = std::vector<std::uint64_t>;

inline void trim(FpPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline std::uint64_t inv_mod(std::uint64_t a, std::uint64_t p) {
    std::int64_t t = 0, nt = 1, r = static_cast<std::int64_t>(p), nr = static_cast<std::int64_t>(a % p);
    while (nr != 0) {
        std::int64_t q = r / nr;
        t -= q * nt;
        std::swap(t, nt);
        r -= q * nr;
        std::swap(r, nr);
    }
    if (r != 1) throw MathError("inverse does not exist");
    return static_cast<std::uint64_t>(t < 0 ? t + static_cast<std::int64_t>(p) : t);
}

inline FpPoly poly_mod(FpPoly a, const FpPoly& f, std::uint64_t p) {
    trim(a);
    std::uint64_t lead_inv = inv_mod(f.back(), p);
    std::size_t df = f.size() - 1;
    while (a.size() > df) {
        std::uint64_t c = a.back() * lead_inv % p;
        std::size_t shift = a.size() - 1 - df;
        for (std::size_t i = 0; i <= df; ++i) {
            a[shift + i] = (a[shift + i] + p - c * f[i] % p) % p;
        }
        trim(a);
    }
    return a;
}

inline FpPoly poly_mulmod(const FpPoly& a, const FpPoly& b, const FpPoly& f, std::uint64_t p) {
    if (a.empty() || b.empty()) return {};
    FpPoly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + a[i] * b[j]) % p;
    }
    return poly_mod(std::move(r), f, p);
}

inline FpPoly poly_powmod(FpPoly base, std::uint64_t e, const FpPoly& f, std::uint64_t p) {
    FpPoly r{1};
    base = poly_mod(std::move(base), f, p);
    while (e > 0) {
        if (e & 1) r = poly_mulmod(r, base, f, p);
        e >>= 1;
        if (e) base = poly_mulmod(base, base, f, p);
    }
    return r;
}

inline FpPoly poly_gcd(FpPoly a, FpPoly b, std::uint64_t p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        a = poly_mod(std::move(a), b, p);
        std::swap(a, b);
    }
    return a;
}

inline FpPoly poly_sub(FpPoly a, const FpPoly& b, std::uint64_t p) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] = (a[i] + p - b[i]) % p;
    trim(a);
    return a;
}

// x^(p^j) mod f by j successive p-th powers
inline FpPoly x_pow_p_iter(unsigned j, const FpPoly& f, std::uint64_t p) {
    FpPoly r{0, 1};
    r = poly_mod(r, f, p);
    for (unsigned i = 0; i < j; ++i) r = poly_powmod(r, p, f, p);
    return r;
}

inline std::vector<unsigned> prime_divisors(unsigned n) {
    std::vector<unsigned> out;
    for (unsigned d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            out.push_back(d);
            while (n % d == 0) n /= d;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

}  // namespace detail

/// Rabin's test: monic f of degree k is irreducible over F_p iff
/// x^(p^k) = x mod f and gcd(x^(p^(k/r)) - x, f) = 1 for every prime r | k.
inline bool is_irreducible(const std::vector<std::uint64_t>& monic, std::uint64_t p) {
    detail::FpPoly f = monic;
    detail::trim(f);
    if (f.size() < 2 || f.back() != 1) throw InputError("is_irreducible: expected a monic polynomial of degree >= 1");
    unsigned k = static_cast<unsigned>(f.size() - 1);
    const detail::FpPoly x = detail::poly_mod({0, 1}, f, p);
    if (detail::poly_sub(detail::x_pow_p_iter(k, f, p), x, p).size() != 0) return false;
    for (unsigned r : detail::prime_divisors(k)) {
        auto g = detail::poly_gcd(detail::poly_sub(detail::x_pow_p_iter(k / r, f, p), x, p), f, p);
        if (g.size() != 1) return false;
    }
    return true;
}

/// F_{p^k} = F_p[x]/(m(x)). Elements are coefficient vectors of length k,
/// lowest degree first.
class FpK {
public:
    using Element = std::vector<std::uint64_t>;

    FpK(std::uint64_t p, unsigned k, std::vector<std::uint64_t> modulus)
        : p_(p), k_(k), modulus_(std::move(modulus)) {
        q_ = 1;
        for (unsigned i = 0; i < k_; ++i) q_ *= p_;
    }

    std::uint64_t characteristic() const { return p_; }
    unsigned degree() const { return k_; }
    std::uint64_t size() const { return q_; }
    /// Monic modulus, coefficients low to high (length k + 1).
    const std::vector<std::uint64_t>& modulus() const { return modulus_; }

    Element zero() const { return Element(k_, 0); }
    Element one() const { return from_int(1); }
    Element from_int(const Integer& c) const {
        Element e(k_, 0);
        e[0] = mod_floor(c, Integer(static_cast<unsigned long>(p_))).get_ui();
        return e;
    }
    /// The class of x, i.e. the generator of the extension (equals from_int(0)
    /// shifted; for k = 1 it is the residue of x mod (x - a)).
    Element x() const {
        if (k_ == 1) return from_int(Integer(static_cast<unsigned long>((p_ - modulus_[0]) % p_)));
        Element e(k_, 0);
        e[1] = 1;
        return e;
    }

    /// Base-p digits: index = e[0] + e[1] p + ... .
    Element from_index(std::uint64_t idx) const {
        Element e(k_, 0);
        for (unsigned i = 0; i < k_; ++i) {
            e[i] = idx % p_;
            idx /= p_;
        }
        return e;
    }
    std::uint64_t index_of(const Element& e) const {
        std::uint64_t idx = 0;
        for (unsigned i = k_; i-- > 0;) idx = idx * p_ + e[i];
        return idx;
    }

    bool is_zero(const Element& a) const {
        return std::all_of(a.begin(), a.end(), [](std::uint64_t c) { return c == 0; });
    }

    Element add(const Element& a, const Element& b) const {
        Element r(k_);
        for (unsigned i = 0; i < k_; ++i) r[i] = (a[i] + b[i]) % p_;
        return r;
    }
    Element sub(const Element& a, const Element& b) const {
        Element r(k_);
        for (unsigned i = 0; i < k_; ++i) r[i] = (a[i] + p_ - b[i]) % p_;
        return r;
    }
    Element neg(const Element& a) const { return sub(zero(), a); }

    Element mul(const Element& a, const Element& b) const {
        std::vector<std::uint64_t> prod(2 * k_ - 1, 0);
        for (unsigned i = 0; i < k_; ++i) {
            if (a[i] == 0) continue;
            for (unsigned j = 0; j < k_; ++j) prod[i + j] = (prod[i + j] + a[i] * b[j]) % p_;
        }
        // reduce with the monic modulus: x^k = -(m_0 + ... + m_{k-1} x^{k-1})
        for (std::size_t d = prod.size(); d-- > k_;) {
            std::uint64_t c = prod[d];
            if (c == 0) continue;
            prod[d] = 0;
            for (unsigned i = 0; i < k_; ++i) {
                prod[d - k_ + i] = (prod[d - k_ + i] + c * (p_ - modulus_[i])) % p_;
            }
        }
        prod.resize(k_);
        return prod;
    }

    Element pow(Element base, const Integer& e) const {
        if (e < 0) return pow(inv(base), -e);
        Element r = one();
        Integer n = e;
        while (n > 0) {
            if (mpz_odd_p(n.get_mpz_t())) r = mul(r, base);
            n >>= 1;
            if (n > 0) base = mul(base, base);
        }
        return r;
    }

    Element inv(const Element& a) const {
        if (is_zero(a)) throw MathError("FpK: inverse of zero");
        return pow(a, Integer(static_cast<unsigned long>(q_)) - 2);
    }

    Element frobenius(const Element& a) const { return pow(a, Integer(static_cast<unsigned long>(p_))); }

    /// Quadratic character on F_q, with chi(0) = 0.
    int chi(const Element& a) const {
        if (is_zero(a)) return 0;
        Element t = pow(a, Integer(static_cast<unsigned long>((q_ - 1) / 2)));
        return t == one() ? 1 : -1;
    }

private:
    std::uint64_t p_;
    unsigned k_;
    std::vector<std::uint64_t> modulus_;
    std::uint64_t q_;
};

/// Deterministic construction: modulus x^k + tail where tail is the first
/// irreducible candidate when tails (c_0, ..., c_{k-1}) are enumerated by the
/// integer c_0 + c_1 p + ... + c_{k-1} p^{k-1}.
inline FpK make_field(std::uint64_t p, unsigned k) {
    if (k == 0) throw InputError("make_field: degree must be >= 1");
    if (p < 2 || p > (std::uint64_t{1} << 31) || !is_probable_prime(p)) {
        throw InputError("make_field: " + std::to_string(p) + " is not a supported prime");
    }
    long double approx = 1;
    for (unsigned i = 0; i < k; ++i) approx *= static_cast<long double>(p);
    if (approx > static_cast<long double>(std::uint64_t{1} << 62)) throw ResourceError("make_field: field too large");
    if (k == 1) return FpK(p, 1, {0, 1});
    std::uint64_t ntails = 1;
    for (unsigned i = 0; i < k; ++i) ntails *= p;
    for (std::uint64_t t = 0; t < ntails; ++t) {
        std::vector<std::uint64_t> m(k + 1, 0);
        std::uint64_t idx = t;
        for (unsigned i = 0; i < k; ++i) {
            m[i] = idx % p;
            idx /= p;
        }
        m[k] = 1;
        if (m[0] == 0) continue;
        if (is_irreducible(m, p)) return FpK(p, k, std::move(m));
    }
    throw InternalError("make_field: no irreducible polynomial found");
}

/// Log/Zech representation of F_q for the counting kernels. Logs live in
/// [0, q-2]; zero is represented by the sentinel kZero = q - 1.
class FieldTables {
public:
    using Log = std::uint32_t;

    explicit FieldTables(const FpK& field) : field_(field) {
        q_ = field.size();
        if (q_ > (std::uint64_t{1} << 28)) throw ResourceError("FieldTables: field too large for log tables");
        if (q_ % 2 == 0) throw InputError("FieldTables: characteristic 2 unsupported");
        zero_ = static_cast<Log>(q_ - 1);
        FpK::Element g = primitive_element(field);
        exp_.resize(q_ - 1);
        log_.assign(q_, zero_);
        FpK::Element cur = field.one();
        for (std::uint64_t i = 0; i + 1 < q_; ++i) {
            std::uint64_t idx = field.index_of(cur);
            if (log_[idx] != zero_) throw InternalError("FieldTables: element is not primitive");
            exp_[i] = static_cast<std::uint32_t>(idx);
            log_[idx] = static_cast<Log>(i);
            cur = field.mul(cur, g);
        }
        // zech[n] = log(1 + g^n)
        std::uint64_t p = field.characteristic();
        zech_.resize(q_ - 1);
        for (std::uint64_t n = 0; n + 1 < q_; ++n) {
            std::uint64_t idx = exp_[n];
            std::uint64_t d0 = idx % p;
            std::uint64_t shifted = idx - d0 + (d0 + 1) % p;
            zech_[n] = log_[shifted];
        }
    }

    const FpK& field() const { return field_; }
    std::uint64_t size() const { return q_; }
    Log zero() const { return zero_; }
    Log one() const { return 0; }

    Log log_of_index(std::uint64_t idx) const { return log_[idx]; }
    std::uint64_t index_of_log(Log l) const { return l == zero_ ? 0 : exp_[l]; }
    Log from_int(const Integer& c) const {
        return log_[mod_floor(c, Integer(static_cast<unsigned long>(field_.characteristic()))).get_ui()];
    }

    Log mul(Log a, Log b) const {
        if (a == zero_ || b == zero_) return zero_;
        std::uint64_t s = std::uint64_t{a} + b;
        return static_cast<Log>(s >= q_ - 1 ? s - (q_ - 1) : s);
    }
    Log pow(Log a, unsigned e) const {
        if (e == 0) return 0;
        if (a == zero_) return zero_;
        return static_cast<Log>((std::uint64_t{a} * e) % (q_ - 1));
    }
    Log add(Log a, Log b) const {
        if (a == zero_) return b;
        if (b == zero_) return a;
        std::uint64_t d = b >= a ? b - a : b + (q_ - 1) - a;
        Log z = zech_[d];
        if (z == zero_) return zero_;
        std::uint64_t s = std::uint64_t{a} + z;
        return static_cast<Log>(s >= q_ - 1 ? s - (q_ - 1) : s);
    }
    /// Quadratic character: 0 on zero, +1 on even logs.
    int chi(Log a) const {
        if (a == zero_) return 0;
        return (a & 1u) ? -1 : 1;
    }

    static FpK::Element primitive_element(const FpK& field) {
        std::uint64_t order = field.size() - 1;
        std::vector<Integer> rs = factorize(Integer(static_cast<unsigned long>(order))).primes();
        for (std::uint64_t idx = 1; idx < field.size(); ++idx) {
            FpK::Element g = field.from_index(idx);
            bool ok = true;
            for (const auto& r : rs) {
                if (field.pow(g, Integer(static_cast<unsigned long>(order)) / r) == field.one()) {
                    ok = false;
                    break;
                }
            }
            if (ok) return g;
        }
        throw InternalError("no primitive element");
    }

private:
    FpK field_;
    std::uint64_t q_;
    Log zero_;
    std::vector<std::uint32_t> exp_;
    std::vector<Log> log_;
    std::vector<Log> zech_;
};

/// Dense bit matrix over GF(2), 64 columns per word.
class GF2Matrix {
public:
    GF2Matrix() = default;
    GF2Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), words_((cols + 63) / 64), data_(rows * ((cols + 63) / 64), 0) {}

    static GF2Matrix from_rows(const std::vector<std::vector<int>>& rows, std::size_t cols) {
        GF2Matrix m(rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols) throw InputError("GF2Matrix: ragged rows");
            for (std::size_t j = 0; j < cols; ++j) m.set(i, j, rows[i][j] & 1);
        }
        return m;
    }

    static GF2Matrix identity(std::size_t n) {
        GF2Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool get(std::size_t i, std::size_t j) const { return (row(i)[j / 64] >> (j % 64)) & 1u; }
    void set(std::size_t i, std::size_t j, bool v) {
        std::uint64_t bit = std::uint64_t{1} << (j % 64);
        if (v) row(i)[j / 64] |= bit;
        else row(i)[j / 64] &= ~bit;
    }

    void append_row(const std::vector<int>& bits) {
        if (bits.size() != cols_) throw InputError("GF2Matrix: row length mismatch");
        data_.resize(data_.size() + words_, 0);
        ++rows_;
        for (std::size_t j = 0; j < cols_; ++j) set(rows_ - 1, j, bits[j] & 1);
    }

    /// Reduced row echelon form; returns the pivot column of each nonzero row.
    std::vector<std::size_t> reduce() {
        std::vector<std::size_t> pivots;
        std::size_t r = 0;
        for (std::size_t c = 0; c < cols_ && r < rows_; ++c) {
            std::size_t sel = r;
            while (sel < rows_ && !get(sel, c)) ++sel;
            if (sel == rows_) continue;
            swap_rows(sel, r);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (i != r && get(i, c)) xor_row(i, r);
            }
            pivots.push_back(c);
            ++r;
        }
        return pivots;
    }

    GF2Matrix echelon() const {
        GF2Matrix m = *this;
        m.reduce();
        return m;
    }

    std::size_t rank() const {
        GF2Matrix m = *this;
        return m.reduce().size();
    }

    std::vector<int> multiply(const std::vector<int>& x) const {
        if (x.size() != cols_) throw InputError("GF2Matrix: vector length mismatch");
        std::vector<int> out(rows_, 0);
        for (std::size_t i = 0; i < rows_; ++i) {
            int s = 0;
            for (std::size_t j = 0; j < cols_; ++j) s ^= (get(i, j) & (x[j] & 1));
            out[i] = s;
        }
        return out;
    }

    /// Some x with A x = b, or nothing if the system is inconsistent. Free
    /// variables are set to zero.
    std::optional<std::vector<int>> solve(const std::vector<int>& b) const {
        if (b.size() != rows_) throw InputError("GF2Matrix: right-hand side length mismatch");
        GF2Matrix aug(rows_, cols_ + 1);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) aug.set(i, j, get(i, j));
            aug.set(i, cols_, b[i] & 1);
        }
        auto pivots = aug.reduce();
        std::vector<int> x(cols_, 0);
        for (std::size_t r = 0; r < pivots.size(); ++r) {
            if (pivots[r] == cols_) return std::nullopt;
            x[pivots[r]] = aug.get(r, cols_);
        }
        return x;
    }

    /// Kernel basis, one vector per free column in ascending column order.
    std::vector<std::vector<int>> kernel() const {
        GF2Matrix m = *this;
        auto pivots = m.reduce();
        std::vector<bool> is_pivot(cols_, false);
        for (auto c : pivots) is_pivot[c] = true;
        std::vector<std::vector<int>> basis;
        for (std::size_t f = 0; f < cols_; ++f) {
            if (is_pivot[f]) continue;
            std::vector<int> v(cols_, 0);
            v[f] = 1;
            for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = m.get(r, f);
            basis.push_back(std::move(v));
        }
        return basis;
    }

    friend bool operator==(const GF2Matrix& a, const GF2Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::uint64_t* row(std::size_t i) { return data_.data() + i * words_; }
    const std::uint64_t* row(std::size_t i) const { return data_.data() + i * words_; }
    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        std::swap_ranges(row(a), row(a) + words_, row(b));
    }
    void xor_row(std::size_t dst, std::size_t src) {
        std::uint64_t* d = row(dst);
        const std::uint64_t* s = row(src);
        for (std::size_t w = 0; w < words_; ++w) d[w] ^= s[w];
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> data_;
};

}  // namespace k3char

#pragma once

// Exact number-theory kernel: square classes in Q*/(Q*)^2, Jacobi and
// Legendre symbols, integer factorization, and prime splitting in Z[i] and
// Z[omega].

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "k3char/error.hpp"

namespace k3char {

using Integer = mpz_class;
using Rational = mpq_class;

inline std::string to_string(const Integer& n) { return n.get_str(); }

inline Integer integer_pow(const Integer& base, unsigned long exp) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
    return r;
}

inline Integer powm(const Integer& base, const Integer& exp, const Integer& mod) {
    Integer r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return r;
}

/// Non-negative residue of a modulo m (m > 0).
inline Integer mod_floor(const Integer& a, const Integer& m) {
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

/// Miller-Rabin with 64 rounds (probabilistic; no primality certificates).
inline bool is_probable_prime(const Integer& n) {
    if (n < 2) return false;
    return mpz_probab_prime_p(n.get_mpz_t(), 64) > 0;
}

inline bool is_probable_prime(std::uint64_t n) { return is_probable_prime(Integer(static_cast<unsigned long>(n))); }

/// Jacobi symbol (a/n) for odd n >= 1.
inline int jacobi_symbol(const Integer& a, const Integer& n) {
    if (n <= 0 || mpz_even_p(n.get_mpz_t())) {
        throw InputError("jacobi_symbol: modulus must be odd and positive, got " + n.get_str());
    }
    Integer x = mod_floor(a, n);
    Integer y = n;
    int result = 1;
    while (x != 0) {
        // strip factors of two: (2/y) = -1 iff y = 3,5 mod 8
        mp_bitcnt_t twos = mpz_scan1(x.get_mpz_t(), 0);
        if (twos > 0) {
            mpz_tdiv_q_2exp(x.get_mpz_t(), x.get_mpz_t(), twos);
            unsigned long y8 = mpz_fdiv_ui(y.get_mpz_t(), 8);
            if ((twos & 1u) && (y8 == 3 || y8 == 5)) result = -result;
        }
        // reciprocity
        if (mpz_fdiv_ui(x.get_mpz_t(), 4) == 3 && mpz_fdiv_ui(y.get_mpz_t(), 4) == 3) result = -result;
        std::swap(x, y);
        x = mod_floor(x, y);
    }
    return y == 1 ? result : 0;
}

inline int jacobi_symbol(long a, long n) { return jacobi_symbol(Integer(a), Integer(n)); }

// ---------------------------------------------------------------------------
// Factorization

struct PrimePower {
    Integer prime;
    unsigned exponent = 0;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// n = sign * prod prime^exponent, primes ascending.
struct Factorization {
    int sign = 1;
    std::vector<PrimePower> factors;

    Integer value() const {
        Integer v = sign;
        for (const auto& f : factors) v *= integer_pow(f.prime, f.exponent);
        return v;
    }
    std::vector<Integer> primes() const {
        std::vector<Integer> out;
        for (const auto& f : factors) out.push_back(f.prime);
        return out;
    }
};

/// Raised when the effort budget leaves a composite cofactor unsplit.
class IncompleteFactorization : public ResourceError {
public:
    IncompleteFactorization(Factorization partial, Integer cofactor)
        : ResourceError("incomplete factorization: unfactored composite " + cofactor.get_str()),
          partial_(std::move(partial)),
          cofactor_(std::move(cofactor)) {}
    const Factorization& partial() const { return partial_; }
    const Integer& cofactor() const { return cofactor_; }

private:
    Factorization partial_;
    Integer cofactor_;
};

struct FactorBudget {
    std::uint32_t trial_bound = 1'000'000;
    unsigned rho_restarts = 20;
    std::uint64_t rho_iterations = std::uint64_t{1} << 22;
};

namespace detail {

inline const std::vector<std::uint32_t>& small_primes(std::uint32_t bound) {
    static std::mutex mutex;
    static std::vector<std::uint32_t> primes;
    static std::uint32_t sieved = 0;
    std::lock_guard lock(mutex);
    if (sieved < bound) {
        std::vector<bool> composite(bound + 1, false);
        primes.clear();
        for (std::uint32_t i = 2; i <= bound; ++i) {
            if (composite[i]) continue;
            primes.push_back(i);
            for (std::uint64_t j = std::uint64_t{i} * i; j <= bound; j += i) composite[j] = true;
        }
        sieved = bound;
    }
    return primes;
}

// Brent's variant of Pollard rho; returns a nontrivial divisor or nullopt.
inline std::optional<Integer> pollard_brent(const Integer& n, unsigned long c, std::uint64_t max_iter) {
    Integer y = 2, x, ys, q = 1, g = 1;
    std::uint64_t r = 1, iterations = 0;
    const std::uint64_t m = 128;
    auto f = [&](Integer& v) {
        v = v * v + c;
        mpz_mod(v.get_mpz_t(), v.get_mpz_t(), n.get_mpz_t());
    };
    while (g == 1) {
        x = y;
        for (std::uint64_t i = 0; i < r; ++i) f(y);
        std::uint64_t k = 0;
        while (k < r && g == 1) {
            ys = y;
            std::uint64_t lim = std::min(m, r - k);
            for (std::uint64_t i = 0; i < lim; ++i) {
                f(y);
                Integer diff = x - y;
                q = q * abs(diff);
                mpz_mod(q.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
            }
            mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
            k += lim;
            iterations += lim;
            if (iterations > max_iter) return std::nullopt;
        }
        r *= 2;
    }
    if (g == n) {
        // backtrack one step at a time
        do {
            f(ys);
            Integer diff = abs(x - ys);
            mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
        } while (g == 1);
    }
    if (g == n || g == 1) return std::nullopt;
    return g;
}

inline void add_factor(std::vector<PrimePower>& out, const Integer& p, unsigned e) {
    for (auto& f : out) {
        if (f.prime == p) {
            f.exponent += e;
            return;
        }
    }
    out.push_back({p, e});
}

}  // namespace detail

/// Complete factorization of a nonzero integer: trial division up to
/// budget.trial_bound, then Pollard-Brent rho on the remaining cofactors.
inline Factorization factorize(const Integer& n, const FactorBudget& budget = {}) {
    if (n == 0) throw InputError("factorize: zero has no factorization");
    Factorization out;
    out.sign = n < 0 ? -1 : 1;
    Integer m = abs(n);

    for (std::uint32_t p : detail::small_primes(budget.trial_bound)) {
        if (Integer(p) * p > m) break;
        if (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
            unsigned e = 0;
            while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
                mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
                ++e;
            }
            out.factors.push_back({Integer(p), e});
        }
    }

    std::vector<std::pair<Integer, unsigned>> pending;
    if (m > 1) pending.emplace_back(m, 1);
    while (!pending.empty()) {
        auto [c, mult] = pending.back();
        pending.pop_back();
        if (c == 1) continue;
        if (is_probable_prime(c)) {
            detail::add_factor(out.factors, c, mult);
            continue;
        }
        // perfect powers defeat rho on some seeds; peel them first
        bool split = false;
        for (unsigned long k = 2; k <= mpz_sizeinbase(c.get_mpz_t(), 2); ++k) {
            Integer root;
            if (mpz_root(root.get_mpz_t(), c.get_mpz_t(), k) != 0) {
                pending.emplace_back(root, mult * static_cast<unsigned>(k));
                split = true;
                break;
            }
        }
        if (split) continue;
        for (unsigned attempt = 0; attempt < budget.rho_restarts && !split; ++attempt) {
            if (auto d = detail::pollard_brent(c, 1 + 2 * attempt, budget.rho_iterations)) {
                Integer rest = c / *d;
                pending.emplace_back(*d, mult);
                pending.emplace_back(rest, mult);
                split = true;
            }
        }
        if (!split) {
            std::sort(out.factors.begin(), out.factors.end(),
                      [](const PrimePower& a, const PrimePower& b) { return a.prime < b.prime; });
            throw IncompleteFactorization(out, c);
        }
    }
    std::sort(out.factors.begin(), out.factors.end(),
              [](const PrimePower& a, const PrimePower& b) { return a.prime < b.prime; });
    return out;
}

// ---------------------------------------------------------------------------
// Square classes

/// An element of Q*/(Q*)^2 represented by its signed squarefree integer.
/// The sign is kept explicitly; -1 plays the role of an extra "prime".
class SquareClass {
public:
    SquareClass() = default;

    /// Square class of num/den (den != 0, num != 0).
    static SquareClass of(const Integer& num, const Integer& den = 1) {
        if (den == 0) throw InputError("square_class: zero denominator");
        if (num == 0) throw InputError("square_class: zero has no square class");
        // num/den and num*den differ by the square den^2
        Integer prod = num * den;
        Factorization f = factorize(prod);
        Integer v = f.sign;
        for (const auto& pp : f.factors) {
            if (pp.exponent % 2 == 1) v *= pp.prime;
        }
        return SquareClass(v);
    }

    /// Wraps an integer already known to be squarefree (checked).
    static SquareClass from_squarefree(const Integer& v) {
        SquareClass s = of(v);
        if (s.value_ != v) throw InputError("square class value " + v.get_str() + " is not squarefree");
        return s;
    }

    const Integer& value() const { return value_; }
    bool is_trivial() const { return value_ == 1; }
    int sign() const { return value_ < 0 ? -1 : 1; }

    /// Primes dividing the value, ascending (sign excluded).
    std::vector<Integer> primes() const { return factorize(value_).primes(); }

    SquareClass operator*(const SquareClass& other) const {
        // both squarefree: ab = g^2 (a/g)(b/g) with the cofactors coprime
        Integer g;
        mpz_gcd(g.get_mpz_t(), value_.get_mpz_t(), other.value_.get_mpz_t());
        return SquareClass((value_ / g) * (other.value_ / g));
    }
    SquareClass& operator*=(const SquareClass& other) { return *this = *this * other; }

    friend bool operator==(const SquareClass& a, const SquareClass& b) { return a.value_ == b.value_; }
    friend bool operator!=(const SquareClass& a, const SquareClass& b) { return !(a == b); }
    /// Ordering by absolute value, then positive before negative.
    friend bool operator<(const SquareClass& a, const SquareClass& b) {
        int c = mpz_cmpabs(a.value_.get_mpz_t(), b.value_.get_mpz_t());
        if (c != 0) return c < 0;
        return a.value_ > b.value_;
    }
    friend std::ostream& operator<<(std::ostream& os, const SquareClass& s) { return os << s.value_.get_str(); }

private:
    explicit SquareClass(Integer v) : value_(std::move(v)) {}
    Integer value_ = 1;
};

/// Quadratic symbol (delta/p) at an odd prime p not dividing delta.
inline int symbol_at(const SquareClass& delta, const Integer& p) {
    if (p <= 2 || !is_probable_prime(p)) throw InputError("symbol_at: " + p.get_str() + " is not an odd prime");
    if (mpz_divisible_p(delta.value().get_mpz_t(), p.get_mpz_t())) {
        throw MathError("symbol_at: " + p.get_str() + " ramifies in Q(sqrt(" + delta.value().get_str() +
                        ")); the symbol is defined only at unramified primes");
    }
    return jacobi_symbol(delta.value(), p);
}

inline int symbol_at(const SquareClass& delta, std::uint64_t p) {
    return symbol_at(delta, Integer(static_cast<unsigned long>(p)));
}

// ---------------------------------------------------------------------------
// Splitting of primes in Z[i] and Z[omega]

/// Square root of a modulo an odd prime p (a must be a nonzero square), Tonelli-Shanks.
inline Integer sqrt_mod_prime(const Integer& a, const Integer& p) {
    Integer n = mod_floor(a, p);
    if (n == 0) return 0;
    if (jacobi_symbol(n, p) != 1) throw MathError("sqrt_mod_prime: " + a.get_str() + " is not a square mod " + p.get_str());
    Integer q = p - 1;
    unsigned long s = mpz_scan1(q.get_mpz_t(), 0);
    mpz_tdiv_q_2exp(q.get_mpz_t(), q.get_mpz_t(), s);
    Integer z = 2;
    while (jacobi_symbol(z, p) != -1) ++z;
    Integer c = powm(z, q, p);
    Integer r = powm(n, (q + 1) / 2, p);
    Integer t = powm(n, q, p);
    unsigned long m = s;
    while (t != 1) {
        unsigned long i = 0;
        Integer tt = t;
        while (tt != 1) {
            tt = tt * tt % p;
            ++i;
        }
        Integer b = powm(c, integer_pow(2, m - i - 1), p);
        r = r * b % p;
        c = b * b % p;
        t = t * c % p;
        m = i;
    }
    return r;
}

/// pi = a + b i with a^2 + b^2 = p, primary (pi = 1 mod (1+i)^3) and b > 0.
struct GaussianPrime {
    Integer a, b;
    Integer norm() const { return a * a + b * b; }
};

/// pi = a + b*omega with a^2 - ab + b^2 = p, primary (pi = -1 mod 3).
struct EisensteinPrime {
    Integer a, b;
    Integer norm() const { return a * a - a * b + b * b; }
};

inline bool is_primary(const GaussianPrime& g) {
    return mpz_even_p(g.b.get_mpz_t()) && mod_floor(g.a + g.b, 4) == 1;
}

inline bool is_primary(const EisensteinPrime& e) { return mod_floor(e.a, 3) == 2 && mod_floor(e.b, 3) == 0; }

/// Factor p = 1 mod 4 in Z[i] via a square root of -1 and Euclidean reduction.
inline GaussianPrime gaussian_factor(const Integer& p) {
    if (mod_floor(p, 4) != 1 || !is_probable_prime(p)) {
        throw InputError("gaussian_factor: " + p.get_str() + " is not a prime = 1 mod 4");
    }
    Integer r = sqrt_mod_prime(-1, p);
    if (r > p / 2) r = p - r;
    // Hermite-Serret: run Euclid on (p, r) until the remainder drops below sqrt(p)
    Integer x = p, y = r;
    while (y * y > p) {
        Integer t = x % y;
        x = y;
        y = t;
    }
    Integer a = y;
    Integer b2 = p - a * a;
    Integer b = sqrt(b2);
    if (b * b != b2) throw InternalError("gaussian_factor: reduction failed for " + p.get_str());
    // the eight associates/conjugates: +-a +- bi, +-b +- ai
    const std::pair<Integer, Integer> cands[] = {{a, b}, {-a, b}, {a, -b}, {-a, -b},
                                                 {b, a}, {-b, a}, {b, -a}, {-b, -a}};
    for (const auto& [ca, cb] : cands) {
        GaussianPrime g{ca, cb};
        if (cb > 0 && is_primary(g)) return g;
    }
    throw InternalError("gaussian_factor: no primary associate for " + p.get_str());
}

/// Factor p = 1 mod 3 in Z[omega] by Gauss reduction of the ideal lattice.
inline EisensteinPrime eisenstein_factor(const Integer& p) {
    if (mod_floor(p, 3) != 1 || !is_probable_prime(p)) {
        throw InputError("eisenstein_factor: " + p.get_str() + " is not a prime = 1 mod 3");
    }
    // omega -> r with r^2 + r + 1 = 0 mod p; x + y*omega lies in the prime iff x + r*y = 0 mod p
    Integer s = sqrt_mod_prime(-3, p);
    Integer r = mod_floor((s - 1) * ((p + 1) / 2), p);
    auto Q = [](const Integer& x, const Integer& y) -> Integer { return x * x - x * y + y * y; };
    // twice the associated bilinear form
    auto B2 = [](const Integer& x1, const Integer& y1, const Integer& x2, const Integer& y2) -> Integer {
        return 2 * x1 * x2 - x1 * y2 - x2 * y1 + 2 * y1 * y2;
    };
    Integer ux = p, uy = 0, vx = -r, vy = 1;
    for (;;) {
        if (Q(vx, vy) < Q(ux, uy)) {
            std::swap(ux, vx);
            std::swap(uy, vy);
        }
        // v -= round(B(u,v)/Q(u)) u
        Integer num = B2(ux, uy, vx, vy);
        Integer den = 2 * Q(ux, uy);
        Integer m;
        Integer twice = 2 * num + den;
        Integer den2 = 2 * den;
        mpz_fdiv_q(m.get_mpz_t(), twice.get_mpz_t(), den2.get_mpz_t());
        if (m == 0) break;
        vx -= m * ux;
        vy -= m * uy;
    }
    if (Q(vx, vy) < Q(ux, uy)) {
        std::swap(ux, vx);
        std::swap(uy, vy);
    }
    if (Q(ux, uy) != p) throw InternalError("eisenstein_factor: reduction failed for " + p.get_str());
    // walk the six associates: omega*(a + b omega) = -b + (a - b) omega
    EisensteinPrime e{ux, uy};
    for (int i = 0; i < 6; ++i) {
        if (is_primary(e)) return e;
        EisensteinPrime neg{-e.a, -e.b};
        if (is_primary(neg)) return neg;
        e = EisensteinPrime{-e.b, e.a - e.b};
    }
    throw InternalError("eisenstein_factor: no primary associate for " + p.get_str());
}

/// True iff a is a cube modulo the prime p = 1 mod 3 (gcd(a, p) = 1).
inline bool cubic_residue(const Integer& a, const Integer& p) {
    if (mod_floor(p, 3) != 1 || !is_probable_prime(p)) {
        throw InputError("cubic_residue: " + p.get_str() + " is not a prime = 1 mod 3");
    }
    if (mod_floor(a, p) == 0) throw InputError("cubic_residue: argument divisible by p");
    return powm(mod_floor(a, p), (p - 1) / 3, p) == 1;
}

/// Odd primes p <= bound in ascending order.
inline std::vector<std::uint64_t> odd_primes_up_to(std::uint64_t bound) {
    std::vector<std::uint64_t> out;
    if (bound < 3) return out;
    std::vector<bool> composite(bound + 1, false);
    for (std::uint64_t i = 2; i <= bound; ++i) {
        if (composite[i]) continue;
        if (i > 2) out.push_back(i);
        for (std::uint64_t j = i * i; j <= bound; j += i) composite[j] = true;
    }
    return out;
}

}  // namespace k3char

#pragma once

// Frobenius spectra on H^2(1): characteristic polynomial reconstruction from
// traces, determinants, and the closed-form transcendental pairs of the
// diagonal quartic and the Fermat sextic double cover.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "k3char/error.hpp"
#include "k3char/qnum.hpp"

namespace k3char {

namespace rpoly {

// polynomials over Q, coefficients low to high, no trailing zeros
using Poly = std::vector<Rational>;

inline void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}
inline int degree(const Poly& a) { return static_cast<int>(a.size()) - 1; }

inline Rational eval(const Poly& a, const Rational& x) {
    Rational v = 0;
    for (std::size_t i = a.size(); i-- > 0;) v = v * x + a[i];
    return v;
}

inline Poly derivative(const Poly& a) {
    Poly d;
    for (std::size_t i = 1; i < a.size(); ++i) d.push_back(a[i] * static_cast<long>(i));
    trim(d);
    return d;
}

inline Poly sub(Poly a, const Poly& b) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
    trim(a);
    return a;
}

inline Poly scale(Poly a, const Rational& c) {
    for (auto& x : a) x *= c;
    trim(a);
    return a;
}

inline Poly mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    trim(r);
    return r;
}

// quotient and remainder
inline std::pair<Poly, Poly> divmod(Poly a, const Poly& b) {
    if (b.empty()) throw InternalError("rpoly: division by zero polynomial");
    trim(a);
    Poly q;
    if (a.size() >= b.size()) q.assign(a.size() - b.size() + 1, 0);
    while (a.size() >= b.size() && !a.empty()) {
        std::size_t shift = a.size() - b.size();
        Rational c = a.back() / b.back();
        q[shift] = c;
        for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= c * b[i];
        a.pop_back();
        trim(a);
    }
    trim(q);
    return {q, a};
}

inline Poly gcd(Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) a = scale(a, 1 / a.back());
    return a;
}

// Number of sign changes of the Sturm sequence at x (zeros skipped).
inline int sturm_variations(const std::vector<Poly>& seq, const Rational& x) {
    int changes = 0, last = 0;
    for (const auto& s : seq) {
        int v = sgn(eval(s, x));
        if (v == 0) continue;
        if (last != 0 && v != last) ++changes;
        last = v;
    }
    return changes;
}

inline std::vector<Poly> sturm_sequence(const Poly& p) {
    std::vector<Poly> seq{p, derivative(p)};
    while (!seq.back().empty()) {
        Poly r = divmod(seq[seq.size() - 2], seq.back()).second;
        if (r.empty()) break;
        seq.push_back(scale(r, -1));
    }
    return seq;
}

}  // namespace rpoly

/// Elementary symmetric functions e_1..e_m from power sums t_1..t_m.
inline std::vector<Rational> newton_coeffs(const std::vector<Rational>& t) {
    std::vector<Rational> e(t.size() + 1);
    e[0] = 1;
    for (std::size_t k = 1; k <= t.size(); ++k) {
        Rational s = 0;
        for (std::size_t i = 1; i <= k; ++i) {
            Rational term = e[k - i] * t[i - 1];
            if (i % 2 == 1) s += term;
            else s -= term;
        }
        e[k] = s / static_cast<long>(k);
    }
    e.erase(e.begin());
    return e;
}

/// Power sums t_1..t_m of the roots of T^N - e_1 T^{N-1} + e_2 T^{N-2} - ...
/// (e_j = 0 beyond the supplied list).
inline std::vector<Rational> power_sums(const std::vector<Rational>& e, std::size_t m) {
    std::vector<Rational> t(m + 1, 0);
    auto E = [&](std::size_t j) -> Rational { return j == 0 ? Rational(1) : (j <= e.size() ? e[j - 1] : Rational(0)); };
    for (std::size_t k = 1; k <= m; ++k) {
        // t_k = sum_{i=1}^{k-1} (-1)^{i-1} e_i t_{k-i} + (-1)^{k-1} k e_k
        Rational s = 0;
        for (std::size_t i = 1; i < k; ++i) {
            Rational term = E(i) * t[k - i];
            if (i % 2 == 1) s += term;
            else s -= term;
        }
        Rational last = E(k) * static_cast<long>(k);
        if (k % 2 == 1) s += last;
        else s -= last;
        t[k] = s;
    }
    t.erase(t.begin());
    return t;
}

/// Phi(T) = sum_j coeffs[j] T^{N-j}, monic, on H^2(1) so that the roots lie on
/// the unit circle and T^N Phi(1/T) = sign * Phi(T).
struct CharPoly {
    unsigned N = 0;
    int sign = 1;
    std::vector<Rational> coeffs;

    Rational at_zero() const { return coeffs.back(); }

    bool functional_equation_holds() const {
        for (unsigned j = 0; j <= N; ++j) {
            if (coeffs[N - j] != coeffs[j] * sign) return false;
        }
        return true;
    }

    rpoly::Poly as_poly() const {
        rpoly::Poly p(N + 1);
        for (unsigned j = 0; j <= N; ++j) p[N - j] = coeffs[j];
        rpoly::trim(p);
        return p;
    }

    std::string to_string() const {
        std::string out;
        for (unsigned j = 0; j <= N; ++j) {
            const Rational& c = coeffs[j];
            if (c == 0) continue;
            unsigned e = N - j;
            std::string mag = Rational(abs(c)).get_str();
            if (!out.empty()) out += c < 0 ? " - " : " + ";
            else if (c < 0) out += "-";
            bool unit = abs(c) == 1;
            if (e == 0) out += mag;
            else {
                if (!unit) out += mag + "*";
                out += "T";
                if (e > 1) out += "^" + std::to_string(e);
            }
        }
        return out.empty() ? "0" : out;
    }
};

struct Feasibility {
    bool ok = true;
    std::string reason;
};

/// Exact test that every root of Phi lies on the unit circle: strip the
/// factors T - 1 and T + 1, require a palindromic remainder R, rewrite
/// T^{-m} R(T) as g(T + 1/T) and check by Sturm sequences that g has all its
/// roots real in [-2, 2].
inline Feasibility unit_circle_test(const CharPoly& phi) {
    using namespace rpoly;
    Poly r = phi.as_poly();
    for (const Rational& root : {Rational(1), Rational(-1)}) {
        Poly lin{-root, 1};
        while (!r.empty() && eval(r, root) == 0) r = divmod(r, lin).first;
    }
    int deg = degree(r);
    if (deg % 2 != 0) return {false, "odd degree after removing the roots +1 and -1"};
    for (int j = 0; j <= deg; ++j) {
        if (r[j] != r[deg - j]) return {false, "roots are not closed under inversion"};
    }
    const int m = deg / 2;
    if (m == 0) return {};
    // g(y) = r_m + sum_k r_{m+k} D_k(y), D_k(T + 1/T) = T^k + T^-k
    Poly g{r[m]};
    Poly dprev{2}, dcur{0, 1};
    for (int k = 1; k <= m; ++k) {
        Poly term = scale(dcur, r[m + k]);
        g = sub(g, scale(term, -1));
        Poly dnext = sub(mul(Poly{0, 1}, dcur), dprev);
        dprev = std::move(dcur);
        dcur = std::move(dnext);
    }
    Poly sqf = divmod(g, gcd(g, derivative(g))).first;
    int distinct = degree(sqf);
    int inside = 0;
    for (const Rational& end : {Rational(-2), Rational(2)}) {
        if (eval(sqf, end) == 0) {
            sqf = divmod(sqf, Poly{-end, 1}).first;
            ++inside;
        }
    }
    if (degree(sqf) > 0) {
        auto seq = sturm_sequence(sqf);
        inside += sturm_variations(seq, -2) - sturm_variations(seq, 2);
    }
    if (inside != distinct) {
        return {false, std::to_string(distinct - inside) + " root(s) off the unit circle"};
    }
    return {};
}

/// Rebuilds Phi from t_1..t_m using the functional equation with the given
/// sign. Throws MathError("sign infeasible: ...") when the data cannot come
/// from a unit-circle spectrum with that sign. If p is given, additionally
/// requires p^j c_j to be integral (integrality of the untwisted polynomial).
inline CharPoly reconstruct_charpoly(const std::vector<Rational>& traces, unsigned N, int sign,
                                     std::optional<std::uint64_t> p = std::nullopt) {
    if (sign != 1 && sign != -1) throw InputError("reconstruct_charpoly: sign must be +1 or -1");
    if (N == 0) throw InputError("reconstruct_charpoly: N must be positive");
    if (traces.size() < (N + 1) / 2) {
        throw InputError("reconstruct_charpoly: need at least " + std::to_string((N + 1) / 2) + " traces");
    }
    for (std::size_t k = 0; k < traces.size(); ++k) {
        if (abs(traces[k]) > N) throw MathError("sign infeasible: trace t_" + std::to_string(k + 1) + " exceeds N");
    }
    std::vector<Rational> used(traces.begin(), traces.begin() + std::min<std::size_t>(traces.size(), N));
    auto e = newton_coeffs(used);
    CharPoly phi;
    phi.N = N;
    phi.sign = sign;
    phi.coeffs.assign(N + 1, 0);
    phi.coeffs[0] = 1;
    for (std::size_t j = 1; j <= e.size(); ++j) phi.coeffs[j] = (j % 2 ? -1 : 1) * e[j - 1];
    // fill the upper half from the functional equation, checking overlaps
    for (unsigned j = 0; j <= N; ++j) {
        unsigned mirror = N - j;
        bool known = j <= e.size();
        bool mirror_known = mirror <= e.size();
        if (known && mirror_known) {
            if (phi.coeffs[mirror] != phi.coeffs[j] * sign) {
                throw MathError("sign infeasible: functional equation fails at coefficient " + std::to_string(j));
            }
        } else if (mirror_known) {
            phi.coeffs[j] = phi.coeffs[mirror] * sign;
        } else if (!known) {
            throw InternalError("reconstruct_charpoly: coefficient neither computed nor mirrored");
        }
    }
    if (p) {
        Integer pj = 1;
        for (unsigned j = 0; j <= N; ++j, pj *= static_cast<unsigned long>(*p)) {
            Rational v = phi.coeffs[j] * pj;
            v.canonicalize();
            if (v.get_den() != 1) throw MathError("sign infeasible: coefficient " + std::to_string(j) + " is not p-integral");
        }
    }
    std::vector<Rational> e_full;
    for (unsigned j = 1; j <= N; ++j) e_full.push_back((j % 2 ? -1 : 1) * phi.coeffs[j]);
    auto sums = power_sums(e_full, N);
    for (unsigned k = 0; k < N; ++k) {
        if (abs(sums[k]) > N) throw MathError("sign infeasible: implied t_" + std::to_string(k + 1) + " exceeds N");
    }
    auto uc = unit_circle_test(phi);
    if (!uc.ok) throw MathError("sign infeasible: " + uc.reason);
    return phi;
}

/// det Frob = (-1)^N Phi(0).
inline int det_from_charpoly(const CharPoly& phi) {
    Rational d = phi.at_zero();
    if (phi.N % 2) d = -d;
    if (d == 1) return 1;
    if (d == -1) return -1;
    throw MathError("det_from_charpoly: Phi(0) = " + phi.at_zero().get_str() + " is not a unit");
}

struct SignSearch {
    std::vector<int> feasible;
    std::map<int, std::string> rejected;
    std::optional<CharPoly> charpoly;  // set when exactly one sign survives
    std::optional<int> det;
};

/// Tries both signs of the functional equation.
inline SignSearch determine_sign(const std::vector<Rational>& traces, unsigned N,
                                 std::optional<std::uint64_t> p = std::nullopt) {
    SignSearch out;
    std::optional<CharPoly> last;
    for (int s : {1, -1}) {
        try {
            last = reconstruct_charpoly(traces, N, s, p);
            out.feasible.push_back(s);
            if (!out.charpoly) out.charpoly = last;
        } catch (const MathError& e) {
            out.rejected[s] = e.what();
        }
    }
    if (out.feasible.size() == 1) out.det = det_from_charpoly(*out.charpoly);
    else out.charpoly.reset();
    return out;
}

/// det of Frob on a 2-dimensional transcendental part from its first two
/// traces: e_2 = (t1^2 - t2)/2 must be +-1, and the pair {1,-1} is the only
/// unit-circle pair with product -1.
inline int det_transcendental_rank20(const Rational& t1, const Rational& t2) {
    Rational e2 = (t1 * t1 - t2) / 2;
    if (e2 == -1) {
        if (t1 != 0) throw MathError("transcendental traces inconsistent: product -1 needs the pair {1,-1}");
        return -1;
    }
    if (e2 == 1) {
        if (abs(t1) > 2) throw MathError("transcendental traces inconsistent: pair off the unit circle");
        return 1;
    }
    throw MathError("transcendental traces inconsistent: e2 = " + e2.get_str() + " is not +-1");
}

// ---------------------------------------------------------------------------
// Closed-form spectra

/// x + y i with rational x, y.
struct GaussianRational {
    Rational re, im;

    GaussianRational operator*(const GaussianRational& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    GaussianRational conj() const { return {re, -im}; }
    Rational trace() const { return 2 * re; }
    Rational norm() const { return re * re + im * im; }
    bool is_root_of_unity() const {
        // the roots of unity in Q(i) are +-1, +-i
        return norm() == 1 && re.get_den() == 1 && im.get_den() == 1;
    }
    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re == b.re && a.im == b.im;
    }
};

/// a + b omega, omega^2 + omega + 1 = 0.
struct EisensteinRational {
    Rational a, b;

    EisensteinRational operator*(const EisensteinRational& o) const {
        return {a * o.a - b * o.b, a * o.b + b * o.a - b * o.b};
    }
    EisensteinRational conj() const { return {a - b, -b}; }
    Rational trace() const { return 2 * a - b; }
    Rational norm() const { return a * a - a * b + b * b; }
    bool is_root_of_unity() const {
        // the six units of Z[omega]
        return norm() == 1 && a.get_den() == 1 && b.get_den() == 1;
    }
    friend bool operator==(const EisensteinRational& x, const EisensteinRational& y) {
        return x.a == y.a && x.b == y.b;
    }
};

/// A Galois-stable pair {lambda, conj(lambda)} of Frobenius eigenvalues.
template <class Elem>
struct EigenPair {
    Elem lambda;

    Elem conjugate() const { return lambda.conj(); }
    Rational trace(unsigned k = 1) const {
        Elem x = lambda;
        for (unsigned i = 1; i < k; ++i) x = x * lambda;
        return x.trace();
    }
    Rational product() const { return lambda.norm(); }
    int det() const {
        Rational n = product();
        if (n == 1) return 1;
        if (n == -1) return -1;
        throw MathError("eigenvalue pair has non-unit product");
    }
    bool roots_of_unity() const { return lambda.is_root_of_unity(); }
};

using GaussianPair = EigenPair<GaussianRational>;
using EisensteinPair = EigenPair<EisensteinRational>;

inline std::uint64_t checked_prime(const Integer& p) {
    if (p < 3 || !is_probable_prime(p) || !p.fits_ulong_p()) throw InputError(p.get_str() + " is not an odd prime");
    return p.get_ui();
}

/// Transcendental eigenvalues of Frob_p on H^2(1) of X0^4+X1^4+X2^4+X3^4 at
/// p = 1 mod 4: pi^2/p and its conjugate, pi = a + b i primary.
inline GaussianPair diag_quartic_transcendental(const Integer& p) {
    checked_prime(p);
    if (mod_floor(p, 4) != 1) throw InputError("diag_quartic_transcendental: p must be 1 mod 4");
    GaussianPrime pi = gaussian_factor(p);
    GaussianRational sq{Rational(pi.a * pi.a - pi.b * pi.b, p), Rational(2 * pi.a * pi.b, p)};
    sq.re.canonicalize();
    sq.im.canonicalize();
    return {sq};
}

/// Same family, eigenvalue of Frob_p^f where f = 1 (p = 1 mod 4) or f = 2
/// (p = 3 mod 4, using the primary element -p of norm p^2).
inline GaussianPair diag_quartic_transcendental_power(const Integer& p, unsigned& f) {
    checked_prime(p);
    if (mod_floor(p, 4) == 1) {
        f = 1;
        return diag_quartic_transcendental(p);
    }
    f = 2;
    Integer q = p * p;
    GaussianRational sq{Rational(p * p, q), Rational(0)};
    sq.re.canonicalize();
    return {sq};
}

/// Transcendental eigenvalues of Frob_p on H^2(1) of w^2 = X0^6+X1^6+X2^6 at
/// p = 1 mod 3: (-1/p) pi^2/p and its conjugate, pi = a + b omega primary.
inline EisensteinPair fermat_sextic_transcendental(const Integer& p) {
    checked_prime(p);
    if (mod_floor(p, 3) != 1) throw InputError("fermat_sextic_transcendental: p must be 1 mod 3");
    EisensteinPrime pi = eisenstein_factor(p);
    int eps = jacobi_symbol(Integer(-1), p);
    EisensteinRational sq{Rational(eps * (pi.a * pi.a - pi.b * pi.b), p), Rational(eps * (2 * pi.a * pi.b - pi.b * pi.b), p)};
    sq.a.canonicalize();
    sq.b.canonicalize();
    return {sq};
}

/// Same family, eigenvalue of Frob_p^f with f = 1 (p = 1 mod 3) or f = 2
/// (p = 2 mod 3, primary element p of norm p^2, and -1 a square in F_{p^2}).
inline EisensteinPair fermat_sextic_transcendental_power(const Integer& p, unsigned& f) {
    checked_prime(p);
    if (mod_floor(p, 3) == 1) {
        f = 1;
        return fermat_sextic_transcendental(p);
    }
    f = 2;
    EisensteinRational sq{Rational(1), Rational(0)};
    return {sq};
}

/// Traces split into the algebraic part (from a Galois decomposition) and the
/// transcendental remainder.
struct SpectrumSplit {
    std::map<unsigned, Integer> algebraic_traces;
    std::map<unsigned, Rational> transcendental_traces;
    unsigned r_alg = 0;
    unsigned r_T = 22;

    static SpectrumSplit from_traces(const std::map<unsigned, Rational>& total, const std::map<unsigned, Integer>& alg,
                                     unsigned r_alg) {
        if (r_alg > 22) throw InputError("SpectrumSplit: algebraic rank exceeds 22");
        SpectrumSplit s;
        s.r_alg = r_alg;
        s.r_T = 22 - r_alg;
        for (const auto& [k, t] : total) {
            auto it = alg.find(k);
            if (it == alg.end()) throw InputError("SpectrumSplit: missing algebraic trace for k=" + std::to_string(k));
            s.algebraic_traces[k] = it->second;
            Rational tt = t - Rational(it->second);
            tt.canonicalize();
            if (abs(tt) > s.r_T) {
                throw MathError("transcendental trace " + tt.get_str() + " at k=" + std::to_string(k) +
                                " exceeds dim T = " + std::to_string(s.r_T));
            }
            s.transcendental_traces[k] = tt;
        }
        return s;
    }

    bool consistent() const {
        return algebraic_traces.size() == transcendental_traces.size();
    }

    /// det Frob on T: the rank-20 fast path when dim T = 2, otherwise full
    /// reconstruction (needs ceil(dim T / 2) traces, and both signs tested).
    std::optional<int> det_transcendental(std::optional<std::uint64_t> p = std::nullopt) const {
        if (r_T == 0) return 1;
        if (r_T == 2) {
            auto t1 = transcendental_traces.find(1), t2 = transcendental_traces.find(2);
            if (t1 == transcendental_traces.end() || t2 == transcendental_traces.end()) {
                throw InputError("rank-20 determinant needs the traces for k = 1 and 2");
            }
            return det_transcendental_rank20(t1->second, t2->second);
        }
        std::vector<Rational> ts;
        for (unsigned k = 1; transcendental_traces.count(k); ++k) ts.push_back(transcendental_traces.at(k));
        if (ts.size() < (r_T + 1) / 2) throw InputError("not enough traces to reconstruct the transcendental part");
        return determine_sign(ts, r_T, p).det;
    }
};

}  // namespace k3char

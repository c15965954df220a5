#pragma once

// Macaulay resultants and the discriminants built from them.

#include <algorithm>
#include <set>
#include <vector>

#include "k3char/count.hpp"
#include "k3char/error.hpp"
#include "k3char/mpoly.hpp"
#include "k3char/qnum.hpp"

namespace k3char {

using IntMatrix = std::vector<std::vector<Integer>>;

/// Fraction-free Gaussian elimination; exact over Z.
inline Integer bareiss_det(IntMatrix a) {
    const std::size_t n = a.size();
    if (n == 0) return 1;
    for (const auto& row : a) {
        if (row.size() != n) throw InputError("bareiss_det: matrix is not square");
    }
    int sign = 1;
    Integer prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t r = k + 1;
            while (r < n && a[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(a[k], a[r]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                Integer v = a[i][j] * a[k][k] - a[i][k] * a[k][j];
                mpz_divexact(a[i][j].get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

namespace detail {

inline void monomials_of_degree(std::size_t nvars, unsigned deg, Exponents& cur, std::size_t pos,
                                std::vector<Exponents>& out) {
    if (pos + 1 == nvars) {
        cur[pos] = deg;
        out.push_back(cur);
        return;
    }
    for (unsigned e = deg + 1; e-- > 0;) {
        cur[pos] = e;
        monomials_of_degree(nvars, deg - e, cur, pos + 1, out);
    }
}

struct MacaulayMatrices {
    IntMatrix full, minor;
};

// Rows indexed by degree-t monomials m; row m holds (m / x_i^{d_i}) F_i for
// the first i with x_i^{d_i} | m. The minor keeps the monomials divisible by
// at least two of the x_i^{d_i}.
inline MacaulayMatrices macaulay_matrices(const std::vector<MultiPoly>& forms, const std::vector<unsigned>& degs) {
    const std::size_t nv = forms.size();
    unsigned t = 1;
    for (unsigned d : degs) t += d - 1;
    std::vector<Exponents> mons;
    Exponents cur(nv, 0);
    monomials_of_degree(nv, t, cur, 0, mons);  // lex descending
    std::map<Exponents, std::size_t> index;
    for (std::size_t i = 0; i < mons.size(); ++i) index[mons[i]] = i;

    MacaulayMatrices out;
    out.full.assign(mons.size(), std::vector<Integer>(mons.size(), 0));
    std::vector<std::size_t> nonreduced;
    for (std::size_t r = 0; r < mons.size(); ++r) {
        const auto& m = mons[r];
        std::size_t first = nv, count = 0;
        for (std::size_t i = 0; i < nv; ++i) {
            if (m[i] >= degs[i]) {
                if (first == nv) first = i;
                ++count;
            }
        }
        Exponents shift = m;
        shift[first] -= degs[first];
        for (const auto& [e, c] : forms[first].terms()) {
            Exponents target(nv);
            for (std::size_t i = 0; i < nv; ++i) target[i] = e[i] + shift[i];
            out.full[r][index.at(target)] = c;
        }
        if (count >= 2) nonreduced.push_back(r);
    }
    out.minor.assign(nonreduced.size(), std::vector<Integer>(nonreduced.size()));
    for (std::size_t i = 0; i < nonreduced.size(); ++i) {
        for (std::size_t j = 0; j < nonreduced.size(); ++j) out.minor[i][j] = out.full[nonreduced[i]][nonreduced[j]];
    }
    return out;
}

inline IntMatrix add_diagonal(IntMatrix a, const Integer& lambda) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i][i] += lambda;
    return a;
}

// x_j -> x_j + s x_{j+1} (upper) or x_{j+1} -> x_{j+1} + s x_j (lower); det 1.
inline std::vector<MultiPoly> shear(const std::vector<MultiPoly>& forms, long s, bool upper) {
    const std::size_t nv = forms.size();
    std::vector<MultiPoly> images;
    for (std::size_t j = 0; j < nv; ++j) images.push_back(MultiPoly::variable(nv, j));
    for (std::size_t j = 0; j + 1 < nv; ++j) {
        if (upper) images[j] += MultiPoly::variable(nv, j + 1).scale(s);
        else images[j + 1] += MultiPoly::variable(nv, j).scale(s);
    }
    std::vector<MultiPoly> out;
    for (const auto& f : forms) out.push_back(f.substitute(images));
    return out;
}

// Perturb F_i by lambda x_i^{d_i}: Res(lambda) = det(M + lambda)/det(M' + lambda)
// is a polynomial of known degree; interpolate its value at 0.
inline Integer resultant_by_perturbation(const std::vector<MultiPoly>& forms, const std::vector<unsigned>& degs) {
    const std::size_t nv = forms.size();
    auto mm = macaulay_matrices(forms, degs);
    std::size_t rdeg = 0;
    for (std::size_t i = 0; i < nv; ++i) {
        std::size_t prod = 1;
        for (std::size_t j = 0; j < nv; ++j) {
            if (j != i) prod *= degs[j];
        }
        rdeg += prod;
    }
    std::vector<std::pair<Integer, Integer>> samples;
    for (long lam = 1; samples.size() < rdeg + 1; ++lam) {
        Integer den = bareiss_det(add_diagonal(mm.minor, lam));
        if (den == 0) continue;
        Integer num = bareiss_det(add_diagonal(mm.full, lam));
        Integer q;
        mpz_divexact(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
        samples.emplace_back(Integer(lam), q);
    }
    Rational at0 = 0;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        Rational w = samples[j].second;
        for (std::size_t k = 0; k < samples.size(); ++k) {
            if (k == j) continue;
            Rational f(samples[k].first, samples[k].first - samples[j].first);
            f.canonicalize();
            w *= f;
        }
        at0 += w;
    }
    at0.canonicalize();
    if (at0.get_den() != 1) throw InternalError("macaulay_resultant: interpolation did not return an integer");
    return at0.get_num();
}

}  // namespace detail

/// Resultant of n+1 homogeneous forms in n+1 variables, normalized by
/// Res(x_0^{d_0}, ..., x_n^{d_n}) = 1.
inline Integer macaulay_resultant(const std::vector<MultiPoly>& forms) {
    const std::size_t nv = forms.size();
    if (nv == 0) throw InputError("macaulay_resultant: no forms");
    std::vector<unsigned> degs;
    for (const auto& f : forms) {
        if (f.nvars() != nv) throw InputError("macaulay_resultant: need n+1 forms in n+1 variables");
        if (f.is_zero()) return 0;
        auto d = f.homogeneous_degree();
        if (!d) throw InputError("macaulay_resultant: form is not homogeneous");
        if (*d == 0) throw InputError("macaulay_resultant: constant form");
        degs.push_back(*d);
    }

    // direct, then a few det-1 changes of variables
    std::vector<std::vector<MultiPoly>> attempts{forms};
    for (long s : {1L, -1L, 2L, -2L, 3L}) {
        attempts.push_back(detail::shear(forms, s, true));
        attempts.push_back(detail::shear(forms, s, false));
    }
    for (const auto& fs : attempts) {
        auto mm = detail::macaulay_matrices(fs, degs);
        Integer den = bareiss_det(mm.minor);
        if (den == 0) continue;
        Integer num = bareiss_det(mm.full);
        Integer q;
        mpz_divexact(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
        if (q * den != num) throw InternalError("macaulay_resultant: inexact quotient");
        return q;
    }

    return detail::resultant_by_perturbation(forms, degs);
}

namespace detail {

inline std::vector<MultiPoly> gradient(const MultiPoly& f) {
    std::vector<MultiPoly> g;
    for (std::size_t i = 0; i < f.nvars(); ++i) g.push_back(f.partial_derivative(i));
    return g;
}

inline Integer exact_div(const Integer& a, const Integer& b, const char* what) {
    Integer q, r;
    mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    if (r != 0) throw InternalError(std::string(what) + ": division not exact");
    return q;
}

inline void require_form(const MultiPoly& f, std::size_t nvars, unsigned deg, const char* what) {
    if (f.nvars() != nvars) throw InputError(std::string(what) + ": expected " + std::to_string(nvars) + " variables");
    auto d = f.homogeneous_degree();
    if (!d || *d != deg) throw InputError(std::string(what) + ": expected a form of degree " + std::to_string(deg));
}

}  // namespace detail

/// Res of the three partials of Fermat's quartic is 4^27 = 2^54; the divided
/// discriminant is normalized to 2^40 there.
inline const Integer kQuarticResultantScale = Integer(1) << 14;
/// Res of the partials of X0^6+X1^6+X2^6 is 6^75, normalized to 6^54.
inline const Integer kSexticResultantScale = integer_pow(6, 21);

/// Divided discriminant of a ternary quartic; homogeneous of degree 27.
inline Integer delta_ternary_quartic(const MultiPoly& f4) {
    detail::require_form(f4, 3, 4, "delta_ternary_quartic");
    return detail::exact_div(macaulay_resultant(detail::gradient(f4)), kQuarticResultantScale, "delta_ternary_quartic");
}

/// Divided discriminant of a ternary sextic.
inline Integer delta_ternary_sextic(const MultiPoly& f6) {
    detail::require_form(f6, 3, 6, "delta_ternary_sextic");
    return detail::exact_div(macaulay_resultant(detail::gradient(f6)), kSexticResultantScale, "delta_ternary_sextic");
}

/// delta(f2^2 - 4 c f4) / c^14.
inline Integer delta_dp(const Integer& c, const MultiPoly& f2, const MultiPoly& f4) {
    if (c == 0) throw InputError("delta_dp: c must be nonzero");
    if (!f2.is_zero()) detail::require_form(f2, 3, 2, "delta_dp");
    detail::require_form(f4, 3, 4, "delta_dp");
    MultiPoly g = f4.scale(-4 * c);
    if (!f2.is_zero()) g += f2 * f2;
    return detail::exact_div(delta_ternary_quartic(g), integer_pow(c, 14), "delta_dp");
}

struct SpecialQuarticDisc {
    Integer c, delta_f4, delta_dp, value;
};

inline SpecialQuarticDisc special_quartic_disc_parts(const Integer& c, const MultiPoly& f2, const MultiPoly& f4) {
    SpecialQuarticDisc d;
    d.c = c;
    d.delta_f4 = delta_ternary_quartic(f4);
    d.delta_dp = delta_dp(c, f2, f4);
    d.value = detail::exact_div(c * d.delta_f4 * d.delta_dp * d.delta_dp, Integer(1) << 52, "special_quartic_disc");
    return d;
}

/// 2^-52 c delta(f4) delta_dp^2.
inline Integer special_quartic_disc(const Integer& c, const MultiPoly& f2, const MultiPoly& f4) {
    return special_quartic_disc_parts(c, f2, f4).value;
}

/// Divided discriminant Delta_d of a form of degree d in n+1 variables;
/// available for (n, d) = (2, 4) and (2, 6).
inline Integer divided_discriminant(const MultiPoly& s, unsigned n, unsigned d) {
    if (n == 2 && d == 4) return delta_ternary_quartic(s);
    if (n == 2 && d == 6) return delta_ternary_sextic(s);
    throw MathError("divided discriminant for (n, d) = (" + std::to_string(n) + ", " + std::to_string(d) +
                    ") not implemented");
}

/// Normalized discriminant of t w^2 = s: (-1)^{nd/4} t Delta_d(s).
inline Integer double_cover_disc(const Integer& t, const MultiPoly& s, unsigned n, unsigned d) {
    if (n % 2 || d % 2) throw InputError("double_cover_disc: n and d must be even");
    if (t == 0) throw InputError("double_cover_disc: t must be nonzero");
    detail::require_form(s, n + 1, d, "double_cover_disc");
    Integer v = t * divided_discriminant(s, n, d);
    return (n * d / 4) % 2 ? Integer(-v) : v;
}

/// (d-1)^n (n+1).
inline Integer boole_degree(unsigned n, unsigned d) {
    // d = 1: a linear form is never singular, degree 0
    if (n == 0 || d < 1) throw InputError("boole_degree: need n >= 1, d >= 1");
    return integer_pow(Integer(d - 1), n) * (n + 1);
}

namespace detail {

// sum over e_0 + ... + e_c = total of (e_0 + 1) prod (1 - d_i)^{e_i}
inline Integer hirzebruch_sum(const std::vector<unsigned>& degs, std::size_t pos, unsigned total) {
    if (pos == degs.size()) return Integer(total + 1);  // remaining weight goes to e_0
    Integer s = 0;
    for (unsigned e = 0; e <= total; ++e) {
        s += integer_pow(Integer(1) - degs[pos], e) * hirzebruch_sum(degs, pos + 1, total - e);
    }
    return s;
}

}  // namespace detail

/// Middle Betti number of a smooth complete intersection of the given degrees in P^n.
inline Integer middle_betti_ci(unsigned n, const std::vector<unsigned>& degs) {
    const unsigned c = static_cast<unsigned>(degs.size());
    if (c < 1 || c > n) throw InputError("middle_betti_ci: need 1 <= c <= n");
    for (unsigned d : degs) {
        if (d < 2) throw InputError("middle_betti_ci: degrees must be >= 2");
    }
    const unsigned dim = n - c;
    Integer prod = 1;
    for (unsigned d : degs) prod *= d;
    Integer v = prod * detail::hirzebruch_sum(degs, 0, dim) - n + c + (dim % 2 ? -1 : 0);
    return dim % 2 ? Integer(-v) : v;
}

/// Middle Betti number of the double cover of P^n branched along a degree d hypersurface.
inline Integer middle_betti_dc(unsigned n, unsigned d) {
    if (n < 1 || d < 2 || d % 2) throw InputError("middle_betti_dc: need n >= 1 and even d >= 2");
    Integer s = 0;
    for (unsigned e1 = 0; e1 <= n - 1; ++e1) s += Integer(n - 1 - e1 + 1) * integer_pow(Integer(1) - d, e1);
    Integer v = Integer(n) + (n % 2 ? 1 : 2) - d * s;
    return n % 2 ? Integer(-v) : v;
}

/// c X3^4 + f2 X3^2 + f4 when the quartic only involves even powers of X3.
inline std::optional<Surface> as_special_quartic(const MultiPoly& q) {
    if (q.nvars() != 4) return std::nullopt;
    Integer c = 0;
    MultiPoly f2(3), f4(3);
    for (const auto& [e, coef] : q.terms()) {
        Exponents low{e[0], e[1], e[2]};
        switch (e[3]) {
            case 0: f4.add_term(low, coef); break;
            case 2: f2.add_term(low, coef); break;
            case 4: c = coef; break;
            default: return std::nullopt;
        }
    }
    if (c == 0) return std::nullopt;
    return Surface::special_quartic(c, f2, f4);
}

struct NormalizedDiscriminant {
    Integer value;
    // multiplicative pieces whose prime support is the support of value
    std::vector<Integer> pieces;
};

inline NormalizedDiscriminant normalized_discriminant(const Surface& s) {
    NormalizedDiscriminant out;
    switch (s.kind()) {
        case SurfaceKind::DoubleSextic: {
            Integer d6 = delta_ternary_sextic(s.f6());
            out.value = -d6;  // (-1)^{2*6/4}
            out.pieces = {d6};
            return out;
        }
        case SurfaceKind::SpecialQuartic: {
            auto p = special_quartic_disc_parts(s.c(), s.f2(), s.f4());
            out.value = p.value;
            out.pieces = {p.c, p.delta_f4, p.delta_dp};
            return out;
        }
        case SurfaceKind::Quartic3: {
            if (auto sq = as_special_quartic(s.quartic())) return normalized_discriminant(*sq);
            throw MathError("discriminant of a general space quartic (degree 108) not implemented");
        }
    }
    throw InternalError("normalized_discriminant: unknown kind");
}

/// Prime support of the normalized discriminant, always including 2.
inline std::vector<Integer> bad_primes(const Surface& s, const FactorBudget& budget = {}) {
    auto nd = normalized_discriminant(s);
    if (nd.value == 0) throw MathError("discriminant vanishes: the surface is singular");
    std::set<Integer> primes{Integer(2)};
    for (const auto& piece : nd.pieces) {
        for (const auto& p : factorize(piece, budget).primes()) primes.insert(p);
    }
    return {primes.begin(), primes.end()};
}

}  // namespace k3char

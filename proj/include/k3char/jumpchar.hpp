#pragma once

// Delta_{H^2}, Delta_Pic and the jump character: Galois decompositions of the
// Picard representation, the two GF(2) character algorithms, Frobenius
// determinant oracles, and the jump-prime census.

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "k3char/count.hpp"
#include "k3char/disc.hpp"
#include "k3char/gfield.hpp"
#include "k3char/qnum.hpp"
#include "k3char/zeta.hpp"

namespace k3char {

using json = nlohmann::ordered_json;

inline json integer_json(const Integer& v) {
    if (v.fits_slong_p()) return v.get_si();
    return v.get_str();
}

inline Integer integer_from_json(const json& j) {
    if (j.is_number_integer()) return Integer(j.get<long>());
    if (j.is_string()) {
        Integer v;
        if (v.set_str(j.get<std::string>(), 10) != 0) throw InputError("not an integer: " + j.get<std::string>());
        return v;
    }
    throw InputError("expected an integer, got " + j.dump());
}

inline json class_json(const SquareClass& c) { return integer_json(c.value()); }

// ---------------------------------------------------------------------------
// Galois decompositions

/// NS(S_Qbar) (x) Q as a sum of quadratic characters and two-dimensional
/// representations V of Gal(Q(zeta_3, m^{1/3})/Q) = S_3.
struct GaloisDecomposition {
    std::vector<std::pair<SquareClass, unsigned>> quadratic;
    std::vector<std::pair<Integer, unsigned>> s3;

    unsigned dimension() const {
        unsigned d = 0;
        for (const auto& q : quadratic) d += q.second;
        for (const auto& s : s3) d += 2 * s.second;
        return d;
    }

    void validate() const {
        if (dimension() > 20) throw InputError("Galois decomposition of dimension " + std::to_string(dimension()) + " > 20");
        for (const auto& [m, mult] : s3) {
            if (m == 0 || m == 1 || m == -1) throw InputError("s3 summand needs m other than 0, +-1");
            for (const auto& pp : factorize(m).factors) {
                if (pp.exponent >= 3) throw InputError("s3 summand m must be cubefree");
            }
            (void)mult;
        }
    }

    /// Delta_Pic: product of the odd-multiplicity quadratic classes and one
    /// factor -3 per copy of V.
    SquareClass det_class() const {
        SquareClass c = SquareClass::of(1);
        for (const auto& [q, mult] : quadratic) {
            if (mult % 2) c = c * q;
        }
        unsigned v = 0;
        for (const auto& s : s3) v += s.second;
        if (v % 2) c = c * SquareClass::of(-3);
        return c;
    }

    bool ramified_at(std::uint64_t p) const {
        Integer P(static_cast<unsigned long>(p));
        for (const auto& q : quadratic) {
            if (q.first.value() % P == 0) return true;
        }
        for (const auto& s : s3) {
            if ((3 * s.first) % P == 0) return true;
        }
        return false;
    }

    json to_json() const {
        json j;
        j["quadratic"] = json::array();
        for (const auto& [q, m] : quadratic) j["quadratic"].push_back({{"class", class_json(q)}, {"mult", m}});
        j["s3"] = json::array();
        for (const auto& [m, mult] : s3) j["s3"].push_back({{"m", integer_json(m)}, {"mult", mult}});
        return j;
    }

    static GaloisDecomposition from_json(const json& j) {
        if (!j.is_object()) throw InputError("decomposition must be a JSON object");
        GaloisDecomposition d;
        for (const auto& q : j.value("quadratic", json::array())) {
            d.quadratic.emplace_back(SquareClass::of(integer_from_json(q.at("class"))), q.at("mult").get<unsigned>());
        }
        for (const auto& s : j.value("s3", json::array())) {
            d.s3.emplace_back(integer_from_json(s.at("m")), s.at("mult").get<unsigned>());
        }
        d.validate();
        return d;
    }
};

inline void require_unramified(const GaloisDecomposition& D, std::uint64_t p) {
    if (p < 3 || !is_probable_prime(p)) throw InputError(std::to_string(p) + " is not an odd prime");
    if (D.ramified_at(p)) throw MathError(std::to_string(p) + " ramifies in the Galois decomposition");
}

/// det Frob_p on the Picard part.
inline int det_pic_at(const GaloisDecomposition& D, std::uint64_t p) {
    require_unramified(D, p);
    int d = 1;
    for (const auto& [q, mult] : D.quadratic) {
        if (mult % 2) d *= symbol_at(q, p);
    }
    for (const auto& s : D.s3) {
        if (s.second % 2) d *= symbol_at(SquareClass::of(-3), p);
    }
    return d;
}

/// Trace of Frob_p^k on the Picard part.
inline Integer pic_trace_at(const GaloisDecomposition& D, std::uint64_t p, unsigned k) {
    require_unramified(D, p);
    if (k == 0) throw InputError("pic_trace_at: k must be positive");
    Integer t = 0;
    for (const auto& [q, mult] : D.quadratic) {
        int chi = symbol_at(q, p);
        t += (k % 2 && chi == -1) ? -static_cast<long>(mult) : static_cast<long>(mult);
    }
    for (const auto& [m, mult] : D.s3) {
        int s;
        bool qmod3_is_1 = p % 3 == 1 || k % 2 == 0;
        if (!qmod3_is_1) {
            s = 0;
        } else if (p % 3 == 2) {
            s = 2;  // cubing is bijective on F_p, so m is a cube in F_p already
        } else {
            Integer P(static_cast<unsigned long>(p));
            s = (k % 3 == 0 || cubic_residue(m, P)) ? 2 : -1;
        }
        t += s * static_cast<long>(mult);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Prime sources

/// Odd primes avoiding a bad set; ascending, an explicit list, or a seeded
/// random order within growing windows.
class PrimeSource {
public:
    static PrimeSource ascending(std::vector<Integer> bad, std::uint64_t start = 3) {
        PrimeSource s(std::move(bad));
        s.mode_ = Mode::Ascending;
        s.cursor_ = start;
        return s;
    }
    static PrimeSource from_list(std::vector<std::uint64_t> primes, std::vector<Integer> bad = {}) {
        PrimeSource s(std::move(bad));
        s.mode_ = Mode::List;
        s.list_ = std::move(primes);
        return s;
    }
    static PrimeSource shuffled(std::vector<Integer> bad, std::uint64_t seed, std::uint64_t window = 1000) {
        PrimeSource s(std::move(bad));
        s.mode_ = Mode::Shuffled;
        s.rng_.seed(seed);
        s.window_ = window;
        s.cursor_ = 3;
        return s;
    }

    std::optional<std::uint64_t> next() {
        for (;;) {
            std::optional<std::uint64_t> p;
            switch (mode_) {
                case Mode::Ascending:
                    while (!is_probable_prime(cursor_)) ++cursor_;
                    p = cursor_++;
                    break;
                case Mode::List:
                    if (pos_ >= list_.size()) return std::nullopt;
                    p = list_[pos_++];
                    break;
                case Mode::Shuffled:
                    if (pos_ >= list_.size()) refill();
                    p = list_[pos_++];
                    break;
            }
            if (*p < 3 || !is_probable_prime(*p)) throw InputError("prime source produced " + std::to_string(*p));
            if (!is_bad(*p)) return p;
        }
    }

private:
    enum class Mode { Ascending, List, Shuffled };

    explicit PrimeSource(std::vector<Integer> bad) : bad_(std::move(bad)) {}

    bool is_bad(std::uint64_t p) const {
        Integer P(static_cast<unsigned long>(p));
        return std::any_of(bad_.begin(), bad_.end(), [&](const Integer& b) { return b == P; });
    }

    void refill() {
        list_.clear();
        pos_ = 0;
        std::uint64_t hi = cursor_ + window_;
        for (std::uint64_t p = cursor_; p < hi; ++p) {
            if (is_probable_prime(p)) list_.push_back(p);
        }
        cursor_ = hi;
        window_ *= 2;
        std::shuffle(list_.begin(), list_.end(), rng_);
        if (list_.empty()) refill();
    }

    std::vector<Integer> bad_;
    Mode mode_ = Mode::Ascending;
    std::uint64_t cursor_ = 3, window_ = 1000;
    std::vector<std::uint64_t> list_;
    std::size_t pos_ = 0;
    std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// The two GF(2) algorithms

using DetOracle = std::function<int(std::uint64_t)>;

struct Evidence {
    std::uint64_t p;
    int det;
    std::string method;
};

namespace detail {

// -1 followed by the bad primes other than those listed twice
inline std::vector<Integer> character_basis(const std::vector<Integer>& bad) {
    std::vector<Integer> q{Integer(-1)};
    std::set<Integer> seen;
    for (const auto& b : bad) {
        if (b <= 1 || !is_probable_prime(b)) throw InputError("bad prime " + b.get_str() + " is not prime");
        if (seen.insert(b).second) q.push_back(b);
    }
    return q;
}

inline std::vector<int> symbol_row(const std::vector<Integer>& basis, std::uint64_t p) {
    std::vector<int> row;
    Integer P(static_cast<unsigned long>(p));
    for (const auto& q : basis) row.push_back(jacobi_symbol(q, P) == -1 ? 1 : 0);
    return row;
}

inline SquareClass class_from_vector(const std::vector<Integer>& basis, const std::vector<int>& x) {
    Integer v = 1;
    for (std::size_t j = 0; j < basis.size(); ++j) {
        if (x[j]) v *= basis[j];
    }
    return SquareClass::of(v);
}

}  // namespace detail

struct DeltaResult {
    SquareClass delta;
    std::vector<Evidence> evidence;
    std::size_t rank = 0;
};

/// Recovers the square class Delta supported on {-1} u bad from the values
/// (Delta/p) = oracle(p). extra_rows further primes are queried and must be
/// consistent.
inline DeltaResult alg_delta(const std::vector<Integer>& bad, const DetOracle& oracle, PrimeSource source,
                             std::size_t extra_rows = 0, std::size_t max_primes = 100000) {
    auto basis = detail::character_basis(bad);
    const std::size_t m1 = basis.size();
    GF2Matrix A(0, m1);
    std::vector<int> b;
    DeltaResult out;
    std::size_t extra = 0;
    for (std::size_t used = 0; out.rank < m1 || extra < extra_rows; ++used) {
        if (used >= max_primes) throw ResourceError("alg_delta: prime budget exhausted before full rank");
        auto p = source.next();
        if (!p) throw ResourceError("alg_delta: prime source exhausted before full rank " + std::to_string(m1));
        int d = oracle(*p);
        if (d != 1 && d != -1) throw InternalError("oracle returned " + std::to_string(d));
        out.evidence.push_back({*p, d, ""});
        A.append_row(detail::symbol_row(basis, *p));
        b.push_back(d == -1 ? 1 : 0);
        if (out.rank == m1) ++extra;
        out.rank = A.rank();
    }
    auto x = A.solve(b);
    if (!x) throw MathError("alg_delta: oracle values are inconsistent with any square class supported on the bad primes");
    out.delta = detail::class_from_vector(basis, *x);
    return out;
}

struct JumpCandidates {
    std::vector<SquareClass> candidates;
    std::size_t kernel_dim = 0;
    std::vector<Integer> basis;
};

inline bool class_less(const SquareClass& a, const SquareClass& b) {
    int c = mpz_cmpabs(a.value().get_mpz_t(), b.value().get_mpz_t());
    if (c != 0) return c < 0;
    return a.value() > b.value();  // positive first
}

/// Classes supported on {-1} u bad that are +1 at every given nonjump prime.
inline JumpCandidates alg_jump(const std::vector<Integer>& bad, const std::vector<std::uint64_t>& nonjump) {
    auto basis = detail::character_basis(bad);
    GF2Matrix A(0, basis.size());
    for (auto p : nonjump) {
        if (p < 3 || !is_probable_prime(p)) throw InputError(std::to_string(p) + " is not an odd prime");
        Integer P(static_cast<unsigned long>(p));
        if (std::find(basis.begin(), basis.end(), P) != basis.end()) throw InputError(std::to_string(p) + " is a bad prime");
        A.append_row(detail::symbol_row(basis, p));
    }
    auto ker = A.kernel();
    JumpCandidates out;
    out.kernel_dim = ker.size();
    out.basis = basis;
    if (ker.size() > 20) throw ResourceError("alg_jump: kernel of dimension " + std::to_string(ker.size()) + " too large to list");
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << ker.size()); ++mask) {
        std::vector<int> v(basis.size(), 0);
        for (std::size_t i = 0; i < ker.size(); ++i) {
            if (mask >> i & 1) {
                for (std::size_t j = 0; j < v.size(); ++j) v[j] ^= ker[i][j];
            }
        }
        out.candidates.push_back(detail::class_from_vector(basis, v));
    }
    std::sort(out.candidates.begin(), out.candidates.end(), class_less);
    return out;
}

/// Q(sqrt(d)) ramifies at p.
inline bool ramifies_at(const SquareClass& c, const Integer& p) {
    if (p == 2) return mod_floor(c.value(), 4) != 1;
    return c.value() % p == 0;
}

/// Keeps the candidates that ramify at p0, where the reduction mod p0 is
/// asserted to have a single ordinary double point.
inline std::vector<SquareClass> filter_single_node(const std::vector<SquareClass>& candidates, const Integer& p0) {
    std::vector<SquareClass> out;
    for (const auto& c : candidates) {
        if (ramifies_at(c, p0)) out.push_back(c);
    }
    return out;
}

/// Odd primes p <= B, coprime to the class, with (jump/p) = -1.
inline std::vector<std::uint64_t> predict_jump_primes(const SquareClass& jump, std::uint64_t B) {
    std::vector<std::uint64_t> out;
    if (jump.is_trivial()) return out;
    for (auto p : odd_primes_up_to(B)) {
        Integer P(static_cast<unsigned long>(p));
        if (jump.value() % P == 0) continue;
        if (jacobi_symbol(jump.value(), P) == -1) out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form families

enum class ClosedForm { DiagonalQuartic, FermatSextic };

inline std::optional<ClosedForm> closed_form_family(const Surface& s) {
    switch (s.kind()) {
        case SurfaceKind::Quartic3:
        case SurfaceKind::SpecialQuartic:
            if (s.quartic() == parse("X0^4+X1^4+X2^4+X3^4", 4)) return ClosedForm::DiagonalQuartic;
            return std::nullopt;
        case SurfaceKind::DoubleSextic:
            if (s.f6() == parse("X0^6+X1^6+X2^6", 3)) return ClosedForm::FermatSextic;
            return std::nullopt;
    }
    return std::nullopt;
}

/// The Picard representation of the two families over Q.
inline GaloisDecomposition builtin_decomposition(ClosedForm f) {
    GaloisDecomposition d;
    if (f == ClosedForm::DiagonalQuartic) {
        d.quadratic = {{SquareClass::of(1), 5}, {SquareClass::of(-1), 3}, {SquareClass::of(2), 6}, {SquareClass::of(-2), 6}};
    } else {
        d.quadratic = {{SquareClass::of(1), 4}, {SquareClass::of(-1), 4}, {SquareClass::of(3), 3}, {SquareClass::of(-3), 3}};
        d.s3 = {{Integer(2), 3}};
    }
    return d;
}

inline std::vector<Integer> builtin_bad_primes(ClosedForm f) {
    return f == ClosedForm::DiagonalQuartic ? std::vector<Integer>{2} : std::vector<Integer>{2, 3};
}

// ---------------------------------------------------------------------------
// Frobenius determinant oracles

/// det Frob_p on H^2(1) from point counts at p and p^2, assuming a Galois
/// decomposition of rank 20 (otherwise ceil(rank T / 2) counts are needed).
class CountOracle {
public:
    CountOracle(Surface s, GaloisDecomposition D, CountOptions opt = {}, CountCache* cache = nullptr)
        : s_(std::move(s)), D_(std::move(D)), opt_(opt), cache_(cache) {}

    int operator()(std::uint64_t p) {
        unsigned rT = 22 - D_.dimension();
        unsigned kmax = rT == 2 ? 2 : std::max(1u, (rT + 1) / 2);
        auto fd = traces(s_, p, kmax, opt_, cache_);
        std::map<unsigned, Rational> total;
        std::map<unsigned, Integer> alg;
        for (unsigned k = 1; k <= kmax; ++k) {
            total[k] = fd.traces.at(k);
            alg[k] = pic_trace_at(D_, p, k);
        }
        auto split = SpectrumSplit::from_traces(total, alg, D_.dimension());
        auto dT = split.det_transcendental(p);
        if (!dT) throw MathError("det on the transcendental part is not determined by " + std::to_string(kmax) + " traces at p=" + std::to_string(p));
        int d = det_pic_at(D_, p) * *dT;
        log_.push_back({p, d, "counts"});
        return d;
    }

    const std::vector<Evidence>& log() const { return log_; }

private:
    Surface s_;
    GaloisDecomposition D_;
    CountOptions opt_;
    CountCache* cache_;
    std::vector<Evidence> log_;
};

/// det Frob_p from the closed-form Jacobi-sum eigenvalues. At split primes
/// the transcendental pair is known exactly; at inert primes only its square
/// (Frob_p^2) is, and the k = 1 count supplies the missing trace.
class SpectraOracle {
public:
    explicit SpectraOracle(const Surface& s, CountOptions opt = {}, CountCache* cache = nullptr) : s_(s), opt_(opt), cache_(cache) {
        auto f = closed_form_family(s);
        if (!f) throw MathError("no closed-form spectra for this surface");
        family_ = *f;
        D_ = builtin_decomposition(family_);
    }

    int operator()(std::uint64_t p) {
        Integer P(static_cast<unsigned long>(p));
        unsigned f = 0;
        Rational pair_trace;
        int pair_det = 1;
        if (family_ == ClosedForm::DiagonalQuartic) {
            auto pr = diag_quartic_transcendental_power(P, f);
            pair_trace = pr.trace(1);
            pair_det = pr.det();
        } else {
            auto pr = fermat_sextic_transcendental_power(P, f);
            pair_trace = pr.trace(1);
            pair_det = pr.det();
        }
        int dT;
        std::string method;
        if (f == 1) {
            dT = pair_det;
            method = "spectra";
        } else {
            auto fd = traces(s_, p, 1, opt_, cache_);
            Rational t1 = fd.traces.at(1) - Rational(pic_trace_at(D_, p, 1));
            dT = det_transcendental_rank20(t1, pair_trace);
            method = "spectra+count";
        }
        int d = det_pic_at(D_, p) * dT;
        log_.push_back({p, d, method});
        return d;
    }

    ClosedForm family() const { return family_; }
    const GaloisDecomposition& decomposition() const { return D_; }
    const std::vector<Evidence>& log() const { return log_; }

private:
    Surface s_;
    CountOptions opt_;
    CountCache* cache_;
    ClosedForm family_;
    GaloisDecomposition D_;
    std::vector<Evidence> log_;
};

// ---------------------------------------------------------------------------
// Census

struct CensusRow {
    std::uint64_t p;
    bool jump;
};

struct Census {
    std::vector<CensusRow> rows;  // good odd primes <= B
    std::size_t primes_up_to_B = 0;
    std::size_t jumps = 0;
    Rational gamma() const { return primes_up_to_B ? Rational(jumps, primes_up_to_B) : Rational(0); }
};

/// Jump indicator per good prime (transcendental eigenvalues are roots of
/// unity) and gamma(S, B) = #jump primes <= B / #primes <= B.
inline Census census(const Surface& s, std::uint64_t B) {
    auto f = closed_form_family(s);
    if (!f) throw MathError("census needs a surface with closed-form spectra");
    auto bad = builtin_bad_primes(*f);
    Census c;
    c.primes_up_to_B = B >= 2 ? 1 : 0;  // the prime 2
    for (auto p : odd_primes_up_to(B)) {
        ++c.primes_up_to_B;
        Integer P(static_cast<unsigned long>(p));
        if (std::find(bad.begin(), bad.end(), P) != bad.end()) continue;
        unsigned fdeg = 0;
        bool j = *f == ClosedForm::DiagonalQuartic ? diag_quartic_transcendental_power(P, fdeg).roots_of_unity()
                                                   : fermat_sextic_transcendental_power(P, fdeg).roots_of_unity();
        c.rows.push_back({p, j});
        c.jumps += j;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Reports

enum class ReportStatus { Proved, Statistical, CandidateSet };

inline std::string status_name(ReportStatus s) {
    switch (s) {
        case ReportStatus::Proved: return "proved";
        case ReportStatus::Statistical: return "statistical";
        case ReportStatus::CandidateSet: return "candidate-set";
    }
    return "?";
}

struct CharacterReport {
    std::optional<SquareClass> delta_h2, delta_pic, jump;
    std::vector<Evidence> evidence;
    ReportStatus status = ReportStatus::Proved;
    std::vector<SquareClass> candidates;
    std::optional<std::size_t> kernel_dim;
    std::vector<std::string> notes;

    void fill_jump() {
        if (delta_h2 && delta_pic) jump = *delta_h2 * *delta_pic;
    }

    json to_json() const {
        json j;
        j["schema"] = 1;
        j["delta_h2"] = delta_h2 ? class_json(*delta_h2) : json(nullptr);
        j["delta_pic"] = delta_pic ? class_json(*delta_pic) : json(nullptr);
        j["jump"] = jump ? class_json(*jump) : json(nullptr);
        j["status"] = status_name(status);
        if (kernel_dim) {
            j["kernel_dim"] = *kernel_dim;
            j["candidates"] = json::array();
            for (const auto& c : candidates) j["candidates"].push_back(class_json(c));
        }
        j["evidence"] = json::array();
        for (const auto& e : evidence) {
            json ev{{"p", e.p}, {"det", e.det}};
            if (!e.method.empty()) ev["method"] = e.method;
            j["evidence"].push_back(ev);
        }
        if (!notes.empty()) j["notes"] = notes;
        return j;
    }
};

/// Special quartic of geometric Picard rank 8 (hypothesis, not checked):
/// Delta_Pic = delta(f2^2 - 4 c f4), Delta_{H^2} = c delta(f4), jump = product.
inline CharacterReport rank8_special_quartic_report(const Surface& s) {
    Surface sq = s;
    if (s.kind() == SurfaceKind::Quartic3) {
        auto conv = as_special_quartic(s.quartic());
        if (!conv) throw InputError("surface is not a special quartic");
        sq = *conv;
    }
    if (sq.kind() != SurfaceKind::SpecialQuartic) throw InputError("surface is not a special quartic");
    MultiPoly g = sq.f4().scale(-4 * sq.c());
    if (!sq.f2().is_zero()) g += sq.f2() * sq.f2();
    Integer d4 = delta_ternary_quartic(sq.f4());
    Integer ddp = delta_ternary_quartic(g);
    if (d4 == 0 || ddp == 0) throw MathError("special quartic is singular");
    CharacterReport r;
    r.delta_h2 = SquareClass::of(sq.c() * d4);
    r.delta_pic = SquareClass::of(ddp);
    r.fill_jump();
    r.status = ReportStatus::Proved;
    r.notes.push_back("assumes geometric Picard rank 8 (not verified)");
    r.notes.push_back("delta(f4) = " + d4.get_str());
    r.notes.push_back("delta(f2^2-4cf4) = " + ddp.get_str());
    return r;
}

}  // namespace k3char

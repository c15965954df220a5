#pragma once

// Point counting over F_{p^k} for quartics in P^3 and double covers of P^n,
// trace extraction, and the on-disk count cache.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "k3char/error.hpp"
#include "k3char/gfield.hpp"
#include "k3char/mpoly.hpp"
#include "k3char/qnum.hpp"

namespace k3char {

enum class SurfaceKind { Quartic3, SpecialQuartic, DoubleSextic };

inline std::string kind_name(SurfaceKind k) {
    switch (k) {
        case SurfaceKind::Quartic3: return "quartic3";
        case SurfaceKind::SpecialQuartic: return "special_quartic";
        case SurfaceKind::DoubleSextic: return "double_sextic";
    }
    return "?";
}

/// A K3 surface over Q: a quartic in P^3 (optionally of the special shape
/// c X3^4 + f2 X3^2 + f4), or the double cover w^2 = f6 of P^2.
class Surface {
public:
    static Surface quartic3(MultiPoly f) {
        if (f.nvars() != 4 || f.homogeneous_degree() != 4u) {
            throw InputError("quartic3: expected a homogeneous quartic in X0..X3");
        }
        Surface s(SurfaceKind::Quartic3);
        s.quartic_ = std::move(f);
        return s;
    }

    static Surface special_quartic(const Integer& c, MultiPoly f2, MultiPoly f4) {
        if (c == 0) throw InputError("special_quartic: c must be nonzero");
        if (f2.nvars() != 3 || f4.nvars() != 3) throw InputError("special_quartic: f2 and f4 must be ternary");
        if (!f2.is_zero() && f2.homogeneous_degree() != 2u) throw InputError("special_quartic: f2 must be a quadratic form");
        if (f4.homogeneous_degree() != 4u) throw InputError("special_quartic: f4 must be a quartic form");
        Surface s(SurfaceKind::SpecialQuartic);
        s.c_ = c;
        s.f2_ = std::move(f2);
        s.f4_ = std::move(f4);
        std::vector<MultiPoly> lift;
        for (std::size_t i = 0; i < 3; ++i) lift.push_back(MultiPoly::variable(4, i));
        MultiPoly x3 = MultiPoly::variable(4, 3);
        s.quartic_ = x3.pow(4).scale(c) + s.f2_.substitute(lift) * x3.pow(2) + s.f4_.substitute(lift);
        return s;
    }

    static Surface double_sextic(MultiPoly f6) {
        if (f6.nvars() != 3 || f6.homogeneous_degree() != 6u) {
            throw InputError("double_sextic: expected a homogeneous sextic in X0..X2");
        }
        Surface s(SurfaceKind::DoubleSextic);
        s.f6_ = std::move(f6);
        return s;
    }

    SurfaceKind kind() const { return kind_; }
    /// The quartic in X0..X3 (Quartic3 and SpecialQuartic).
    const MultiPoly& quartic() const {
        if (kind_ == SurfaceKind::DoubleSextic) throw InputError("double_sextic has no quartic form");
        return quartic_;
    }
    const Integer& c() const { return c_; }
    const MultiPoly& f2() const { return f2_; }
    const MultiPoly& f4() const { return f4_; }
    const MultiPoly& f6() const { return f6_; }

    std::string canonical_string() const {
        std::string s = kind_name(kind_) + "\n";
        switch (kind_) {
            case SurfaceKind::Quartic3: s += quartic_.canonical_string(); break;
            case SurfaceKind::SpecialQuartic:
                s += c_.get_str() + "\n" + f2_.canonical_string() + "\n" + f4_.canonical_string();
                break;
            case SurfaceKind::DoubleSextic: s += f6_.canonical_string(); break;
        }
        return s;
    }
    std::uint64_t canonical_hash() const { return MultiPoly::fnv1a64(canonical_string()); }

private:
    explicit Surface(SurfaceKind k) : kind_(k) {}

    SurfaceKind kind_;
    MultiPoly quartic_;
    Integer c_ = 0;
    MultiPoly f2_, f4_, f6_;
};

struct CountOptions {
    unsigned jobs = 0;  // 0: hardware concurrency
    std::uint64_t budget = 1'000'000'000;  // max projective points enumerated per call
};

namespace detail {

using Log = FieldTables::Log;

// A form in the first n variables compiled to log coefficients.
struct CompiledForm {
    struct Term {
        Log coef;
        std::vector<unsigned> exps;
    };
    std::vector<Term> terms;

    Log eval(const Log* xs, const FieldTables& t) const {
        Log acc = t.zero();
        for (const auto& term : terms) {
            Log v = term.coef;
            for (std::size_t i = 0; i < term.exps.size() && v != t.zero(); ++i) {
                if (term.exps[i] == 0) continue;
                v = t.mul(v, t.pow(xs[i], term.exps[i]));
            }
            acc = t.add(acc, v);
        }
        return acc;
    }
};

// Splits F(X0..Xn) = sum_j g_j(X0..X_{n-1}) Xn^j and compiles each g_j.
inline std::vector<CompiledForm> split_last(const MultiPoly& f, const FieldTables& t) {
    std::size_t n = f.nvars() - 1;
    unsigned d = f.total_degree();
    std::vector<CompiledForm> g(d + 1);
    for (const auto& [e, c] : f.terms()) {
        Log lc = t.from_int(c);
        if (lc == t.zero()) continue;
        g[e[n]].terms.push_back({lc, std::vector<unsigned>(e.begin(), e.begin() + static_cast<long>(n))});
    }
    return g;
}

inline std::uint64_t checked_pow(std::uint64_t q, unsigned e) {
    std::uint64_t r = 1;
    for (unsigned i = 0; i < e; ++i) {
        if (r > UINT64_MAX / q) throw ResourceError("enumeration size overflows");
        r *= q;
    }
    return r;
}

// Number of points of P^m over F_q.
inline std::uint64_t projective_size(std::uint64_t q, unsigned m) {
    std::uint64_t s = 0;
    for (unsigned i = 0; i <= m; ++i) s += checked_pow(q, i);
    return s;
}

// Decodes index -> point of P^m with first nonzero coordinate 1, in the
// order (1,*,..,*), (0,1,*,..), ..., (0,..,0,1). Coordinates as logs.
inline void decode_point(std::uint64_t idx, unsigned m, std::uint64_t q, const FieldTables& t, Log* out) {
    for (unsigned lead = 0; lead <= m; ++lead) {
        std::uint64_t block = checked_pow(q, m - lead);
        if (idx < block) {
            for (unsigned i = 0; i < lead; ++i) out[i] = t.zero();
            out[lead] = t.one();
            for (unsigned i = m; i > lead; --i) {
                out[i] = t.log_of_index(idx % q);
                idx /= q;
            }
            return;
        }
        idx -= block;
    }
    throw InternalError("decode_point: index out of range");
}

enum class Mode { Zeros, DoubleCover };

// Sum over P^n of [F(P) = 0] (Zeros) or 1 + chi(F(P)) (DoubleCover).
inline std::uint64_t projective_sum(const MultiPoly& f, const FieldTables& t, Mode mode, const CountOptions& opt) {
    const unsigned n = static_cast<unsigned>(f.nvars() - 1);
    if (n == 0) throw InputError("projective_sum: need at least two variables");
    const std::uint64_t q = t.size();
    const std::uint64_t total = projective_size(q, n);
    if (total > opt.budget) {
        throw ResourceError("enumeration budget exceeded: " + std::to_string(total) + " points over F_" +
                            std::to_string(q) + " > budget " + std::to_string(opt.budget));
    }
    const auto g = split_last(f, t);
    const unsigned d = static_cast<unsigned>(g.size() - 1);
    const std::uint64_t prefixes = projective_size(q, n - 1);

    auto inner = [&](const Log* prefix) -> std::int64_t {
        std::vector<Log> coef(d + 1);
        for (unsigned j = 0; j <= d; ++j) coef[j] = g[j].eval(prefix, t);
        std::int64_t acc = 0;
        auto account = [&](Log v) {
            if (mode == Mode::Zeros) acc += (v == t.zero());
            else acc += 1 + t.chi(v);
        };
        account(coef[0]);
        for (Log lx = 0; lx + 1 < q; ++lx) {
            Log v = coef[d];
            for (unsigned j = d; j-- > 0;) v = t.add(t.mul(v, lx), coef[j]);
            account(v);
        }
        return acc;
    };

    unsigned jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
    std::uint64_t nchunks = std::min<std::uint64_t>(prefixes, std::uint64_t{jobs} * 8);
    std::vector<std::int64_t> partial(nchunks, 0);
    auto run_chunk = [&](std::uint64_t c) {
        std::uint64_t lo = prefixes * c / nchunks, hi = prefixes * (c + 1) / nchunks;
        std::vector<Log> pt(n);
        std::int64_t s = 0;
        for (std::uint64_t i = lo; i < hi; ++i) {
            decode_point(i, n - 1, q, t, pt.data());
            s += inner(pt.data());
        }
        partial[c] = s;
    };
    if (jobs <= 1 || nchunks <= 1) {
        for (std::uint64_t c = 0; c < nchunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::uint64_t> next{0};
        for (unsigned w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (std::uint64_t c; (c = next.fetch_add(1)) < nchunks;) run_chunk(c);
            });
        }
        for (auto& th : pool) th.join();
    }
    std::int64_t sum = 0;
    for (auto s : partial) sum += s;
    // the point (0:...:0:1)
    std::vector<Log> origin(n, t.zero());
    Log top = g[d].eval(origin.data(), t);
    sum += mode == Mode::Zeros ? (top == t.zero()) : 1 + t.chi(top);
    return static_cast<std::uint64_t>(sum);
}

inline void check_prime(std::uint64_t p) {
    if (p == 2) throw MathError("characteristic 2 unsupported");
    if (p < 2 || !is_probable_prime(p)) throw InputError(std::to_string(p) + " is not a prime");
}

// Refuse before building field tables when P^n(F_{p^k}) is over budget.
inline void check_budget(std::uint64_t p, unsigned k, unsigned n, const CountOptions& opt) {
    long double q = 1, total = 0, qi = 1;
    for (unsigned i = 0; i < k; ++i) q *= static_cast<long double>(p);
    for (unsigned i = 0; i <= n; ++i, qi *= q) total += qi;
    if (total > static_cast<long double>(opt.budget)) {
        throw ResourceError("enumeration budget exceeded: P^" + std::to_string(n) + " over F_" + std::to_string(p) +
                            "^" + std::to_string(k) + " has more than " + std::to_string(opt.budget) + " points");
    }
}

}  // namespace detail

/// Projective zeros of a form in n+1 variables over F_{p^k}.
inline Integer count_hypersurface(const MultiPoly& f, std::uint64_t p, unsigned k, const CountOptions& opt = {}) {
    detail::check_prime(p);
    if (!f.is_homogeneous()) throw InputError("count_hypersurface: form is not homogeneous");
    detail::check_budget(p, k, static_cast<unsigned>(f.nvars() - 1), opt);
    FieldTables t(make_field(p, k));
    return Integer(static_cast<unsigned long>(detail::projective_sum(f, t, detail::Mode::Zeros, opt)));
}

/// Points of w^2 = f(X0..Xn), f of even degree: sum over P^n of 1 + chi(f(P)).
inline Integer count_double_cover(const MultiPoly& f, std::uint64_t p, unsigned k, const CountOptions& opt = {}) {
    detail::check_prime(p);
    auto d = f.homogeneous_degree();
    if (!d || *d % 2 != 0) throw InputError("count_double_cover: branch form must be homogeneous of even degree");
    detail::check_budget(p, k, static_cast<unsigned>(f.nvars() - 1), opt);
    FieldTables t(make_field(p, k));
    return Integer(static_cast<unsigned long>(detail::projective_sum(f, t, detail::Mode::DoubleCover, opt)));
}

inline Integer count_points(const Surface& s, std::uint64_t p, unsigned k, const CountOptions& opt = {}) {
    if (s.kind() == SurfaceKind::DoubleSextic) return count_double_cover(s.f6(), p, k, opt);
    return count_hypersurface(s.quartic(), p, k, opt);
}

// ---------------------------------------------------------------------------
// Cache

/// Append-only record file <dir>/counts.txt with lines "hash_hex p k N".
class CountCache {
public:
    struct Stats {
        std::string path;
        std::size_t records = 0;
        std::uintmax_t bytes = 0;
    };

    explicit CountCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& directory() const { return dir_; }
    std::filesystem::path file() const { return dir_ / "counts.txt"; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    std::optional<Integer> lookup(std::uint64_t hash, std::uint64_t p, unsigned k) {
        load();
        auto it = records_.find({hash, p, k});
        if (it == records_.end()) return std::nullopt;
        return it->second;
    }

    void store(std::uint64_t hash, std::uint64_t p, unsigned k, const Integer& n) {
        std::filesystem::create_directories(dir_);
        Lock lock(file(), LOCK_EX);
        repair(lock.fd());
        std::ostringstream line;
        line << std::hex << hash << std::dec << ' ' << p << ' ' << k << ' ' << n.get_str() << '\n';
        std::string s = line.str();
        ::lseek(lock.fd(), 0, SEEK_END);
        if (::write(lock.fd(), s.data(), s.size()) != static_cast<ssize_t>(s.size())) {
            throw ResourceError("cache: write failed on " + file().string());
        }
        records_.emplace(Key{hash, p, k}, n);
    }

    Stats stats() {
        loaded_ = false;
        load();
        Stats st;
        st.path = file().string();
        st.records = records_.size();
        std::error_code ec;
        auto sz = std::filesystem::file_size(file(), ec);
        st.bytes = ec ? 0 : sz;
        return st;
    }

    void clear() {
        std::error_code ec;
        if (std::filesystem::exists(file(), ec)) {
            Lock lock(file(), LOCK_EX);
            if (::ftruncate(lock.fd(), 0) != 0) throw ResourceError("cache: cannot truncate " + file().string());
        }
        records_.clear();
        loaded_ = true;
    }

private:
    struct Key {
        std::uint64_t hash, p;
        unsigned k;
        bool operator<(const Key& o) const { return std::tie(hash, p, k) < std::tie(o.hash, o.p, o.k); }
    };

    class Lock {
    public:
        Lock(const std::filesystem::path& path, int mode) {
            fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
            if (fd_ < 0) throw ResourceError("cache: cannot open " + path.string());
            if (::flock(fd_, mode) != 0) {
                ::close(fd_);
                throw ResourceError("cache: cannot lock " + path.string());
            }
        }
        ~Lock() {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
        Lock(const Lock&) = delete;
        Lock& operator=(const Lock&) = delete;
        int fd() const { return fd_; }

    private:
        int fd_;
    };

    static std::string read_all(int fd) {
        std::string data;
        ::lseek(fd, 0, SEEK_SET);
        char buf[1 << 16];
        for (ssize_t r; (r = ::read(fd, buf, sizeof buf)) > 0;) data.append(buf, static_cast<std::size_t>(r));
        return data;
    }

    // Parses records; returns the byte length of the valid prefix.
    std::size_t parse(const std::string& data, std::map<Key, Integer>& out) const {
        std::size_t pos = 0;
        while (pos < data.size()) {
            std::size_t nl = data.find('\n', pos);
            if (nl == std::string::npos) break;
            std::istringstream in(data.substr(pos, nl - pos));
            std::string hex, nstr, extra;
            std::uint64_t p;
            unsigned k;
            if (!(in >> hex >> p >> k >> nstr) || (in >> extra) || hex.empty() || hex.size() > 16 ||
                hex.find_first_not_of("0123456789abcdef") != std::string::npos ||
                nstr.find_first_not_of("0123456789") != std::string::npos) {
                break;
            }
            out.emplace(Key{std::stoull(hex, nullptr, 16), p, k}, Integer(nstr));
            pos = nl + 1;
        }
        return pos;
    }

    void repair(int fd) {
        std::string data = read_all(fd);
        std::map<Key, Integer> recs;
        std::size_t good = parse(data, recs);
        if (good < data.size()) {
            warnings_.push_back("cache: discarded corrupt trailing data (" + std::to_string(data.size() - good) +
                                " bytes) in " + file().string());
            if (::ftruncate(fd, static_cast<off_t>(good)) != 0) throw ResourceError("cache: cannot truncate");
        }
        records_ = std::move(recs);
        loaded_ = true;
    }

    void load() {
        if (loaded_) return;
        std::error_code ec;
        if (!std::filesystem::exists(file(), ec)) {
            loaded_ = true;
            return;
        }
        std::string data;
        {
            Lock lock(file(), LOCK_SH);
            data = read_all(lock.fd());
        }
        std::map<Key, Integer> recs;
        if (parse(data, recs) < data.size()) {
            Lock lock(file(), LOCK_EX);
            repair(lock.fd());
            return;
        }
        records_ = std::move(recs);
        loaded_ = true;
    }

    std::filesystem::path dir_;
    std::map<Key, Integer> records_;
    bool loaded_ = false;
    std::vector<std::string> warnings_;
};

/// Cache directory: explicit flag, then $K3CHAR_CACHE_DIR, then the XDG data dir.
inline std::filesystem::path resolve_cache_dir(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return *flag;
    if (const char* env = std::getenv("K3CHAR_CACHE_DIR"); env && *env) return env;
    if (const char* xdg = std::getenv("XDG_DATA_HOME"); xdg && *xdg) return std::filesystem::path(xdg) / "k3char";
    if (const char* home = std::getenv("HOME"); home && *home) {
        return std::filesystem::path(home) / ".local" / "share" / "k3char";
    }
    return std::filesystem::path(".k3char-cache");
}

// ---------------------------------------------------------------------------
// Traces

/// Per-prime record. Traces are taken on H^2(1), t_k = (N_k - 1 - q^2)/q with
/// q = p^k; they are rational in general (the transcendental pair contributes
/// non-integral values), so they are kept exact.
struct FrobeniusData {
    std::uint64_t p = 0;
    std::map<unsigned, Integer> counts;
    std::map<unsigned, Rational> traces;
    std::map<unsigned, bool> from_cache;
    std::optional<int> det_h2;
};

inline Rational trace_from_count(const Integer& n, std::uint64_t p, unsigned k) {
    Integer q = integer_pow(Integer(static_cast<unsigned long>(p)), k);
    Rational t(n - 1 - q * q, q);
    t.canonicalize();
    return t;
}

inline FrobeniusData traces(const Surface& s, std::uint64_t p, unsigned kmax, const CountOptions& opt = {},
                            CountCache* cache = nullptr) {
    if (kmax == 0) throw InputError("traces: kmax must be >= 1");
    detail::check_prime(p);
    FrobeniusData fd;
    fd.p = p;
    const std::uint64_t h = s.canonical_hash();
    for (unsigned k = 1; k <= kmax; ++k) {
        std::optional<Integer> n;
        if (cache) n = cache->lookup(h, p, k);
        fd.from_cache[k] = n.has_value();
        if (!n) {
            n = count_points(s, p, k, opt);
            if (cache) cache->store(h, p, k, *n);
        }
        Rational t = trace_from_count(*n, p, k);
        if (abs(t) > 22) {
            throw MathError("trace " + t.get_str() + " at p=" + std::to_string(p) + ", k=" + std::to_string(k) +
                            " violates the Weil bound; is the reduction bad?");
        }
        fd.counts[k] = *n;
        fd.traces[k] = t;
    }
    return fd;
}

}  // namespace k3char

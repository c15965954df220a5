#pragma once

// Command-line front end: surface files, JSON reports, cache administration.
// Exit codes: 0 ok, 1 usage or input error, 2 resource limit, 3 math refusal,
// 4 internal error.

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "k3char/count.hpp"
#include "k3char/disc.hpp"
#include "k3char/jumpchar.hpp"
#include "k3char/zeta.hpp"

namespace k3char {

// ---------------------------------------------------------------------------
// Surface files

inline Surface surface_from_json(const json& j) {
    if (!j.is_object()) throw InputError("surface file: expected a JSON object");
    for (const char* key : {"kind", "vars", "forms"}) {
        if (!j.contains(key)) throw InputError(std::string("surface file: missing \"") + key + "\"");
    }
    const std::string kind = j.at("kind").get<std::string>();
    const auto vars = j.at("vars").get<std::size_t>();
    const json& forms = j.at("forms");
    if (!forms.is_object()) throw InputError("surface file: \"forms\" must be an object");
    auto form = [&](const char* name, std::size_t nv) {
        if (!forms.contains(name)) throw InputError(std::string("surface file: missing form \"") + name + "\"");
        return parse(forms.at(name).get<std::string>(), nv);
    };
    auto expect_vars = [&](std::size_t n) {
        if (vars != n) throw InputError("surface file: kind " + kind + " needs vars = " + std::to_string(n));
    };
    if (kind == "quartic3") {
        expect_vars(4);
        return Surface::quartic3(form("f", 4));
    }
    if (kind == "special_quartic") {
        expect_vars(3);
        if (!j.contains("c")) throw InputError("surface file: special_quartic needs \"c\"");
        MultiPoly f2 = forms.contains("f2") ? form("f2", 3) : MultiPoly(3);
        return Surface::special_quartic(integer_from_json(j.at("c")), f2, form("f4", 3));
    }
    if (kind == "double_sextic") {
        expect_vars(3);
        return Surface::double_sextic(form("f6", 3));
    }
    throw InputError("surface file: unknown kind \"" + kind + "\"");
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": invalid JSON: " + e.what());
    }
}

inline Surface load_surface(const std::string& path) {
    try {
        return surface_from_json(read_json_file(path));
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline std::string hash_hex(std::uint64_t h) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

inline json surface_echo(const Surface& s) {
    json j;
    j["kind"] = kind_name(s.kind());
    switch (s.kind()) {
        case SurfaceKind::Quartic3: j["forms"] = {{"f", s.quartic().to_string()}}; break;
        case SurfaceKind::SpecialQuartic:
            j["c"] = integer_json(s.c());
            j["forms"] = {{"f2", s.f2().to_string()}, {"f4", s.f4().to_string()}};
            break;
        case SurfaceKind::DoubleSextic: j["forms"] = {{"f6", s.f6().to_string()}}; break;
    }
    j["hash"] = hash_hex(s.canonical_hash());
    return j;
}

inline std::string rational_str(const Rational& r) { return r.get_str(); }

// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::uint64_t> parse_prime_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        if (item.find_first_not_of("0123456789") != std::string::npos) throw InputError("not a prime: \"" + item + "\"");
        out.push_back(std::stoull(item));
        if (!is_probable_prime(out.back())) throw InputError(item + " is not prime");
    }
    return out;
}

struct CliState {
    std::optional<std::string> cache_dir;
    bool no_cache = false;
    bool no_timing = false;
    unsigned jobs = 0;
    std::uint64_t budget = 1'000'000'000;

    CountOptions count_options() const { return {jobs, budget}; }

    CountCache* cache() {
        if (no_cache) return nullptr;
        if (!cache_) cache_.emplace(resolve_cache_dir(cache_dir));
        return &*cache_;
    }

    void flush_warnings(std::ostream& err) {
        if (!cache_) return;
        for (const auto& w : cache_->warnings()) err << "warning: " << w << "\n";
    }

private:
    std::optional<CountCache> cache_;
};

inline std::vector<Integer> resolve_bad_primes(const std::string& spec, const Surface& s) {
    if (spec == "auto") {
        if (auto f = closed_form_family(s)) return builtin_bad_primes(*f);
        return bad_primes(s);
    }
    std::vector<Integer> out;
    for (auto p : parse_prime_list(spec)) out.emplace_back(static_cast<unsigned long>(p));
    if (std::find(out.begin(), out.end(), Integer(2)) == out.end()) out.insert(out.begin(), Integer(2));
    return out;
}

inline std::vector<json> primes_json(const std::vector<Integer>& ps) {
    std::vector<json> out;
    for (const auto& p : ps) out.push_back(integer_json(p));
    return out;
}

}  // namespace detail

/// Runs the CLI; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Frobenius determinants, discriminants and jump characters of K3 surfaces over Q", "k3char"};
    app.require_subcommand(1);
    app.fallthrough();
    detail::CliState st;
    app.add_option("--cache-dir", st.cache_dir, "count cache directory (overrides K3CHAR_CACHE_DIR)");
    app.add_flag("--no-cache", st.no_cache, "do not read or write the count cache");
    app.add_flag("--no-timing", st.no_timing, "omit timing fields from reports");
    app.add_option("--jobs", st.jobs, "worker threads for point counting (0 = hardware)");
    app.add_option("--budget", st.budget, "maximum projective points per count");

    std::string surface_path;
    std::uint64_t p = 0;
    unsigned k = 1, kmax = 2;
    std::string bad_spec = "auto", oracle_name = "counts", pic_path, nonjump_spec;
    std::optional<long> pic_class, delta_h2_opt;
    std::optional<std::uint64_t> seed, single_node;
    std::size_t extra_rows = 0;
    bool assume_rank8 = false;
    std::uint64_t B = 10000;

    auto* count = app.add_subcommand("count", "count points over F_{p^k} and print N_k, t_k");
    count->add_option("surface", surface_path, "surface JSON file")->required();
    count->add_option("--p", p, "odd prime")->required();
    count->add_option("--k", k, "extension degree");

    auto* zeta = app.add_subcommand("zeta", "traces t_1..t_kmax and the determinant of Frobenius");
    zeta->add_option("surface", surface_path)->required();
    zeta->add_option("--p", p)->required();
    zeta->add_option("--kmax", kmax, "largest extension degree");
    zeta->add_option("--pic", pic_path, "Galois decomposition JSON file");

    auto* dh2 = app.add_subcommand("delta-h2", "Delta_{H^2} by the GF(2) symbol algorithm");
    dh2->add_option("surface", surface_path)->required();
    dh2->add_option("--bad-primes", bad_spec, "auto or a comma-separated list");
    dh2->add_option("--oracle", oracle_name, "counts or spectra")->check(CLI::IsMember({"counts", "spectra"}));
    dh2->add_option("--pic", pic_path, "Galois decomposition JSON file (counts oracle)");
    dh2->add_option("--extra-rows", extra_rows, "additional primes queried after full rank");
    dh2->add_option("--seed", seed, "use a shuffled prime source with this seed");

    auto* jump = app.add_subcommand("jump-char", "the jump character");
    jump->add_option("surface", surface_path)->required();
    jump->add_option("--nonjump-primes", nonjump_spec, "comma-separated primes with no rank jump");
    jump->add_option("--pic", pic_path, "Galois decomposition JSON file");
    jump->add_option("--pic-class", pic_class, "Delta_Pic as a squarefree integer");
    jump->add_option("--delta-h2", delta_h2_opt, "Delta_{H^2} if already known");
    jump->add_flag("--assume-rank-8", assume_rank8, "special quartic of geometric Picard rank 8");
    jump->add_option("--bad-primes", bad_spec, "auto or a comma-separated list");
    jump->add_option("--single-node", single_node, "prime with exactly one ordinary double point");
    jump->add_option("--oracle", oracle_name, "counts or spectra")->check(CLI::IsMember({"counts", "spectra"}));

    auto* discc = app.add_subcommand("disc", "normalized discriminant, square class, prime support");
    discc->add_option("surface", surface_path)->required();

    auto* cens = app.add_subcommand("census", "jump primes up to B and gamma(S, B)");
    cens->add_option("surface", surface_path)->required();
    cens->add_option("--B", B, "bound");

    auto* cache = app.add_subcommand("cache", "count cache administration");
    cache->require_subcommand(1);
    auto* cstats = cache->add_subcommand("stats", "record count and size");
    auto* cclear = cache->add_subcommand("clear", "remove all records");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&](json report) {
        if (!st.no_timing) {
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            report["timing"] = {{"seconds", std::round(secs * 1000) / 1000}};
        }
        out << report.dump(2) << "\n";
        st.flush_warnings(err);
        return 0;
    };

    try {
        json rep;
        rep["schema"] = 1;
        if (*count) {
            Surface s = load_surface(surface_path);
            rep["command"] = "count";
            rep["surface"] = surface_echo(s);
            rep["p"] = p;
            rep["k"] = k;
            detail::check_prime(p);
            CountCache* c = st.cache();
            std::optional<Integer> n;
            if (c) n = c->lookup(s.canonical_hash(), p, k);
            rep["cache"] = c ? (n ? "hit" : "miss") : "off";
            if (!n) {
                n = count_points(s, p, k, st.count_options());
                if (c) c->store(s.canonical_hash(), p, k, *n);
            }
            Rational t = trace_from_count(*n, p, k);
            if (abs(t) > 22) throw MathError("trace " + t.get_str() + " violates the Weil bound; bad reduction?");
            rep["N"] = integer_json(*n);
            rep["t"] = rational_str(t);
            return finish(rep);
        }
        if (*zeta) {
            Surface s = load_surface(surface_path);
            rep["command"] = "zeta";
            rep["surface"] = surface_echo(s);
            rep["p"] = p;
            auto fd = traces(s, p, kmax, st.count_options(), st.cache());
            json tr = json::array();
            for (const auto& [kk, t] : fd.traces) {
                tr.push_back({{"k", kk}, {"N", integer_json(fd.counts.at(kk))}, {"t", rational_str(t)}, {"cache", fd.from_cache.at(kk) ? "hit" : "miss"}});
            }
            rep["traces"] = tr;
            std::optional<GaloisDecomposition> D;
            if (!pic_path.empty()) D = GaloisDecomposition::from_json(read_json_file(pic_path));
            else if (auto f = closed_form_family(s)) D = builtin_decomposition(*f);
            if (D && D->dimension() == 20 && kmax >= 2) {
                std::map<unsigned, Rational> total{{1, fd.traces.at(1)}, {2, fd.traces.at(2)}};
                std::map<unsigned, Integer> alg{{1, pic_trace_at(*D, p, 1)}, {2, pic_trace_at(*D, p, 2)}};
                auto split = SpectrumSplit::from_traces(total, alg, 20);
                int dT = *split.det_transcendental(p);
                int dP = det_pic_at(*D, p);
                rep["transcendental_traces"] = {rational_str(split.transcendental_traces.at(1)), rational_str(split.transcendental_traces.at(2))};
                rep["det_pic"] = dP;
                rep["det_transcendental"] = dT;
                rep["det_h2"] = dP * dT;
                rep["method"] = "rank-20 split";
            }
            if (kmax >= 11) {
                std::vector<Rational> ts;
                for (unsigned kk = 1; kk <= kmax; ++kk) ts.push_back(fd.traces.at(kk));
                auto ss = determine_sign(ts, 22, p);
                rep["feasible_signs"] = ss.feasible;
                if (ss.charpoly) rep["charpoly"] = ss.charpoly->to_string();
                if (ss.det) {
                    if (rep.contains("det_h2") && rep["det_h2"] != *ss.det) throw MathError("determinant from the split and from the full charpoly disagree");
                    rep["det_h2"] = *ss.det;
                    rep["method"] = "functional equation";
                }
            }
            if (!rep.contains("det_h2")) rep["note"] = "determinant needs a rank-20 decomposition (--pic) or kmax >= 11";
            return finish(rep);
        }
        if (*dh2) {
            Surface s = load_surface(surface_path);
            rep["command"] = "delta-h2";
            rep["surface"] = surface_echo(s);
            auto bad = detail::resolve_bad_primes(bad_spec, s);
            rep["bad_primes"] = detail::primes_json(bad);
            rep["oracle"] = oracle_name;
            auto source = seed ? PrimeSource::shuffled(bad, *seed) : PrimeSource::ascending(bad);
            DeltaResult res;
            std::vector<Evidence> log;
            if (oracle_name == "spectra") {
                SpectraOracle orc(s, st.count_options(), st.cache());
                res = alg_delta(bad, std::ref(orc), source, extra_rows);
                log = orc.log();
            } else {
                std::optional<GaloisDecomposition> D;
                if (!pic_path.empty()) D = GaloisDecomposition::from_json(read_json_file(pic_path));
                else if (auto f = closed_form_family(s)) D = builtin_decomposition(*f);
                else throw InputError("the counts oracle needs a Galois decomposition (--pic)");
                CountOracle orc(s, *D, st.count_options(), st.cache());
                res = alg_delta(bad, std::ref(orc), source, extra_rows);
                log = orc.log();
            }
            CharacterReport r;
            r.delta_h2 = res.delta;
            r.evidence = log;
            r.status = ReportStatus::Proved;
            json body = r.to_json();
            for (const char* key : {"delta_h2", "status", "evidence"}) rep[key] = body[key];
            return finish(rep);
        }
        if (*jump) {
            Surface s = load_surface(surface_path);
            rep["command"] = "jump-char";
            rep["surface"] = surface_echo(s);
            CharacterReport r;
            if (assume_rank8) {
                r = rank8_special_quartic_report(s);
            } else if (!nonjump_spec.empty()) {
                auto bad = detail::resolve_bad_primes(bad_spec, s);
                rep["bad_primes"] = detail::primes_json(bad);
                auto res = alg_jump(bad, detail::parse_prime_list(nonjump_spec));
                r.candidates = res.candidates;
                r.kernel_dim = res.kernel_dim;
                if (single_node) {
                    r.candidates = filter_single_node(r.candidates, Integer(static_cast<unsigned long>(*single_node)));
                    r.notes.push_back("filtered by a single node at " + std::to_string(*single_node));
                }
                if (r.candidates.size() == 1) {
                    r.jump = r.candidates.front();
                    r.status = ReportStatus::Proved;
                } else {
                    r.status = ReportStatus::CandidateSet;
                }
            } else {
                std::optional<GaloisDecomposition> D;
                if (!pic_path.empty()) D = GaloisDecomposition::from_json(read_json_file(pic_path));
                if (pic_class) r.delta_pic = SquareClass::of(*pic_class);
                else if (D) r.delta_pic = D->det_class();
                else throw InputError("jump-char needs --assume-rank-8, --nonjump-primes, --pic or --pic-class");
                if (delta_h2_opt) {
                    r.delta_h2 = SquareClass::of(*delta_h2_opt);
                    r.notes.push_back("Delta_{H^2} supplied by the caller");
                } else {
                    auto bad = detail::resolve_bad_primes(bad_spec, s);
                    rep["bad_primes"] = detail::primes_json(bad);
                    DeltaResult res;
                    if (oracle_name == "spectra" || (!D && closed_form_family(s))) {
                        SpectraOracle orc(s, st.count_options(), st.cache());
                        res = alg_delta(bad, std::ref(orc), PrimeSource::ascending(bad));
                        r.evidence = orc.log();
                    } else {
                        if (!D) {
                            if (auto f = closed_form_family(s)) D = builtin_decomposition(*f);
                            else throw InputError("the counts oracle needs a Galois decomposition (--pic)");
                        }
                        CountOracle orc(s, *D, st.count_options(), st.cache());
                        res = alg_delta(bad, std::ref(orc), PrimeSource::ascending(bad));
                        r.evidence = orc.log();
                    }
                    r.delta_h2 = res.delta;
                }
                r.fill_jump();
                r.status = ReportStatus::Proved;
                if (r.jump) {
                    auto pred = predict_jump_primes(*r.jump, 100);
                    rep["predicted_jump_primes_le_100"] = pred;
                }
            }
            json body = r.to_json();
            for (auto it = body.begin(); it != body.end(); ++it) {
                if (it.key() != "schema") rep[it.key()] = it.value();
            }
            return finish(rep);
        }
        if (*discc) {
            Surface s = load_surface(surface_path);
            rep["command"] = "disc";
            rep["surface"] = surface_echo(s);
            auto nd = normalized_discriminant(s);
            rep["discriminant"] = nd.value.get_str();
            if (nd.value == 0) throw MathError("discriminant vanishes: the surface is singular");
            rep["square_class"] = class_json(SquareClass::of(nd.value));
            rep["prime_support"] = detail::primes_json(bad_primes(s));
            return finish(rep);
        }
        if (*cens) {
            Surface s = load_surface(surface_path);
            rep["command"] = "census";
            rep["surface"] = surface_echo(s);
            rep["B"] = B;
            auto c = census(s, B);
            json rows = json::array();
            for (const auto& r : c.rows) rows.push_back({r.p, r.jump});
            rep["primes_up_to_B"] = c.primes_up_to_B;
            rep["jump_primes"] = c.jumps;
            rep["gamma"] = rational_str(c.gamma());
            std::ostringstream g;
            g << std::fixed << std::setprecision(4) << c.gamma().get_d();
            rep["gamma_decimal"] = g.str();
            rep["table"] = rows;
            return finish(rep);
        }
        if (*cache) {
            CountCache c(resolve_cache_dir(st.cache_dir));
            rep["command"] = std::string("cache ") + (*cstats ? "stats" : "clear");
            if (*cclear) c.clear();
            auto sst = c.stats();
            rep["path"] = sst.path;
            rep["records"] = sst.records;
            rep["bytes"] = sst.bytes;
            for (const auto& w : c.warnings()) err << "warning: " << w << "\n";
            return finish(rep);
        }
        return 1;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const MathError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << "\n";
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace k3char

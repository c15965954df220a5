#include <gtest/gtest.h>

#include "k3char/jumpchar.hpp"

using namespace k3char;

namespace {

const Surface kDiag = Surface::quartic3(parse("X0^4+X1^4+X2^4+X3^4", 4));
const Surface kSextic = Surface::double_sextic(parse("X0^6+X1^6+X2^6", 3));

std::vector<Integer> ints(std::initializer_list<long> v) { return {v.begin(), v.end()}; }

std::vector<long> values(const std::vector<SquareClass>& cs) {
    std::vector<long> out;
    for (const auto& c : cs) out.push_back(c.value().get_si());
    return out;
}

// all square classes supported on the given primes and -1
std::vector<SquareClass> classes_on(const std::vector<Integer>& basis) {
    std::vector<SquareClass> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << basis.size()); ++mask) {
        Integer v = 1;
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if (mask >> i & 1) v *= basis[i];
        }
        out.push_back(SquareClass::of(v));
    }
    return out;
}

// 2 is a cube in F_{p^k}, straight from the field arithmetic
bool two_is_cube(std::uint64_t p, unsigned k) {
    auto F = make_field(p, k);
    Integer q = integer_pow(Integer(static_cast<unsigned long>(p)), k);
    if ((q - 1) % 3 != 0) return true;
    return F.pow(F.from_int(2), Integer((q - 1) / 3)) == F.one();
}

}  // namespace

TEST(Decomposition, ClosedFamilies) {
    auto d4 = builtin_decomposition(ClosedForm::DiagonalQuartic);
    auto d2 = builtin_decomposition(ClosedForm::FermatSextic);
    EXPECT_EQ(d4.dimension(), 20u);
    EXPECT_EQ(d2.dimension(), 20u);
    EXPECT_EQ(d4.det_class(), SquareClass::of(-1));
    EXPECT_EQ(d2.det_class(), SquareClass::of(3));
    GaloisDecomposition triv;
    triv.quadratic = {{SquareClass::of(1), 8}};
    for (auto p : odd_primes_up_to(200)) {
        EXPECT_EQ(det_pic_at(triv, p), 1);
        EXPECT_EQ(pic_trace_at(triv, p, 1), 8);
        if (p > 3) {
            EXPECT_EQ(det_pic_at(d4, p), symbol_at(d4.det_class(), p));
            EXPECT_EQ(det_pic_at(d2, p), symbol_at(d2.det_class(), p));
        }
    }
    EXPECT_THROW(det_pic_at(d2, 3), MathError);
    EXPECT_THROW(det_pic_at(d4, 2), InputError);
}

TEST(Decomposition, S3TraceMatchesCubeTest) {
    auto d2 = builtin_decomposition(ClosedForm::FermatSextic);
    for (std::uint64_t p : {5u, 7u, 11u, 13u, 19u, 31u}) {
        for (unsigned k = 1; k <= 3; ++k) {
            Integer q = integer_pow(Integer(static_cast<unsigned long>(p)), k);
            int s3 = mod_floor(q, 3) == 2 ? 0 : (two_is_cube(p, k) ? 2 : -1);
            Integer quad = 0;
            for (long d : {-1L, 3L, -3L}) {
                int chi = jacobi_symbol(Integer(d), Integer(static_cast<unsigned long>(p)));
                quad += (k % 2 ? chi : 1) * (d == -1 ? 4 : 3);
            }
            EXPECT_EQ(pic_trace_at(d2, p, k), 4 + quad + 3 * s3) << p << "^" << k;
        }
    }
}

TEST(Decomposition, Validation) {
    GaloisDecomposition big;
    big.quadratic = {{SquareClass::of(1), 21}};
    EXPECT_THROW(big.validate(), InputError);
    GaloisDecomposition bad_m;
    bad_m.s3 = {{Integer(16), 1}};
    EXPECT_THROW(bad_m.validate(), InputError);
    auto d2 = builtin_decomposition(ClosedForm::FermatSextic);
    auto back = GaloisDecomposition::from_json(d2.to_json());
    EXPECT_EQ(back.to_json(), d2.to_json());
    EXPECT_EQ(back.det_class(), SquareClass::of(3));
}

TEST(AlgDelta, SimpleOracles) {
    auto one = alg_delta(ints({2}), [](std::uint64_t) { return 1; }, PrimeSource::ascending(ints({2})));
    EXPECT_EQ(one.delta, SquareClass::of(1));
    auto neg = alg_delta(ints({2, 3}), [](std::uint64_t p) { return p % 4 == 1 ? 1 : -1; }, PrimeSource::ascending(ints({2, 3})));
    EXPECT_EQ(neg.delta, SquareClass::of(-1));
    EXPECT_EQ(neg.evidence.front().p, 5u);
}

// exhaustive over bad sets within {2,3,5,7} and classes supported on -1 and the bad set
TEST(AlgDelta, SyntheticOracleRecovery) {
    std::vector<Integer> pool{2, 3, 5, 7};
    std::size_t checked = 0;
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::vector<Integer> bad;
        for (unsigned i = 0; i < 4; ++i) {
            if (mask >> i & 1) bad.push_back(pool[i]);
        }
        std::vector<Integer> basis{-1};
        basis.insert(basis.end(), bad.begin(), bad.end());
        for (const auto& hidden : classes_on(basis)) {
            DetOracle oracle = [&](std::uint64_t p) { return symbol_at(hidden, p); };
            EXPECT_EQ(alg_delta(bad, oracle, PrimeSource::ascending(bad)).delta, hidden);
            for (std::uint64_t seed : {1u, 2u, 99u}) {
                EXPECT_EQ(alg_delta(bad, oracle, PrimeSource::shuffled(bad, seed), 4).delta, hidden);
            }
            ++checked;
        }
    }
    EXPECT_EQ(checked, 162u);
}

TEST(AlgDelta, InconsistentOracle) {
    DetOracle liar = [](std::uint64_t p) { return p == 11 ? -1 : 1; };
    EXPECT_THROW(alg_delta(ints({2}), liar, PrimeSource::ascending(ints({2})), 10), MathError);
    EXPECT_THROW(alg_delta(ints({2, 3}), liar, PrimeSource::from_list({5, 7})), ResourceError);
}

TEST(AlgJump, KnownCandidateSets) {
    auto a = alg_jump(ints({2, 3, 47, 431}), {19, 43, 61, 101, 109});
    EXPECT_EQ(values(a.candidates), std::vector<long>{1});
    EXPECT_EQ(a.kernel_dim, 0u);
    auto b = alg_jump(ints({2, 7, 6449, 39870353}), {5, 13, 41, 53});
    EXPECT_EQ(values(b.candidates), (std::vector<long>{1, -1}));
    auto c = alg_jump(ints({2}), {});
    EXPECT_EQ(values(c.candidates), (std::vector<long>{1, -1, 2, -2}));
    EXPECT_EQ(c.kernel_dim, 2u);
    EXPECT_THROW(alg_jump(ints({2, 3}), {3}), InputError);
}

TEST(AlgJump, SoundnessAndSingleNodeFilter) {
    std::vector<Integer> bad{2, 3, 5, 7};
    std::vector<Integer> basis{-1, 2, 3, 5, 7};
    for (const auto& hidden : classes_on(basis)) {
        std::vector<std::uint64_t> nonjump;
        for (auto p : odd_primes_up_to(60)) {
            if (p > 7 && symbol_at(hidden, p) == 1) nonjump.push_back(p);
        }
        auto res = alg_jump(bad, nonjump);
        EXPECT_NE(std::find(res.candidates.begin(), res.candidates.end(), hidden), res.candidates.end());
        for (const auto& p0 : bad) {
            if (!ramifies_at(hidden, p0)) continue;
            auto kept = filter_single_node(res.candidates, p0);
            EXPECT_NE(std::find(kept.begin(), kept.end(), hidden), kept.end());
            EXPECT_EQ(std::find(kept.begin(), kept.end(), SquareClass::of(1)), kept.end());
        }
    }
}

TEST(Predict, Examples) {
    EXPECT_EQ(predict_jump_primes(SquareClass::of(-1), 20), (std::vector<std::uint64_t>{3, 7, 11, 19}));
    EXPECT_EQ(predict_jump_primes(SquareClass::of(-3), 20), (std::vector<std::uint64_t>{5, 11, 17}));
    EXPECT_TRUE(predict_jump_primes(SquareClass::of(1), 100).empty());
}

TEST(Census, ClosedFormFamilies) {
    auto c4 = census(kDiag, 10000);
    for (const auto& r : c4.rows) EXPECT_EQ(r.jump, r.p % 4 == 3) << r.p;
    double g4 = c4.gamma().get_d();
    EXPECT_GE(g4, 0.45);
    EXPECT_LE(g4, 0.55);
    auto c2 = census(kSextic, 10000);
    for (const auto& r : c2.rows) EXPECT_EQ(r.jump, r.p % 3 == 2) << r.p;
    double g2 = c2.gamma().get_d();
    EXPECT_GE(g2, 0.45);
    EXPECT_LE(g2, 0.55);
    EXPECT_EQ(c4.primes_up_to_B, 1229u);
    EXPECT_THROW(census(Surface::quartic3(parse("X0^4+X1^4+X2^4+X3^4+X0*X1*X2*X3", 4)), 100), MathError);
}

TEST(Oracles, CountsAtSmallPrimes) {
    CountOracle q(kDiag, builtin_decomposition(ClosedForm::DiagonalQuartic));
    EXPECT_EQ(q(3), 1);
    EXPECT_EQ(q(5), 1);
    CountOracle s(kSextic, builtin_decomposition(ClosedForm::FermatSextic));
    EXPECT_EQ(s(5), 1);
    EXPECT_EQ(s(7), -1);
    EXPECT_EQ(s(13), 1);
    auto dq = alg_delta(ints({2}), std::ref(q), PrimeSource::ascending(ints({2})));
    EXPECT_EQ(dq.delta, SquareClass::of(1));
    auto ds = alg_delta(ints({2, 3}), std::ref(s), PrimeSource::ascending(ints({2, 3})));
    EXPECT_EQ(ds.delta, SquareClass::of(-1));
}

TEST(Oracles, SpectraAgreeWithCounts) {
    for (const auto* surf : {&kDiag, &kSextic}) {
        SpectraOracle sp(*surf);
        CountOracle co(*surf, sp.decomposition());
        for (auto p : odd_primes_up_to(23)) {
            if (p == 3 && surf == &kSextic) continue;
            EXPECT_EQ(sp(p), co(p)) << p;
        }
    }
    EXPECT_THROW(SpectraOracle(Surface::special_quartic(1, parse("X0^2-X0*X1-X0*X2-X1*X2", 3),
                                                         parse("-X0^3*X2+X0*X1^2*X2-X1^4-X2^4", 3))),
                 MathError);
}

// det on T at p equals the symbol of Delta_{H^2} Delta_Pic, for all good p <= 200
TEST(Oracles, JumpCharacterConsistency) {
    struct Case {
        const Surface* s;
        SquareClass h2;
    };
    for (const auto& c : {Case{&kDiag, SquareClass::of(1)}, Case{&kSextic, SquareClass::of(-1)}}) {
        SpectraOracle sp(*c.s);
        auto D = sp.decomposition();
        SquareClass jump = c.h2 * D.det_class();
        for (auto p : odd_primes_up_to(200)) {
            if (p == 3 && c.s == &kSextic) continue;
            int dT = sp(p) * det_pic_at(D, p);
            EXPECT_EQ(dT, symbol_at(jump, p)) << p;
            EXPECT_EQ(sp(p), symbol_at(c.h2, p)) << p;
        }
    }
}

TEST(Rank8, SpecialQuarticReports) {
    auto jc = Surface::special_quartic(1, parse("X0^2-X0*X1-X0*X2-X1*X2", 3), parse("-X0^3*X2+X0*X1^2*X2-X1^4-X2^4", 3));
    auto r = rank8_special_quartic_report(jc);
    ASSERT_TRUE(r.jump.has_value());
    EXPECT_TRUE(r.jump->is_trivial());
    auto nt = Surface::special_quartic(1, MultiPoly(3), parse("X0^4-X0^3*X1-2*X0^3*X2-X0^2*X1*X2+X0*X1^2*X2-X1^4-X2^4", 3));
    EXPECT_EQ(*rank8_special_quartic_report(nt).jump, SquareClass::of(-1));
    // the diagonal quartic, read as a special quartic: same classes as its decomposition
    auto d = rank8_special_quartic_report(kDiag);
    EXPECT_EQ(*d.delta_h2, SquareClass::of(1));
    EXPECT_EQ(*d.delta_pic, SquareClass::of(-1));
}

TEST(Report, Json) {
    CharacterReport r;
    r.delta_h2 = SquareClass::of(-1);
    r.delta_pic = SquareClass::of(3);
    r.fill_jump();
    r.evidence = {{5, 1, "counts"}, {7, -1, "counts"}};
    auto j = r.to_json();
    EXPECT_EQ(j["schema"], 1);
    EXPECT_EQ(j["jump"], -3);
    EXPECT_EQ(j["status"], "proved");
    EXPECT_EQ(j["evidence"][1]["det"], -1);
    EXPECT_EQ(j.dump(), "{\"schema\":1,\"delta_h2\":-1,\"delta_pic\":3,\"jump\":-3,\"status\":\"proved\",\"evidence\":[{\"p\":5,\"det\":1,\"method\":\"counts\"},{\"p\":7,\"det\":-1,\"method\":\"counts\"}]}");
}

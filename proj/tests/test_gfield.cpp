#include <gtest/gtest.h>

#include <random>
#include <set>

#include "k3char/gfield.hpp"

using namespace k3char;

TEST(MakeField, PrimeField) {
    auto f = make_field(3, 1);
    EXPECT_EQ(f.size(), 3u);
    EXPECT_EQ(f.degree(), 1u);
}

TEST(MakeField, F9UsesXSquaredPlusOne) {
    auto f = make_field(3, 2);
    EXPECT_EQ(f.modulus(), (std::vector<std::uint64_t>{1, 0, 1}));
    EXPECT_EQ(f.size(), 9u);
}

TEST(MakeField, Errors) {
    EXPECT_THROW(make_field(9, 2), InputError);
    EXPECT_THROW(make_field(1, 1), InputError);
    EXPECT_THROW(make_field(5, 0), InputError);
}

TEST(MakeField, ModulusIsFirstIrreducible) {
    // brute force: a monic quadratic/cubic is irreducible iff it has no root
    for (std::uint64_t p : {3u, 5u, 7u, 11u}) {
        for (unsigned k : {2u, 3u}) {
            auto f = make_field(p, k);
            for (std::uint64_t t = 0;; ++t) {
                std::vector<std::uint64_t> m(k + 1, 0);
                std::uint64_t idx = t;
                for (unsigned i = 0; i < k; ++i) {
                    m[i] = idx % p;
                    idx /= p;
                }
                m[k] = 1;
                bool has_root = false;
                for (std::uint64_t x = 0; x < p; ++x) {
                    std::uint64_t v = 0;
                    for (unsigned i = k + 1; i-- > 0;) v = (v * x + m[i]) % p;
                    has_root |= v == 0;
                }
                if (!has_root) {
                    EXPECT_EQ(f.modulus(), m) << p << "^" << k;
                    break;
                }
            }
        }
    }
}

TEST(Irreducible, Rabin) {
    EXPECT_TRUE(is_irreducible({1, 0, 1}, 3));
    EXPECT_FALSE(is_irreducible({1, 0, 1}, 5));  // -1 is a square mod 5
    // x^4 + 1 is reducible over every F_p
    for (std::uint64_t p : {3u, 5u, 7u, 11u, 13u}) EXPECT_FALSE(is_irreducible({1, 0, 0, 0, 1}, p));
    // (x^2+1)^2 over F_3: no roots but reducible
    EXPECT_FALSE(is_irreducible({1, 0, 2, 0, 1}, 3));
}

class SmallFieldAxioms : public ::testing::TestWithParam<std::pair<std::uint64_t, unsigned>> {};

TEST_P(SmallFieldAxioms, Exhaustive) {
    auto [p, k] = GetParam();
    auto f = make_field(p, k);
    std::uint64_t q = f.size();
    std::vector<FpK::Element> all;
    for (std::uint64_t i = 0; i < q; ++i) all.push_back(f.from_index(i));
    for (const auto& a : all) {
        EXPECT_EQ(f.index_of(a), f.index_of(f.from_index(f.index_of(a))));
        if (!f.is_zero(a)) {
            EXPECT_EQ(f.pow(a, Integer(static_cast<unsigned long>(q - 1))), f.one());
            EXPECT_EQ(f.mul(a, f.inv(a)), f.one());
        }
        for (const auto& b : all) {
            EXPECT_EQ(f.mul(a, b), f.mul(b, a));
            EXPECT_EQ(f.sub(f.add(a, b), b), a);
        }
    }
    std::mt19937_64 rng(p * 100 + k);
    for (int t = 0; t < 3000; ++t) {
        const auto& a = all[rng() % q];
        const auto& b = all[rng() % q];
        const auto& c = all[rng() % q];
        EXPECT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        EXPECT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
    }
    // Frobenius is an automorphism fixing exactly F_p
    std::set<std::uint64_t> image;
    std::size_t fixed = 0;
    for (const auto& a : all) {
        auto fa = f.frobenius(a);
        image.insert(f.index_of(fa));
        if (fa == a) ++fixed;
        for (int t = 0; t < 5; ++t) {
            const auto& b = all[rng() % q];
            EXPECT_EQ(f.frobenius(f.mul(a, b)), f.mul(fa, f.frobenius(b)));
            EXPECT_EQ(f.frobenius(f.add(a, b)), f.add(fa, f.frobenius(b)));
        }
    }
    EXPECT_EQ(image.size(), q);
    EXPECT_EQ(fixed, p);
}

INSTANTIATE_TEST_SUITE_P(Fields, SmallFieldAxioms,
                         ::testing::Values(std::pair<std::uint64_t, unsigned>{3, 2}, std::pair<std::uint64_t, unsigned>{5, 2},
                                           std::pair<std::uint64_t, unsigned>{3, 3}, std::pair<std::uint64_t, unsigned>{5, 4},
                                           std::pair<std::uint64_t, unsigned>{7, 3}, std::pair<std::uint64_t, unsigned>{23, 2},
                                           std::pair<std::uint64_t, unsigned>{13, 2}));

TEST(F25, AllNonzeroHaveOrderDividing24) {
    auto f = make_field(5, 2);
    for (std::uint64_t i = 1; i < 25; ++i) EXPECT_EQ(f.pow(f.from_index(i), 24), f.one());
}

TEST(FieldTables, AgreeWithVectorArithmetic) {
    for (auto [p, k] : std::vector<std::pair<std::uint64_t, unsigned>>{{3, 1}, {3, 2}, {5, 2}, {7, 2}, {3, 4}, {11, 2}}) {
        auto f = make_field(p, k);
        FieldTables t(f);
        std::uint64_t q = f.size();
        for (std::uint64_t i = 0; i < q; ++i) {
            auto a = f.from_index(i);
            auto la = t.log_of_index(i);
            EXPECT_EQ(t.index_of_log(la), i);
            EXPECT_EQ(t.chi(la), f.chi(a));
            for (std::uint64_t j = 0; j < q; ++j) {
                auto b = f.from_index(j);
                auto lb = t.log_of_index(j);
                EXPECT_EQ(t.index_of_log(t.add(la, lb)), f.index_of(f.add(a, b)));
                EXPECT_EQ(t.index_of_log(t.mul(la, lb)), f.index_of(f.mul(a, b)));
            }
            for (unsigned e : {0u, 1u, 2u, 4u, 6u}) {
                EXPECT_EQ(t.index_of_log(t.pow(la, e)), f.index_of(f.pow(a, e)));
            }
        }
        EXPECT_EQ(t.index_of_log(t.from_int(-1)), f.index_of(f.from_int(-1)));
    }
}

TEST(GF2, Examples) {
    auto a = GF2Matrix::from_rows({{1, 1}, {1, 1}}, 2);
    EXPECT_EQ(a.rank(), 1u);
    auto ker = a.kernel();
    ASSERT_EQ(ker.size(), 1u);
    EXPECT_EQ(ker[0], (std::vector<int>{1, 1}));
    auto id = GF2Matrix::identity(5);
    EXPECT_EQ(id.rank(), 5u);
    EXPECT_TRUE(id.kernel().empty());
    EXPECT_FALSE(a.solve({0, 1}).has_value());
    EXPECT_TRUE(a.solve({1, 1}).has_value());
    EXPECT_THROW(a.solve({1}), InputError);
}

TEST(GF2, EmptyMatrixHasFullKernel) {
    GF2Matrix m(0, 3);
    EXPECT_EQ(m.rank(), 0u);
    EXPECT_EQ(m.kernel().size(), 3u);
}

TEST(GF2, RandomProperties) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t rows = 1 + rng() % 25, cols = 1 + rng() % 8;
        if (trial % 10 == 0) cols = 70 + rng() % 70;  // span several words
        GF2Matrix m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) m.set(i, j, rng() & 1);
        }
        auto ker = m.kernel();
        EXPECT_EQ(m.rank() + ker.size(), cols);
        for (const auto& v : ker) {
            auto z = m.multiply(v);
            EXPECT_TRUE(std::all_of(z.begin(), z.end(), [](int x) { return x == 0; }));
        }
        std::vector<int> x(cols);
        for (auto& b : x) b = rng() & 1;
        auto b = m.multiply(x);
        auto sol = m.solve(b);
        ASSERT_TRUE(sol.has_value());
        EXPECT_EQ(m.multiply(*sol), b);
        // rank is invariant under row shuffles
        std::vector<std::size_t> perm(rows);
        for (std::size_t i = 0; i < rows; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        GF2Matrix s(rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) s.set(i, j, m.get(perm[i], j));
        }
        EXPECT_EQ(s.rank(), m.rank());
        EXPECT_EQ(m.echelon().echelon(), m.echelon());
    }
}

TEST(GF2, AppendRow) {
    GF2Matrix m(0, 3);
    m.append_row({1, 0, 1});
    m.append_row({0, 1, 1});
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.rank(), 2u);
    auto ker = m.kernel();
    ASSERT_EQ(ker.size(), 1u);
    EXPECT_EQ(ker[0], (std::vector<int>{1, 1, 1}));
}

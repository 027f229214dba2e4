#include <kowalevskaya/algebra.hpp>

#include <gtest/gtest.h>

#include <random>

namespace kw = kowalevskaya;
using kw::Rational;

TEST(Basis, DimensionsAndOrdering)
{
    auto b2 = kw::build_basis(2);
    EXPECT_EQ(b2.total_dim, 6u);
    std::vector<std::pair<int, int>> expected{{0, 1}, {0, 2}, {1, 2}};
    EXPECT_EQ(b2.rotation_pairs, expected);
    EXPECT_EQ(kw::build_basis(3).total_dim, 10u);
    EXPECT_EQ(kw::build_basis(5).total_dim, 21u);
    EXPECT_EQ(b2.coordinate_names(), (std::vector<std::string>{"l_1_2", "l_1_3", "l_2_3", "p_1", "p_2", "p_3"}));
}

TEST(Basis, RejectsSmallRank)
{
    EXPECT_THROW(kw::build_basis(1), std::invalid_argument);
    EXPECT_THROW(kw::build_basis(0), std::invalid_argument);
}

TEST(Basis, FlatIndexRoundTrip)
{
    for (int n = 2; n <= 7; ++n) {
        auto b = kw::build_basis(n);
        EXPECT_EQ(b.rotation_pairs.size(), static_cast<std::size_t>((n + 1) * n / 2));
        for (std::size_t a = 0; a < b.rotation_count; ++a) {
            auto [j, k] = b.rotation_pairs[a];
            EXPECT_LT(j, k);
            EXPECT_EQ(b.rotation_index(j, k), a);
            EXPECT_EQ(b.rotation_index(k, j), a);
            if (a > 0) {
                EXPECT_LT(b.rotation_pairs[a - 1], b.rotation_pairs[a]);
            }
        }
        for (int m = 0; m <= n; ++m) EXPECT_EQ(b.translation_index(m), b.rotation_count + m);
        // L + N + P + T
        EXPECT_EQ(b.total_dim, static_cast<std::size_t>(n * (n - 1) / 2 + n + n + 1));
    }
}

TEST(PhaseState, AntisymmetryIsStructural)
{
    std::mt19937_64 rng(3);
    auto x = kw::random_state<double>(4, rng);
    auto l = x.l_hat();
    for (std::size_t i = 0; i < l.rows(); ++i)
        for (std::size_t j = 0; j < l.cols(); ++j) EXPECT_EQ(l(i, j), -l(j, i));
    x.set_l(3, 1, 2.5);
    EXPECT_EQ(x.l(1, 3), -2.5);
    EXPECT_EQ(x.l(3, 1), 2.5);
    EXPECT_THROW(x.set_l(2, 2, 1.0), std::invalid_argument);
}

TEST(Decompose, DirectIndexSplit)
{
    kw::PhaseState<Rational> x(2);
    const Rational a(1, 3), b(-2), c(5, 7), u(1), v(-1, 2), w(9);
    x.set_l(0, 1, a);
    x.set_l(0, 2, b);
    x.set_l(1, 2, c);
    x.set_p(0, u);
    x.set_p(1, v);
    x.set_p(2, w);
    auto blocks = kw::decompose(x);
    EXPECT_EQ(blocks.l_block(0, 1), a);
    EXPECT_EQ(blocks.l_block(1, 0), -a);
    EXPECT_EQ(blocks.l_block(0, 0), Rational(0));
    EXPECT_EQ(blocks.n_vec, (kw::Vector<Rational>{b, c}));
    EXPECT_EQ(blocks.p0, (kw::Vector<Rational>{u, v}));
    EXPECT_EQ(blocks.t, w);
}

TEST(Decompose, ZeroStateGivesZeroBlocks)
{
    auto blocks = kw::decompose(kw::PhaseState<double>(3));
    EXPECT_TRUE(blocks.l_block.is_zero());
    for (double v : blocks.n_vec) EXPECT_EQ(v, 0.0);
    for (double v : blocks.p0) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(blocks.t, 0.0);
}

TEST(Decompose, RoundTripProperty)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> rank(2, 6);
    for (int trial = 0; trial < 100; ++trial) {
        auto x = kw::random_state<Rational>(rank(rng), rng);
        EXPECT_EQ(kw::reassemble(kw::decompose(x)), x);
    }
}

TEST(ProjectA, IdentityAndKernel)
{
    EXPECT_EQ(kw::project_A(kw::Matrix<int>::identity(4)), kw::Matrix<int>::identity(3));
    kw::Matrix<double> m(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        m(3, i) = 1.0 + i;
        m(i, 3) = 2.0 - i;
    }
    EXPECT_TRUE(kw::project_A(m).is_zero());
}

TEST(ProjectA, IdempotentAndNormNonincreasing)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        kw::Matrix<Rational> m(5, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) m(i, j) = kw::random_scalar<Rational>(rng);
        auto once = kw::project_A_padded(m);
        EXPECT_EQ(kw::project_A_padded(once), once);
        EXPECT_EQ(kw::project_A(once), kw::project_A(m));
        EXPECT_LE(kw::frobenius_norm_squared(kw::project_A(m)), kw::frobenius_norm_squared(m));
    }
}

TEST(Scalar, RationalParsing)
{
    EXPECT_EQ(kw::parse_rational("3/4"), Rational(3, 4));
    EXPECT_EQ(kw::parse_rational(" -6/8 "), Rational(-3, 4));
    EXPECT_EQ(kw::parse_rational("12"), Rational(12));
    EXPECT_EQ(kw::parse_rational("0.1"), Rational(1, 10));
    EXPECT_EQ(kw::parse_rational("-1.5e-3"), Rational(-3, 2000));
    EXPECT_EQ(kw::parse_rational("2e2"), Rational(200));
    EXPECT_EQ(kw::parse_rational("0.25"), Rational(1, 4));
    EXPECT_EQ(kw::parse_rational("0.025"), Rational(1, 40));
    EXPECT_EQ(kw::parse_rational("010/08"), Rational(5, 4));
    EXPECT_EQ(kw::parse_rational("-007"), Rational(-7));
    EXPECT_THROW(kw::parse_rational("0x10"), std::invalid_argument);
    EXPECT_THROW(kw::parse_rational("1/-"), std::invalid_argument);
    EXPECT_THROW(kw::parse_rational("1/0"), std::invalid_argument);
    EXPECT_THROW(kw::parse_rational("abc"), std::invalid_argument);
    EXPECT_THROW(kw::parse_rational(""), std::invalid_argument);
    EXPECT_EQ(kw::rational_to_string(Rational(-7, 3)), "-7/3");
    EXPECT_EQ(kw::rational_to_string(Rational(4)), "4");
}

#include "test_support.hpp"

#include <kowalevskaya/conserved.hpp>
#include <kowalevskaya/models.hpp>
#include <kowalevskaya/poisson.hpp>

#include <gtest/gtest.h>

#include <random>

namespace kw = kowalevskaya;
using kw::Rational;

namespace {

std::size_t rot(const kw::BasisIndex& b, int j, int k) { return b.rotation_index(j - 1, k - 1); }
std::size_t tr(const kw::BasisIndex& b, int m) { return b.translation_index(m - 1); }

} // namespace

TEST(StructureConstants, TranslationsCommute)
{
    for (int n = 2; n <= 5; ++n) {
        kw::StructureTensor C(n);
        const auto& b = C.basis();
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) EXPECT_TRUE(C.terms(b.translation_index(i), b.translation_index(j)).empty());
    }
}

TEST(StructureConstants, SignsFromDefiningRepresentation)
{
    // Hand products of elementary matrices: E12 E13 = -e2 e3^T, E13 E12 = -e3 e2^T,
    // so [E12, E13] = -E23. Likewise E12 e2 = e1 and E12 e1 = -e2.
    kw::StructureTensor C(2);
    const auto& b = C.basis();
    EXPECT_EQ(C.coefficient(rot(b, 1, 2), rot(b, 1, 3), rot(b, 2, 3)), -1);
    EXPECT_EQ(C.coefficient(rot(b, 1, 3), rot(b, 1, 2), rot(b, 2, 3)), 1);
    EXPECT_EQ(C.coefficient(rot(b, 1, 2), tr(b, 2), tr(b, 1)), 1);
    EXPECT_EQ(C.coefficient(rot(b, 1, 2), tr(b, 1), tr(b, 2)), -1);
    EXPECT_EQ(C.terms(rot(b, 1, 2), tr(b, 3)).size(), 0u);
}

TEST(StructureConstants, AntisymmetricWithUnitCoefficients)
{
    for (int n = 2; n <= 5; ++n) {
        kw::StructureTensor C(n);
        for (std::size_t a = 0; a < C.dim(); ++a)
            for (std::size_t b = 0; b < C.dim(); ++b) {
                for (const auto& t : C.terms(a, b)) {
                    EXPECT_TRUE(t.coeff == 1 || t.coeff == -1);
                    EXPECT_EQ(C.coefficient(b, a, t.gamma), -t.coeff);
                }
            }
    }
}

TEST(StructureConstants, JacobiIdentityExhaustive)
{
    for (int n = 2; n <= 4; ++n) {
        kw::StructureTensor C(n);
        const std::size_t D = C.dim();
        // Dense copy so the oracle loop does not share the sparse lookup.
        std::vector<int> c(D * D * D, 0);
        auto at = [&](std::size_t a, std::size_t b, std::size_t g) -> int& { return c[(a * D + b) * D + g]; };
        for (std::size_t a = 0; a < D; ++a)
            for (std::size_t b = 0; b < D; ++b)
                for (const auto& t : C.terms(a, b)) at(a, b, t.gamma) = t.coeff;
        long violations = 0;
        for (std::size_t a = 0; a < D; ++a)
            for (std::size_t b = 0; b < D; ++b)
                for (std::size_t g = 0; g < D; ++g)
                    for (std::size_t s = 0; s < D; ++s) {
                        long sum = 0;
                        for (std::size_t m = 0; m < D; ++m) {
                            sum += at(a, b, m) * at(m, g, s) + at(b, g, m) * at(m, a, s) + at(g, a, m) * at(m, b, s);
                        }
                        if (sum != 0) ++violations;
                    }
        EXPECT_EQ(violations, 0) << "n = " << n;
    }
}

TEST(PoissonTensor, ZeroAtOriginAndAntisymmetric)
{
    EXPECT_TRUE(kw::poisson_tensor(kw::PhaseState<Rational>(3)).is_zero());
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 4;
        auto x = kw::random_state<Rational>(n, rng);
        auto pi = kw::poisson_tensor(x);
        EXPECT_EQ(pi, -pi.transpose());
    }
}

TEST(Bracket, TensorRouteMatchesStructureConstantSum)
{
    std::mt19937_64 rng(23);
    for (int n = 2; n <= 4; ++n) {
        kw::StructureTensor C(n);
        for (int trial = 0; trial < 10; ++trial) {
            auto x = kw::random_state<Rational>(n, rng);
            auto f = kw::testing::random_polynomial<Rational>(C.dim(), rng);
            auto g = kw::testing::random_polynomial<Rational>(C.dim(), rng);
            auto df = f.gradient(x);
            auto dg = g.gradient(x);
            EXPECT_EQ(kw::bracket_of_gradients<Rational>(kw::poisson_tensor(C, x), df, dg),
                      kw::bracket_by_structure_constants<Rational>(C, x, df, dg));
        }
    }
}

TEST(Bracket, AntisymmetryAndCoordinates)
{
    std::mt19937_64 rng(29);
    kw::StructureTensor C(3);
    auto x = kw::random_state<Rational>(3, rng);
    auto f = kw::testing::random_polynomial<Rational>(C.dim(), rng);
    auto g = kw::testing::random_polynomial<Rational>(C.dim(), rng);
    EXPECT_EQ(kw::bracket<Rational>(C, f.gradient_fn(), f.gradient_fn(), x), Rational(0));
    EXPECT_EQ(kw::bracket<Rational>(C, f.gradient_fn(), g.gradient_fn(), x),
              -kw::bracket<Rational>(C, g.gradient_fn(), f.gradient_fn(), x));
    auto pi = kw::poisson_tensor(C, x);
    for (std::size_t a = 0; a < C.dim(); ++a)
        for (std::size_t b = 0; b < C.dim(); ++b) {
            EXPECT_EQ(kw::bracket<Rational>(C, kw::coordinate_gradient<Rational>(a), kw::coordinate_gradient<Rational>(b),
                                            x),
                      pi(a, b));
        }
}

TEST(Bracket, BilinearAndLeibniz)
{
    std::mt19937_64 rng(31);
    for (int n = 2; n <= 4; ++n) {
        kw::StructureTensor C(n);
        for (int trial = 0; trial < 8; ++trial) {
            auto x = kw::random_state<Rational>(n, rng);
            auto f = kw::testing::random_polynomial<Rational>(C.dim(), rng, 3, 2);
            auto g = kw::testing::random_polynomial<Rational>(C.dim(), rng, 3, 2);
            auto h = kw::testing::random_polynomial<Rational>(C.dim(), rng, 3, 2);
            auto fg = f * g;
            const Rational lhs = kw::bracket<Rational>(C, fg.gradient_fn(), h.gradient_fn(), x);
            const Rational rhs = f(x) * kw::bracket<Rational>(C, g.gradient_fn(), h.gradient_fn(), x) +
                                 g(x) * kw::bracket<Rational>(C, f.gradient_fn(), h.gradient_fn(), x);
            EXPECT_EQ(lhs, rhs);

            const Rational s = kw::random_scalar<Rational>(rng);
            kw::GradientFn<Rational> combo = [&](const kw::PhaseState<Rational>& y) {
                auto a = f.gradient(y);
                auto b = g.gradient(y);
                for (std::size_t i = 0; i < a.size(); ++i) a[i] = s * a[i] + b[i];
                return a;
            };
            EXPECT_EQ(kw::bracket<Rational>(C, combo, h.gradient_fn(), x),
                      s * kw::bracket<Rational>(C, f.gradient_fn(), h.gradient_fn(), x) +
                          kw::bracket<Rational>(C, g.gradient_fn(), h.gradient_fn(), x));
        }
    }
}

TEST(VectorField, ConstantHamiltonianGivesZeroField)
{
    std::mt19937_64 rng(37);
    auto x = kw::random_state<Rational>(3, rng);
    kw::GradientFn<Rational> constant = [](const kw::PhaseState<Rational>& y) {
        return kw::Vector<Rational>(y.dim(), Rational(0));
    };
    for (const auto& v : kw::vector_field(constant, x)) EXPECT_EQ(v, Rational(0));
}

TEST(VectorField, ComponentsAreBracketsWithCoordinates)
{
    std::mt19937_64 rng(41);
    kw::StructureTensor C(3);
    auto x = kw::random_state<Rational>(3, rng);
    auto H = kw::testing::random_polynomial<Rational>(C.dim(), rng);
    auto v = kw::vector_field(C, H.gradient_fn(), x);
    for (std::size_t a = 0; a < C.dim(); ++a) {
        EXPECT_EQ(v[a], kw::bracket<Rational>(C, H.gradient_fn(), kw::coordinate_gradient<Rational>(a), x));
    }
}

TEST(VectorField, MomentumNormSquaredIsCasimir)
{
    std::mt19937_64 rng(43);
    for (int n = 2; n <= 6; ++n) {
        kw::StructureTensor C(n);
        kw::GradientFn<Rational> casimir = [](const kw::PhaseState<Rational>& y) {
            return kw::p_norm_squared_gradient(y);
        };
        for (int trial = 0; trial < 10; ++trial) {
            auto x = kw::random_state<Rational>(n, rng);
            for (const auto& v : kw::vector_field(C, casimir, x)) EXPECT_EQ(v, Rational(0));
        }
    }
}

TEST(VectorField, MatchesClassicalKowalevskayaTop)
{
    std::mt19937_64 rng(47);
    kw::StructureTensor C(2);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = kw::random_state<Rational>(2, rng);
        kw::Vector<Rational> gamma{kw::random_scalar<Rational>(rng), kw::random_scalar<Rational>(rng)};
        if (gamma[0].is_zero() && gamma[1].is_zero()) gamma[0] = 1;
        auto spec = kw::kowalevskaya_spec(gamma);
        auto v = kw::vector_field(C, kw::hamiltonian_gradient(spec), x);

        kw::testing::EulerPoisson<Rational> top;
        top.center = {gamma[0], gamma[1], Rational(0)};
        auto cls = kw::testing::to_classical<Rational>(x.coords());
        std::array<Rational, 3> dM, dG;
        top.rates(cls.M, cls.G, dM, dG);
        auto mapped = kw::testing::to_classical<Rational>(v);
        EXPECT_EQ(mapped.M, dM);
        EXPECT_EQ(mapped.G, dG);
    }
}

TEST(CasimirCorank, ClassicalCounts)
{
    std::mt19937_64 rng(53);
    auto r2 = kw::casimir_corank(kw::random_state<double>(2, rng));
    EXPECT_FALSE(r2.degenerate);
    EXPECT_EQ(r2.corank, 2);
    auto r4 = kw::casimir_corank(kw::random_state<double>(4, rng));
    EXPECT_FALSE(r4.degenerate);
    EXPECT_EQ(r4.corank, 3);
}

TEST(CasimirCorank, GenericPointsUpToRankSix)
{
    std::mt19937_64 rng(59);
    for (int n = 2; n <= 6; ++n) {
        kw::StructureTensor C(n);
        for (int trial = 0; trial < 10; ++trial) {
            auto r = kw::casimir_corank(C, kw::random_state<double>(n, rng));
            EXPECT_FALSE(r.degenerate);
            EXPECT_EQ(r.corank, n / 2 + 1) << "n = " << n;
        }
    }
}

TEST(CasimirCorank, DegeneratePoints)
{
    auto zero = kw::casimir_corank(kw::PhaseState<double>(3));
    EXPECT_TRUE(zero.degenerate);
    EXPECT_EQ(zero.corank, 10);

    std::mt19937_64 rng(61);
    auto x = kw::random_state<double>(3, rng);
    for (int m = 0; m <= 3; ++m) x.set_p(m, 0.0);
    EXPECT_TRUE(kw::casimir_corank(x).degenerate);
}

TEST(CasimirCorank, NullspaceIsTangentToEveryFlow)
{
    std::mt19937_64 rng(67);
    for (int n = 2; n <= 5; ++n) {
        kw::StructureTensor C(n);
        auto x = kw::random_state<double>(n, rng);
        auto pi = kw::to_eigen(kw::poisson_tensor(C, x));
        auto r = kw::casimir_corank(C, x);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(pi, Eigen::ComputeFullV);
        auto H = kw::testing::random_polynomial<double>(C.dim(), rng);
        auto field = kw::vector_field(C, H.gradient_fn(), x);
        Eigen::Map<const Eigen::VectorXd> f(field.data(), static_cast<Eigen::Index>(field.size()));
        for (int k = 0; k < r.corank; ++k) {
            Eigen::VectorXd null_dir = svd.matrixV().col(pi.cols() - 1 - k);
            EXPECT_NEAR(null_dir.dot(f), 0.0, 1e-9 * (1.0 + f.norm()));
        }
    }
}

#include <kowalevskaya/flow.hpp>
#include <kowalevskaya/lax.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

namespace kw = kowalevskaya;
using kw::Rational;

namespace {

/// L is quadratic, so the symmetric difference quotient with unit step is its
/// exact directional derivative. Uses only build_L.
kw::Matrix<Rational> polarized_derivative(const kw::PhaseState<Rational>& x, const kw::Vector<Rational>& gamma,
                                          const kw::Vector<Rational>& v)
{
    auto xp = x, xm = x;
    for (std::size_t a = 0; a < x.dim(); ++a) {
        xp[a] += v[a];
        xm[a] -= v[a];
    }
    return (kw::build_L<Rational>(xp, gamma) - kw::build_L<Rational>(xm, gamma)) * Rational(1, 2);
}

} // namespace

TEST(BuildL, OuterProductOnly)
{
    const Rational g1(2, 3), g2(-5), u(7), v(-1, 4);
    kw::PhaseState<Rational> x(2);
    x.set_p(0, u);
    x.set_p(1, v);
    x.set_p(2, Rational(99));
    auto L = kw::build_L<Rational>(x, kw::Vector<Rational>{g1, g2});
    EXPECT_EQ(L(0, 0), 2 * g1 * u);
    EXPECT_EQ(L(0, 1), g1 * v + g2 * u);
    EXPECT_EQ(L(1, 0), g1 * v + g2 * u);
    EXPECT_EQ(L(1, 1), 2 * g2 * v);
}

TEST(BuildL, ZeroMomentumGivesPositiveSemidefinite)
{
    std::mt19937_64 rng(1);
    for (int n = 2; n <= 6; ++n) {
        auto x = kw::random_state<double>(n, rng);
        for (int m = 0; m <= n; ++m) x.set_p(m, 0.0);
        kw::Vector<double> gamma(static_cast<std::size_t>(n), 1.0);
        auto L = kw::build_L<double>(x, gamma);
        auto l = x.l_hat();
        EXPECT_EQ(L, kw::project_A(l.transpose() * l));
        for (double e : kw::sorted_eigenvalues(L)) EXPECT_GE(e, -1e-12);
    }
}

TEST(BuildL, SymmetricWithTraceTwiceEnergy)
{
    std::mt19937_64 rng(2);
    for (int n = 2; n <= 6; ++n) {
        auto x = kw::random_state<Rational>(n, rng);
        auto gamma = kw::random_gamma(n, rng);
        auto L = kw::build_L<Rational>(x, gamma);
        EXPECT_EQ(L, L.transpose());
        EXPECT_EQ(L.trace(), 2 * kw::energy(kw::kowalevskaya_spec(gamma), x));
    }
}

TEST(BuildL, DimensionMismatch)
{
    kw::PhaseState<double> x(3);
    EXPECT_THROW(kw::build_L<double>(x, kw::Vector<double>{1.0, 0.0}), std::invalid_argument);
}

TEST(BuildM, Examples)
{
    std::mt19937_64 rng(3);
    EXPECT_TRUE(kw::build_M(kw::PhaseState<Rational>(3), Rational(2)).is_zero());
    auto x = kw::random_state<Rational>(2, rng);
    EXPECT_TRUE(kw::build_M(x, Rational(0)).is_zero());
    auto M = kw::build_M(x, Rational(3, 2));
    EXPECT_EQ(M(0, 0), Rational(0));
    EXPECT_EQ(M(1, 1), Rational(0));
    EXPECT_EQ(M(0, 1), Rational(3, 2) * x.l(0, 1));
    EXPECT_EQ(M(1, 0), -M(0, 1));
    auto y = kw::random_state<Rational>(5, rng);
    auto M5 = kw::build_M(y, Rational(-2));
    EXPECT_EQ(M5, -M5.transpose());
}

TEST(DerivativeOfL, MatchesPolarization)
{
    std::mt19937_64 rng(4);
    for (int n = 2; n <= 5; ++n) {
        auto x = kw::random_state<Rational>(n, rng);
        auto gamma = kw::random_gamma(n, rng);
        for (std::size_t a = 0; a < x.dim(); ++a) {
            kw::Vector<Rational> e(x.dim(), Rational(0));
            e[a] = 1;
            EXPECT_EQ(kw::dL_dx<Rational>(x, gamma, a), polarized_derivative(x, gamma, e));
        }
        // the last translation does not enter L
        EXPECT_TRUE(kw::dL_dx<Rational>(x, gamma, x.basis().translation_index(n)).is_zero());
    }
}

TEST(EvolveL, MatchesPolarizationAlongVectorField)
{
    std::mt19937_64 rng(5);
    for (int n = 2; n <= 5; ++n) {
        kw::StructureTensor C(n);
        auto x = kw::random_state<Rational>(n, rng);
        auto spec = kw::kowalevskaya_spec(kw::random_gamma(n, rng));
        auto v = kw::vector_field(C, kw::hamiltonian_gradient(spec), x);
        EXPECT_EQ(kw::evolve_L(C, x, spec), polarized_derivative(x, spec.gamma, v));
    }
}

TEST(EvolveL, MatchesFiniteDifferencesAlongNumericFlow)
{
    std::mt19937_64 rng(6);
    for (int n = 2; n <= 4; ++n) {
        kw::StructureTensor C(n);
        auto xq = kw::random_state<Rational>(n, rng, 1000, 500);
        auto spec_q = kw::kowalevskaya_spec(kw::random_gamma(n, rng));
        auto x = xq.cast<double>();
        auto spec = spec_q.cast<double>();
        const double h = 1e-4;
        auto fwd = kw::build_L<double>(kw::fixed_step(C, x, spec, h), spec.gamma);
        auto bwd = kw::build_L<double>(kw::fixed_step(C, x, spec, -h), spec.gamma);
        auto fd = (fwd - bwd) * (1.0 / (2 * h));
        auto exact = kw::evolve_L(C, x, spec);
        const double scale = std::sqrt(kw::frobenius_norm_squared(exact));
        EXPECT_LE(std::sqrt(kw::frobenius_norm_squared(fd - exact)), 1e-6 * scale);
    }
}

TEST(EvolveL, NoLaxClaimForLagrange)
{
    kw::PhaseState<Rational> x(3);
    EXPECT_THROW(kw::evolve_L(kw::StructureTensor(3), x, kw::lagrange_spec<Rational>(3, 1, 1, 1)),
                 std::invalid_argument);
}

TEST(Calibration, UnitMultiplierSharedAcrossRanks)
{
    std::optional<Rational> first;
    for (int n = 2; n <= 4; ++n) {
        auto r = kw::calibrate_c(n, 12, 7);
        ASSERT_TRUE(r.c.has_value()) << r.message;
        const Rational mag = kw::abs_value(*r.c);
        EXPECT_TRUE(mag == 1 || mag == 2);
        if (!first) first = r.c;
        EXPECT_EQ(*r.c, *first);
    }
    EXPECT_EQ(*first, Rational(1));
}

TEST(Calibration, FailsOffTheKowalevskayaRatio)
{
    auto r = kw::calibrate_c(3, 10, 7, Rational(1), Rational(1));
    EXPECT_FALSE(r.c.has_value());
    EXPECT_EQ(r.message, "no constant Lax multiplier");
    EXPECT_TRUE(r.witness.has_value());
}

TEST(Calibration, Preconditions)
{
    EXPECT_THROW(kw::calibrate_c(1, 10, 0), std::invalid_argument);
    EXPECT_THROW(kw::calibrate_c(2, 9, 0), std::invalid_argument);
}

TEST(LaxResidual, ZeroAtCalibratedMultiplier)
{
    std::mt19937_64 rng(8);
    for (int n = 2; n <= 6; ++n) {
        kw::StructureTensor C(n);
        for (int trial = 0; trial < 4; ++trial) {
            auto x = kw::random_state<Rational>(n, rng);
            auto spec = kw::kowalevskaya_spec(kw::random_gamma(n, rng));
            EXPECT_TRUE(kw::lax_residual(C, x, spec, Rational(1)).is_zero()) << "n = " << n;
        }
        EXPECT_TRUE(kw::lax_residual(C, kw::PhaseState<Rational>(n), kw::kowalevskaya_spec(kw::random_gamma(n, rng)),
                                     Rational(1))
                        .is_zero());
    }
}

TEST(LaxResidual, NegativeControls)
{
    std::mt19937_64 rng(9);
    kw::StructureTensor C(3);
    auto x = kw::random_state<Rational>(3, rng);
    auto spec = kw::kowalevskaya_spec(kw::random_gamma(3, rng));
    EXPECT_FALSE(kw::lax_residual(C, x, spec, Rational(2)).is_zero());
    auto r0 = kw::lax_residual(C, x, spec, Rational(0));
    EXPECT_EQ(r0, kw::evolve_L(C, x, spec));
    EXPECT_FALSE(r0.is_zero());
    EXPECT_FALSE(kw::lax_residual(C, x, spec, Rational(1), kw::LaxFault::FlipOuterProductSign).is_zero());
}

TEST(SpectralInvariants, Examples)
{
    for (double v : kw::spectral_invariants(kw::Matrix<double>(4, 4), 4)) EXPECT_EQ(v, 0.0);
    auto id = kw::spectral_invariants(kw::Matrix<Rational>::identity(5), 5);
    for (int k = 1; k <= 5; ++k) EXPECT_EQ(id[static_cast<std::size_t>(k - 1)], Rational(5, k));
    std::mt19937_64 rng(10);
    auto x = kw::random_state<Rational>(3, rng);
    auto spec = kw::kowalevskaya_spec(kw::random_gamma(3, rng));
    EXPECT_EQ(kw::spectral_invariants(kw::build_L<Rational>(x, spec.gamma), 1)[0], 2 * kw::energy(spec, x));
    EXPECT_THROW(kw::spectral_invariants(kw::Matrix<double>(3, 3), 4), std::invalid_argument);
    EXPECT_THROW(kw::spectral_invariants(kw::Matrix<double>(3, 3), 0), std::invalid_argument);
}

TEST(SpectralInvariants, GradientCentralDifferences)
{
    std::mt19937_64 rng(11);
    const double h = 1e-5;
    for (int n = 2; n <= 4; ++n) {
        for (int trial = 0; trial < 10; ++trial) {
            auto x = kw::random_state<double>(n, rng, 1000, 700);
            kw::Vector<double> gamma;
            for (int j = 0; j < n; ++j) gamma.push_back(kw::random_scalar<double>(rng, 100, 50));
            for (int k = 1; k <= n; ++k) {
                auto g = kw::spectral_invariant_gradient<double>(x, gamma, k);
                double scale = 0.0;
                for (double v : g) scale = std::max(scale, std::fabs(v));
                for (std::size_t a = 0; a < x.dim(); ++a) {
                    auto xp = x, xm = x;
                    xp[a] += h;
                    xm[a] -= h;
                    const double fp = kw::spectral_invariants(kw::build_L<double>(xp, gamma), k).back();
                    const double fm = kw::spectral_invariants(kw::build_L<double>(xm, gamma), k).back();
                    EXPECT_LE(std::fabs((fp - fm) / (2 * h) - g[a]), 1e-6 * scale) << "n=" << n << " k=" << k;
                }
            }
        }
    }
}

TEST(PitVerify, PassesForSmallAndLargerRanks)
{
    for (int n : {2, 5}) {
        auto cert = kw::pit_verify(n, 50, 1, Rational(1));
        EXPECT_TRUE(cert.passed);
        EXPECT_EQ(cert.trial_zero.size(), 50u);
        EXPECT_FALSE(cert.witness.has_value());
    }
}

TEST(PitVerify, CorruptedLaxMatrixIsCaughtWithWitness)
{
    auto cert = kw::pit_verify(3, 20, 1, Rational(1), kw::LaxFault::FlipOuterProductSign);
    EXPECT_FALSE(cert.passed);
    ASSERT_TRUE(cert.witness.has_value());
    ASSERT_TRUE(cert.witness_residual.has_value());
    EXPECT_FALSE(cert.witness_residual->is_zero());
    // the witness reproduces the failure
    auto spec = kw::kowalevskaya_spec(cert.witness->gamma);
    EXPECT_FALSE(kw::lax_residual(cert.witness->state, spec, Rational(1), kw::LaxFault::FlipOuterProductSign).is_zero());
}

TEST(PitVerify, DeterministicAcrossThreadCounts)
{
    ::setenv("KOWALEVSKAYA_THREADS", "1", 1);
    auto a = kw::pit_verify(2, 12, 99, Rational(2));
    ::setenv("KOWALEVSKAYA_THREADS", "4", 1);
    auto b = kw::pit_verify(2, 12, 99, Rational(2));
    ::unsetenv("KOWALEVSKAYA_THREADS");
    EXPECT_EQ(a.trial_zero, b.trial_zero);
    ASSERT_TRUE(a.witness && b.witness);
    EXPECT_EQ(a.witness->state, b.witness->state);
}

TEST(Certificate, JsonShape)
{
    auto cert = kw::pit_verify(2, 10, 5, Rational(1, 2));
    auto j = kw::to_json(cert);
    EXPECT_EQ(j["n"], 2);
    EXPECT_EQ(j["c"], "1/2");
    EXPECT_EQ(j["trials"], 10);
    EXPECT_EQ(j["seed"], 5);
    EXPECT_EQ(j["status"], "fail");
    ASSERT_TRUE(j.contains("witness"));
    EXPECT_EQ(j["witness"]["coordinates"].size(), 6u);
    auto coord = j["witness"]["coordinates"]["l_1_2"].get<std::string>();
    EXPECT_NO_THROW(kw::parse_rational(coord));
    EXPECT_EQ(kw::to_json(kw::pit_verify(2, 10, 5, Rational(1)))["status"], "pass");
}

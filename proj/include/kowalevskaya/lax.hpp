#ifndef KOWALEVSKAYA_LAX_HPP_
#define KOWALEVSKAYA_LAX_HPP_

// Lax pair of the generalized Kowalevskaya systems:
//
//   L = A [ -l_hat^2 + gamma (x) p + p (x) gamma ] A      (n x n, symmetric)
//   M = c * A l_hat A                                     (n x n, antisymmetric)
//
// and exact verification of dL/dt = [L, M] along the Lie-Poisson flow.
// L is quadratic in the coordinates, so dL/dt is a cubic polynomial identity;
// it is certified by exact rational evaluation at random points.

#include "algebra.hpp"
#include "models.hpp"
#include "poisson.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace kowalevskaya {

/// Deliberate corruptions of L, used only to show that the verifiers can fail.
enum class LaxFault { None, FlipOuterProductSign };

namespace detail {

template <typename T>
void check_gamma(const PhaseState<T>& x, std::span<const T> gamma)
{
    if (gamma.size() != static_cast<std::size_t>(x.n())) {
        throw std::invalid_argument("gamma has " + std::to_string(gamma.size()) + " entries, expected n = " +
                                    std::to_string(x.n()));
    }
}

/// gamma p^T + p gamma^T on the first n coordinates of p.
template <typename T>
Matrix<T> symmetric_outer(std::span<const T> gamma, std::span<const T> p0)
{
    Matrix<T> m = outer<T>(gamma, p0);
    return m + m.transpose();
}

template <typename T>
Matrix<T> antisymmetric_from_rotation_part(const BasisIndex& basis, std::span<const T> v)
{
    const int N = basis.n + 1;
    Matrix<T> w(N, N);
    for (std::size_t a = 0; a < basis.rotation_count; ++a) {
        auto [j, k] = basis.rotation_pairs[a];
        w(j, k) = v[a];
        w(k, j) = -v[a];
    }
    return w;
}

} // namespace detail

template <typename T>
Matrix<T> build_L(const PhaseState<T>& x, std::span<const T> gamma, LaxFault fault = LaxFault::None)
{
    detail::check_gamma(x, gamma);
    const int n = x.n();
    const Matrix<T> l = x.l_hat();
    Matrix<T> L = project_A(-(l * l));
    auto p = x.p_vector();
    Matrix<T> sym = detail::symmetric_outer<T>(gamma, std::span<const T>(p.data(), static_cast<std::size_t>(n)));
    if (fault == LaxFault::FlipOuterProductSign) {
        L -= sym;
    } else {
        L += sym;
    }
    return L;
}

template <typename T>
Matrix<T> build_M(const PhaseState<T>& x, const T& c)
{
    return c * project_A(x.l_hat());
}

/// Derivative of L at x in the direction v (a tangent vector in canonical
/// coordinates). Exact: L is a quadratic polynomial.
template <typename T>
Matrix<T> directional_derivative_L(const PhaseState<T>& x, std::span<const T> gamma, std::span<const T> v,
                                   LaxFault fault = LaxFault::None)
{
    detail::check_gamma(x, gamma);
    const int n = x.n();
    const auto& basis = x.basis();
    const Matrix<T> l = x.l_hat();
    const Matrix<T> w = detail::antisymmetric_from_rotation_part<T>(basis, v);
    Matrix<T> d = project_A(-(w * l + l * w));
    std::span<const T> dp0 = v.subspan(basis.rotation_count, static_cast<std::size_t>(n));
    Matrix<T> sym = detail::symmetric_outer<T>(gamma, dp0);
    if (fault == LaxFault::FlipOuterProductSign) {
        d -= sym;
    } else {
        d += sym;
    }
    return d;
}

/// dL/dx_alpha.
template <typename T>
Matrix<T> dL_dx(const PhaseState<T>& x, std::span<const T> gamma, std::size_t alpha,
                LaxFault fault = LaxFault::None)
{
    Vector<T> e(x.dim(), T(0));
    e.at(alpha) = T(1);
    return directional_derivative_L<T>(x, gamma, e, fault);
}

/// Entrywise {H, L_jk}, i.e. dL/dt along the flow of H.
template <typename T>
Matrix<T> evolve_L(const StructureTensor& C, const PhaseState<T>& x, const HamiltonianSpec<T>& spec,
                   LaxFault fault = LaxFault::None)
{
    if (spec.mode == Mode::Lagrange) throw std::invalid_argument("no Lax pair is claimed for the Lagrange mode");
    auto dH = energy_gradient(spec, x);
    auto xdot = vector_field_from_gradient<T>(C, x, dH);
    return directional_derivative_L<T>(x, spec.gamma, xdot, fault);
}

/// R = {H, L} - [L, M].
template <typename T>
Matrix<T> lax_residual(const StructureTensor& C, const PhaseState<T>& x, const HamiltonianSpec<T>& spec, const T& c,
                       LaxFault fault = LaxFault::None)
{
    Matrix<T> L = build_L<T>(x, spec.gamma, fault);
    Matrix<T> M = build_M(x, c);
    return evolve_L(C, x, spec, fault) - commutator(L, M);
}

template <typename T>
Matrix<T> lax_residual(const PhaseState<T>& x, const HamiltonianSpec<T>& spec, const T& c,
                       LaxFault fault = LaxFault::None)
{
    return lax_residual(structure_constants(x.n()), x, spec, c, fault);
}

/// [I_2, I_4, ..., I_{2 k_max}] with I_{2k} = tr(L^k) / k.
template <typename T>
Vector<T> spectral_invariants(const Matrix<T>& L, int k_max)
{
    if (k_max < 1 || static_cast<std::size_t>(k_max) > L.rows()) {
        throw std::invalid_argument("k_max must lie in [1, n]");
    }
    Vector<T> out;
    Matrix<T> power = L;
    for (int k = 1; k <= k_max; ++k) {
        if (k > 1) power = power * L;
        out.push_back(power.trace() / T(k));
    }
    return out;
}

/// dI_{2k}/dx_alpha = tr(L^{k-1} dL/dx_alpha).
template <typename T>
Vector<T> spectral_invariant_gradient(const PhaseState<T>& x, std::span<const T> gamma, int k)
{
    if (k < 1 || k > x.n()) throw std::invalid_argument("invariant index k must lie in [1, n]");
    const Matrix<T> L = build_L<T>(x, gamma);
    Matrix<T> power = Matrix<T>::identity(L.rows());
    for (int i = 1; i < k; ++i) power = power * L;
    Vector<T> g(x.dim(), T(0));
    for (std::size_t a = 0; a < x.dim(); ++a) {
        if (a == x.basis().translation_index(x.n())) continue;  // p_{n+1} does not enter L
        g[a] = (power * dL_dx<T>(x, gamma, a)).trace();
    }
    return g;
}

template <typename T>
GradientFn<T> spectral_gradient_fn(Vector<T> gamma, int k)
{
    return [gamma = std::move(gamma), k](const PhaseState<T>& x) {
        return spectral_invariant_gradient<T>(x, gamma, k);
    };
}

/// Eigenvalues of a symmetric matrix, ascending.
template <typename T>
std::vector<double> sorted_eigenvalues(const Matrix<T>& L)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(L), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    std::vector<double> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Random exact trials.

/// Independent generator for one trial; results do not depend on scheduling.
inline std::mt19937_64 trial_rng(std::uint64_t seed, int n, int trial)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(trial)};
    return std::mt19937_64(seq);
}

template <typename Rng>
Vector<Rational> random_gamma(int n, Rng& rng)
{
    Vector<Rational> g;
    bool nonzero = false;
    while (!nonzero) {
        g.clear();
        for (int j = 0; j < n; ++j) {
            g.push_back(random_scalar<Rational>(rng));
            nonzero = nonzero || !g.back().is_zero();
        }
    }
    return g;
}

struct TrialPoint
{
    PhaseState<Rational> state;
    Vector<Rational> gamma;
};

inline TrialPoint make_trial_point(int n, std::uint64_t seed, int trial)
{
    auto rng = trial_rng(seed, n, trial);
    TrialPoint t;
    t.state = random_state<Rational>(n, rng);
    t.gamma = random_gamma(n, rng);
    return t;
}

/// Worker count from KOWALEVSKAYA_THREADS, else the hardware concurrency.
inline unsigned worker_count()
{
    if (const char* env = std::getenv("KOWALEVSKAYA_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v >= 1) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on worker_count() threads.
template <typename Body>
void parallel_for(int count, Body&& body)
{
    const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max(count, 1)));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = static_cast<int>(w); i < count; i += static_cast<int>(workers)) body(i);
        });
    }
}

struct CalibrationResult
{
    std::optional<Rational> c;
    std::string message;
    std::optional<TrialPoint> witness;  // first point no constant fits
};

/// Finds the rational c with {H, L} = [L, c l] at `trials` random rational
/// points. H is the general (alpha, beta) Hamiltonian; (1, 1/2) is the
/// Kowalevskaya case.
inline CalibrationResult calibrate_c(int n, int trials, std::uint64_t seed, const Rational& alpha = Rational(1),
                                     const Rational& beta = Rational(1, 2), LaxFault fault = LaxFault::None)
{
    if (n < 2) throw std::invalid_argument("calibrate_c: n must be at least 2");
    if (trials < 10) throw std::invalid_argument("calibrate_c: at least 10 trials are required");
    const StructureTensor C(n);

    struct Sample
    {
        TrialPoint point;
        Matrix<Rational> ldot;
        Matrix<Rational> kernel;  // [L, l]
    };
    std::vector<Sample> samples(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int i) {
        Sample s;
        s.point = make_trial_point(n, seed, i);
        auto spec = general_spec<Rational>(alpha, beta, s.point.gamma);
        s.ldot = evolve_L(C, s.point.state, spec, fault);
        Matrix<Rational> L = build_L<Rational>(s.point.state, s.point.gamma, fault);
        s.kernel = commutator(L, project_A(s.point.state.l_hat()));
        samples[static_cast<std::size_t>(i)] = std::move(s);
    });

    auto fits = [&](const Rational& c) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (!(samples[i].ldot - c * samples[i].kernel).is_zero()) return i;
        return std::nullopt;
    };

    CalibrationResult result;
    for (const Rational& c : {Rational(1), Rational(-1), Rational(2), Rational(-2), Rational(1, 2), Rational(-1, 2)}) {
        if (!fits(c)) {
            result.c = c;
            result.message = "matched candidate";
            return result;
        }
    }

    // One-parameter exact least squares on the first informative trial, then
    // confirm on every trial.
    for (const auto& s : samples) {
        Rational kk = frobenius_norm_squared(s.kernel);
        if (kk.is_zero()) continue;
        Rational lk(0);
        for (std::size_t j = 0; j < s.kernel.rows(); ++j)
            for (std::size_t k = 0; k < s.kernel.cols(); ++k) lk += s.ldot(j, k) * s.kernel(j, k);
        Rational c = lk / kk;
        auto bad = fits(c);
        if (!bad) {
            result.c = c;
            result.message = "exact linear solve";
            return result;
        }
        result.message = "no constant Lax multiplier";
        result.witness = samples[*bad].point;
        return result;
    }
    result.message = "no constant Lax multiplier";
    if (!samples.empty()) result.witness = samples.front().point;
    return result;
}

// ---------------------------------------------------------------------------
// Polynomial identity certificate.

struct PitCertificate
{
    int n = 0;
    Rational c{0};
    int trials = 0;
    std::uint64_t seed = 0;
    bool passed = false;
    std::vector<bool> trial_zero;  // per trial: residual exactly zero
    std::optional<TrialPoint> witness;
    std::optional<Matrix<Rational>> witness_residual;
};

/// Certifies {H, L} = [L, M] for the Kowalevskaya Hamiltonian at `trials`
/// random rational points. Coordinates are num/den with |num| <= 1000 and
/// den <= 997, so the sampling set dwarfs the degree (3) of the identity.
inline PitCertificate pit_verify(int n, int trials, std::uint64_t seed, const Rational& c,
                                 LaxFault fault = LaxFault::None)
{
    if (n < 2) throw std::invalid_argument("pit_verify: n must be at least 2");
    if (trials < 1) throw std::invalid_argument("pit_verify: trials must be positive");
    const StructureTensor C(n);
    PitCertificate cert;
    cert.n = n;
    cert.c = c;
    cert.trials = trials;
    cert.seed = seed;
    std::vector<char> zero(static_cast<std::size_t>(trials), 0);
    std::vector<std::optional<Matrix<Rational>>> residuals(static_cast<std::size_t>(trials));
    parallel_for(trials, [&](int i) {
        TrialPoint t = make_trial_point(n, seed, i);
        auto spec = kowalevskaya_spec<Rational>(t.gamma);
        Matrix<Rational> r = lax_residual(C, t.state, spec, c, fault);
        zero[static_cast<std::size_t>(i)] = r.is_zero() ? 1 : 0;
        if (!r.is_zero()) residuals[static_cast<std::size_t>(i)] = std::move(r);
    });
    cert.passed = true;
    for (int i = 0; i < trials; ++i) {
        bool z = zero[static_cast<std::size_t>(i)] != 0;
        cert.trial_zero.push_back(z);
        if (!z && cert.passed) {
            cert.passed = false;
            cert.witness = make_trial_point(n, seed, i);
            cert.witness_residual = residuals[static_cast<std::size_t>(i)];
        }
    }
    return cert;
}

// ---------------------------------------------------------------------------
// JSON encoding of exact data.

inline nlohmann::json rationals_to_json(std::span<const Rational> v)
{
    nlohmann::json a = nlohmann::json::array();
    for (const auto& q : v) a.push_back(rational_to_string(q));
    return a;
}

inline nlohmann::json matrix_to_json(const Matrix<Rational>& m)
{
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(rationals_to_json(m.row(i)));
    return rows;
}

inline nlohmann::json witness_to_json(const TrialPoint& t)
{
    nlohmann::json w;
    w["coordinates"] = nlohmann::json::object();
    auto names = t.state.basis().coordinate_names();
    for (std::size_t a = 0; a < names.size(); ++a) w["coordinates"][names[a]] = rational_to_string(t.state[a]);
    w["gamma"] = rationals_to_json(t.gamma);
    return w;
}

inline nlohmann::json to_json(const PitCertificate& cert)
{
    nlohmann::json j;
    j["n"] = cert.n;
    j["c"] = rational_to_string(cert.c);
    j["trials"] = cert.trials;
    j["seed"] = cert.seed;
    j["status"] = cert.passed ? "pass" : "fail";
    int zeros = 0;
    for (bool z : cert.trial_zero) zeros += z ? 1 : 0;
    j["zero_residual_trials"] = zeros;
    if (cert.witness) {
        j["witness"] = witness_to_json(*cert.witness);
        if (cert.witness_residual) j["witness"]["residual"] = matrix_to_json(*cert.witness_residual);
    }
    return j;
}

} // namespace kowalevskaya

#endif // KOWALEVSKAYA_LAX_HPP_

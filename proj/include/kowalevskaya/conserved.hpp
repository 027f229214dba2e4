#ifndef KOWALEVSKAYA_CONSERVED_HPP_
#define KOWALEVSKAYA_CONSERVED_HPP_

// Conserved quantities beyond the spectrum of L: linear integrals of the
// stabilizer of gamma, Casimir samples, involution/independence testers and
// drift reports along numerical trajectories.

#include "flow.hpp"
#include "lax.hpp"
#include "models.hpp"
#include "poisson.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace kowalevskaya {

template <typename T>
struct StabilizerBasis
{
    std::vector<Matrix<T>> generators;  // n x n antisymmetric, X gamma = 0

    std::size_t count() const { return generators.size(); }

    /// Generator embedded in so(n+1) with a zero last row and column.
    Matrix<T> extended(std::size_t i) const
    {
        const Matrix<T>& X = generators.at(i);
        Matrix<T> e(X.rows() + 1, X.cols() + 1);
        for (std::size_t a = 0; a < X.rows(); ++a)
            for (std::size_t b = 0; b < X.cols(); ++b) e(a, b) = X(a, b);
        return e;
    }
};

/// Basis of {X in so(n) : X gamma = 0}: wedge products v_a ^ v_b of an
/// orthogonal (unnormalised) basis v_1..v_{n-1} of the complement of gamma.
template <typename T>
StabilizerBasis<T> stabilizer_basis(std::span<const T> gamma)
{
    const std::size_t n = gamma.size();
    bool nonzero = false;
    for (const auto& g : gamma) nonzero = nonzero || !is_zero(g);
    if (!nonzero) throw std::invalid_argument("stabilizer_basis: gamma must be nonzero (use the Lagrange mode)");

    std::vector<Vector<T>> ortho{Vector<T>(gamma.begin(), gamma.end())};
    for (std::size_t i = 0; i < n && ortho.size() < n; ++i) {
        Vector<T> v(n, T(0));
        v[i] = T(1);
        for (const auto& u : ortho) {
            const T coeff = dot<T>(v, u) / dot<T>(u, u);
            for (std::size_t k = 0; k < n; ++k) v[k] -= coeff * u[k];
        }
        // Drop numerically dependent candidates in floating point.
        T norm2 = dot<T>(v, v);
        if constexpr (is_exact_v<T>) {
            if (is_zero(norm2)) continue;
        } else {
            if (!(norm2 > T(1e-24))) continue;
        }
        ortho.push_back(std::move(v));
    }

    StabilizerBasis<T> basis;
    for (std::size_t a = 1; a < ortho.size(); ++a)
        for (std::size_t b = a + 1; b < ortho.size(); ++b) {
            Matrix<T> w = outer<T>(ortho[a], ortho[b]);
            basis.generators.push_back(w - w.transpose());
        }
    return basis;
}

/// J_X(x) = 1/2 sum_{j,k <= n} l_jk X_jk.
template <typename T>
T linear_integral(const Matrix<T>& X, const PhaseState<T>& x)
{
    const int n = x.n();
    if (X.rows() != static_cast<std::size_t>(n) || X.cols() != X.rows()) {
        throw std::invalid_argument("generator must be n x n");
    }
    T s(0);
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) s += x.l(j, k) * X(j, k);
    return s;
}

template <typename T>
GradientFn<T> linear_integral_gradient(Matrix<T> X)
{
    return [X = std::move(X)](const PhaseState<T>& x) {
        Vector<T> g(x.dim(), T(0));
        for (int j = 0; j < x.n(); ++j)
            for (int k = j + 1; k < x.n(); ++k) g[x.basis().rotation_index(j, k)] = X(j, k);
        return g;
    };
}

/// |p|^2, a Casimir for every n.
template <typename T>
T p_norm_squared(const PhaseState<T>& x)
{
    T s(0);
    for (int m = 0; m <= x.n(); ++m) s += x.p(m) * x.p(m);
    return s;
}

template <typename T>
Vector<T> p_norm_squared_gradient(const PhaseState<T>& x)
{
    Vector<T> g(x.dim(), T(0));
    for (int m = 0; m <= x.n(); ++m) g[x.basis().translation_index(m)] = T(2) * x.p(m);
    return g;
}

/// The second Casimir of e(3)*, l_12 p_3 - l_13 p_2 + l_23 p_1 (n = 2 only).
template <typename T>
T l_dot_p(const PhaseState<T>& x)
{
    if (x.n() != 2) throw std::invalid_argument("l_dot_p is defined for n = 2 only");
    return x.l(0, 1) * x.p(2) - x.l(0, 2) * x.p(1) + x.l(1, 2) * x.p(0);
}

template <typename T>
Vector<T> l_dot_p_gradient(const PhaseState<T>& x)
{
    if (x.n() != 2) throw std::invalid_argument("l_dot_p is defined for n = 2 only");
    const auto& b = x.basis();
    Vector<T> g(x.dim(), T(0));
    g[b.rotation_index(0, 1)] = x.p(2);
    g[b.rotation_index(0, 2)] = -x.p(1);
    g[b.rotation_index(1, 2)] = x.p(0);
    g[b.translation_index(0)] = x.l(1, 2);
    g[b.translation_index(1)] = -x.l(0, 2);
    g[b.translation_index(2)] = x.l(0, 1);
    return g;
}

/// Entry (a, b) = {Q_a, Q_b}(x).
template <typename T>
Matrix<T> involution_matrix(const StructureTensor& C, std::span<const GradientFn<T>> quantities,
                            const PhaseState<T>& x)
{
    const Matrix<T> pi = poisson_tensor(C, x);
    std::vector<Vector<T>> grads;
    for (const auto& q : quantities) grads.push_back(q(x));
    const std::size_t m = grads.size();
    Matrix<T> out(m, m);
    for (std::size_t a = 0; a < m; ++a) {
        const Vector<T> pg = pi * std::span<const T>(grads[a]);
        for (std::size_t b = 0; b < m; ++b) {
            if (a == b) continue;
            // {Q_b, Q_a} = grad_b^T Pi grad_a
            out(b, a) = dot<T>(grads[b], pg);
        }
    }
    return out;
}

template <typename T>
Matrix<T> involution_matrix(std::span<const GradientFn<T>> quantities, const PhaseState<T>& x)
{
    return involution_matrix(structure_constants(x.n()), quantities, x);
}

/// Numerical rank of the stacked gradients. Rows are normalised first, since
/// the invariants have very different polynomial degrees. A point where some
/// gradient vanishes is reported as degenerate.
inline RankResult independence_rank(std::span<const GradientFn<double>> quantities, const PhaseState<double>& x,
                                    const RankTolerance& tol = {})
{
    const auto m = static_cast<Eigen::Index>(quantities.size());
    Eigen::MatrixXd g(m, static_cast<Eigen::Index>(x.dim()));
    std::vector<double> norms;
    for (Eigen::Index a = 0; a < m; ++a) {
        auto grad = quantities[static_cast<std::size_t>(a)](x);
        for (std::size_t b = 0; b < grad.size(); ++b) g(a, static_cast<Eigen::Index>(b)) = grad[b];
        norms.push_back(g.row(a).norm());
    }
    // Rows of different polynomial degree are not comparable in size, so only
    // an exactly vanishing gradient marks the point degenerate.
    bool vanishing = m == 0;
    for (Eigen::Index a = 0; a < m; ++a) {
        const double nrm = norms[static_cast<std::size_t>(a)];
        if (!(nrm > 0.0) || !std::isfinite(nrm)) {
            vanishing = true;
        } else {
            g.row(a) /= nrm;
        }
    }
    // Rank of the gradient span, so transpose to count independent rows.
    RankResult r = numerical_rank(g.transpose(), tol);
    r.corank = static_cast<int>(m) - r.rank;
    if (vanishing) r.degenerate = true;
    return r;
}

/// The spectral family I_2, ..., I_{2n} as gradient functions.
template <typename T>
std::vector<GradientFn<T>> spectral_family(const Vector<T>& gamma)
{
    std::vector<GradientFn<T>> out;
    for (int k = 1; k <= static_cast<int>(gamma.size()); ++k) out.push_back(spectral_gradient_fn<T>(gamma, k));
    return out;
}

// ---------------------------------------------------------------------------
// Drift monitoring.

struct ConservedQuantity
{
    std::string name;
    std::function<double(const PhaseState<double>&)> value;
};

/// Quantities conserved by the flow of `spec` at rank n.
///   all modes:        H, |p|^2 (and l.p for n = 2)
///   kowalevskaya:     I_4..I_2n, sorted eigenvalues of L, stabilizer integrals
///   general:          stabilizer integrals
///   lagrange:         the n(n-1)/2 so(n) momenta l_jk, j < k <= n
inline std::vector<ConservedQuantity> registered_quantities(const HamiltonianSpec<double>& spec, int n)
{
    std::vector<ConservedQuantity> q;
    q.push_back({"H", [spec](const PhaseState<double>& x) { return energy(spec, x); }});
    if (spec.mode == Mode::Kowalevskaya) {
        for (int k = 2; k <= n; ++k) {
            q.push_back({"I_" + std::to_string(2 * k), [g = spec.gamma, k](const PhaseState<double>& x) {
                             return spectral_invariants<double>(build_L<double>(x, g), k).back();
                         }});
        }
        for (int i = 0; i < n; ++i) {
            q.push_back({"eig_" + std::to_string(i + 1), [g = spec.gamma, i](const PhaseState<double>& x) {
                             return sorted_eigenvalues(build_L<double>(x, g))[static_cast<std::size_t>(i)];
                         }});
        }
    }
    if (spec.mode != Mode::Lagrange) {
        auto stab = stabilizer_basis<double>(spec.gamma);
        for (std::size_t i = 0; i < stab.count(); ++i) {
            q.push_back({"J_" + std::to_string(i + 1),
                         [X = stab.generators[i]](const PhaseState<double>& x) { return linear_integral(X, x); }});
        }
    } else {
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                q.push_back({"m_" + std::to_string(j + 1) + "_" + std::to_string(k + 1),
                             [j, k](const PhaseState<double>& x) { return x.l(j, k); }});
            }
    }
    q.push_back({"p_norm2", [](const PhaseState<double>& x) { return p_norm_squared(x); }});
    if (n == 2) q.push_back({"l_dot_p", [](const PhaseState<double>& x) { return l_dot_p(x); }});
    return q;
}

struct QuantitySummary
{
    std::string name;
    double initial = 0.0;
    double max_abs_drift = 0.0;
    double max_rel_drift = 0.0;
    double mean_rel_drift = 0.0;
};

struct DriftReport
{
    std::vector<std::string> names;
    std::vector<double> times;
    std::vector<std::vector<double>> values;     // [sample][quantity]
    std::vector<std::vector<double>> abs_drift;  // |Q(t) - Q(0)|
    std::vector<std::vector<double>> rel_drift;
    std::vector<QuantitySummary> summary;

    double max_relative_drift() const
    {
        double m = 0.0;
        for (const auto& s : summary) m = std::max(m, s.max_rel_drift);
        return m;
    }

    const QuantitySummary& find(const std::string& name) const
    {
        for (const auto& s : summary)
            if (s.name == name) return s;
        throw std::out_of_range("no conserved quantity named '" + name + "'");
    }
};

/// Relative drift divides by |Q(0)|; when |Q(0)| < 1e-12 the absolute drift
/// is reported instead.
inline double relative_drift(double q0, double q)
{
    const double d = std::fabs(q - q0);
    return std::fabs(q0) < 1e-12 ? d : d / std::fabs(q0);
}

inline DriftReport drift_report(std::span<const double> times, std::span<const PhaseState<double>> states,
                                const HamiltonianSpec<double>& spec)
{
    DriftReport r;
    if (states.empty()) return r;
    const int n = states.front().n();
    auto quantities = registered_quantities(spec, n);
    for (const auto& q : quantities) r.names.push_back(q.name);
    r.times.assign(times.begin(), times.end());
    r.summary.resize(quantities.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
        std::vector<double> v, ad, rd;
        for (std::size_t i = 0; i < quantities.size(); ++i) {
            v.push_back(quantities[i].value(states[s]));
            const double q0 = s == 0 ? v.back() : r.values.front()[i];
            ad.push_back(std::fabs(v.back() - q0));
            rd.push_back(relative_drift(q0, v.back()));
        }
        r.values.push_back(std::move(v));
        r.abs_drift.push_back(std::move(ad));
        r.rel_drift.push_back(std::move(rd));
    }
    for (std::size_t i = 0; i < quantities.size(); ++i) {
        auto& qs = r.summary[i];
        qs.name = quantities[i].name;
        qs.initial = r.values.front()[i];
        double sum = 0.0;
        for (std::size_t s = 0; s < states.size(); ++s) {
            qs.max_abs_drift = std::max(qs.max_abs_drift, r.abs_drift[s][i]);
            qs.max_rel_drift = std::max(qs.max_rel_drift, r.rel_drift[s][i]);
            sum += r.rel_drift[s][i];
        }
        qs.mean_rel_drift = sum / static_cast<double>(states.size());
    }
    return r;
}

inline DriftReport drift_report(const Trajectory& traj, const HamiltonianSpec<double>& spec)
{
    return drift_report(traj.times, traj.states, spec);
}

} // namespace kowalevskaya

#endif // KOWALEVSKAYA_CONSERVED_HPP_

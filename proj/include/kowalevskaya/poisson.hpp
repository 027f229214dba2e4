#ifndef KOWALEVSKAYA_POISSON_HPP_
#define KOWALEVSKAYA_POISSON_HPP_

// Lie-Poisson structure of e(n+1)*.
//
// Conventions (used everywhere in the library):
//   * generators are realised as (n+2)x(n+2) affine matrices: the rotation
//     e_jk = E_jk - E_kj in the upper-left block, the translation e_m as the
//     column vector in the last column;
//   * [e_a, e_b] = C^c_ab e_c is the matrix commutator;
//   * {f, g}(x) = C^c_ab x_c df/dx_a dg/dx_b = grad(f)^T Pi(x) grad(g);
//   * equations of motion are dx_a/dt = {H, x_a}, Hamiltonian in the first slot.

#include "algebra.hpp"

#include <Eigen/SVD>

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kowalevskaya {

/// Cotangent vector (df/dx_a in canonical order) of a function at a point.
template <typename T>
using GradientFn = std::function<Vector<T>(const PhaseState<T>&)>;

struct StructureTerm
{
    std::size_t gamma;
    int coeff;
};

class StructureTensor
{
public:
    StructureTensor() = default;

    explicit StructureTensor(int n) : basis_(build_basis(n)), entries_(basis_.total_dim * basis_.total_dim)
    {
        const std::size_t D = basis_.total_dim;
        std::vector<Matrix<int>> generators;
        generators.reserve(D);
        for (std::size_t a = 0; a < D; ++a) generators.push_back(generator(a));
        for (std::size_t a = 0; a < D; ++a) {
            for (std::size_t b = 0; b < D; ++b) {
                Matrix<int> c = commutator(generators[a], generators[b]);
                auto coords = coordinates(c);
                for (std::size_t g = 0; g < D; ++g) {
                    if (coords[g] != 0) {
                        entries_[a * D + b].push_back({g, coords[g]});
                        ++nonzeros_;
                    }
                }
            }
        }
    }

    int n() const { return basis_.n; }
    std::size_t dim() const { return basis_.total_dim; }
    const BasisIndex& basis() const { return basis_; }
    std::size_t nonzeros() const { return nonzeros_; }

    /// Nonzero C^gamma_{alpha beta}, as (gamma, coefficient) pairs.
    const std::vector<StructureTerm>& terms(std::size_t alpha, std::size_t beta) const
    {
        return entries_[alpha * dim() + beta];
    }

    int coefficient(std::size_t alpha, std::size_t beta, std::size_t gamma) const
    {
        for (const auto& t : terms(alpha, beta))
            if (t.gamma == gamma) return t.coeff;
        return 0;
    }

    /// Affine (n+2)x(n+2) matrix of the basis element alpha.
    Matrix<int> generator(std::size_t alpha) const
    {
        const std::size_t N = static_cast<std::size_t>(basis_.n) + 1;
        Matrix<int> m(N + 1, N + 1);
        if (basis_.is_rotation(alpha)) {
            auto [j, k] = basis_.rotation_pairs[alpha];
            m(j, k) = 1;
            m(k, j) = -1;
        } else {
            m(alpha - basis_.rotation_count, N) = 1;
        }
        return m;
    }

private:
    std::vector<int> coordinates(const Matrix<int>& m) const
    {
        const std::size_t N = static_cast<std::size_t>(basis_.n) + 1;
        std::vector<int> c(dim(), 0);
        for (std::size_t a = 0; a < basis_.rotation_count; ++a) {
            auto [j, k] = basis_.rotation_pairs[a];
            c[a] = m(j, k);
        }
        for (std::size_t i = 0; i < N; ++i) c[basis_.rotation_count + i] = m(i, N);
        return c;
    }

    BasisIndex basis_;
    std::vector<std::vector<StructureTerm>> entries_;
    std::size_t nonzeros_ = 0;
};

inline StructureTensor structure_constants(int n) { return StructureTensor(n); }

/// Pi_ab(x) = C^c_ab x_c.
template <typename T>
Matrix<T> poisson_tensor(const StructureTensor& C, const PhaseState<T>& x)
{
    if (C.n() != x.n()) throw std::invalid_argument("structure tensor and state disagree on n");
    const std::size_t D = C.dim();
    Matrix<T> pi(D, D);
    for (std::size_t a = 0; a < D; ++a)
        for (std::size_t b = 0; b < D; ++b)
            for (const auto& t : C.terms(a, b)) pi(a, b) += T(t.coeff) * x[t.gamma];
    return pi;
}

template <typename T>
Matrix<T> poisson_tensor(const PhaseState<T>& x)
{
    return poisson_tensor(structure_constants(x.n()), x);
}

/// {f, g} from precomputed gradients, via the Poisson tensor.
template <typename T>
T bracket_of_gradients(const Matrix<T>& pi, std::span<const T> df, std::span<const T> dg)
{
    return dot<T>(df, pi * dg);
}

/// {f, g} from precomputed gradients, summing structure constants directly.
template <typename T>
T bracket_by_structure_constants(const StructureTensor& C, const PhaseState<T>& x, std::span<const T> df,
                                 std::span<const T> dg)
{
    const std::size_t D = C.dim();
    T s(0);
    for (std::size_t a = 0; a < D; ++a) {
        if (is_zero(df[a])) continue;
        for (std::size_t b = 0; b < D; ++b) {
            if (is_zero(dg[b])) continue;
            for (const auto& t : C.terms(a, b)) s += T(t.coeff) * x[t.gamma] * df[a] * dg[b];
        }
    }
    return s;
}

template <typename T>
T bracket(const StructureTensor& C, const GradientFn<T>& f, const GradientFn<T>& g, const PhaseState<T>& x)
{
    auto df = f(x);
    auto dg = g(x);
    return bracket_of_gradients<T>(poisson_tensor(C, x), df, dg);
}

template <typename T>
T bracket(const GradientFn<T>& f, const GradientFn<T>& g, const PhaseState<T>& x)
{
    return bracket(structure_constants(x.n()), f, g, x);
}

/// Gradient of the coordinate function x_alpha.
template <typename T>
GradientFn<T> coordinate_gradient(std::size_t alpha)
{
    return [alpha](const PhaseState<T>& x) {
        Vector<T> g(x.dim(), T(0));
        g.at(alpha) = T(1);
        return g;
    };
}

/// dx_a/dt = {H, x_a} = sum_b dH/dx_b Pi_ba, given dH.
template <typename T>
Vector<T> vector_field_from_gradient(const StructureTensor& C, const PhaseState<T>& x, std::span<const T> dH)
{
    const std::size_t D = C.dim();
    Vector<T> v(D, T(0));
    for (std::size_t b = 0; b < D; ++b) {
        if (is_zero(dH[b])) continue;
        for (std::size_t a = 0; a < D; ++a)
            for (const auto& t : C.terms(b, a)) v[a] += T(t.coeff) * dH[b] * x[t.gamma];
    }
    return v;
}

template <typename T>
Vector<T> vector_field(const StructureTensor& C, const GradientFn<T>& H, const PhaseState<T>& x)
{
    auto dH = H(x);
    return vector_field_from_gradient<T>(C, x, dH);
}

template <typename T>
Vector<T> vector_field(const GradientFn<T>& H, const PhaseState<T>& x)
{
    return vector_field(structure_constants(x.n()), H, x);
}

// ---------------------------------------------------------------------------
// Numerical rank with the shared tolerance policy.

struct RankTolerance
{
    double nominal = 1e-10;
    std::array<double, 3> sweep{1e-8, 1e-10, 1e-12};
};

struct RankResult
{
    int rank = 0;
    int corank = 0;
    bool degenerate = false;
    double sigma_max = 0.0;
    std::vector<double> singular_values;
};

/// Singular values below tol * sigma_max count as zero. The rank is reported
/// as degenerate when it changes anywhere in the tolerance sweep or when the
/// matrix vanishes.
inline RankResult numerical_rank(const Eigen::MatrixXd& m, const RankTolerance& tol = {})
{
    RankResult r;
    const int cols = static_cast<int>(m.cols());
    if (m.size() == 0) {
        r.corank = cols;
        r.degenerate = true;
        return r;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd& s = svd.singularValues();
    r.singular_values.assign(s.data(), s.data() + s.size());
    r.sigma_max = s.size() > 0 ? s(0) : 0.0;
    auto count = [&](double rel) {
        int k = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > rel * r.sigma_max) ++k;
        return k;
    };
    if (!(r.sigma_max > 0.0)) {
        r.rank = 0;
        r.corank = cols;
        r.degenerate = true;
        return r;
    }
    r.rank = count(tol.nominal);
    r.corank = cols - r.rank;
    for (double t : tol.sweep)
        if (count(t) != r.rank) r.degenerate = true;
    return r;
}

/// Corank of Pi(x). Besides the tolerance sweep, a point whose rank falls
/// below the rank at a fixed pseudo-random reference point is flagged as
/// degenerate (it lies on a singular stratum, e.g. p = 0).
inline RankResult casimir_corank(const StructureTensor& C, const PhaseState<double>& x, const RankTolerance& tol = {})
{
    RankResult r = numerical_rank(to_eigen(poisson_tensor(C, x)), tol);
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL + static_cast<unsigned>(C.n()));
    auto reference = random_state<double>(C.n(), rng);
    RankResult ref = numerical_rank(to_eigen(poisson_tensor(C, reference)), tol);
    if (r.rank < ref.rank) r.degenerate = true;
    return r;
}

inline RankResult casimir_corank(const PhaseState<double>& x, const RankTolerance& tol = {})
{
    return casimir_corank(structure_constants(x.n()), x, tol);
}

} // namespace kowalevskaya

#endif // KOWALEVSKAYA_POISSON_HPP_

#ifndef KOWALEVSKAYA_ALGEBRA_HPP_
#define KOWALEVSKAYA_ALGEBRA_HPP_

// Coordinates on the dual of the Euclidean algebra e(n+1) = so(n+1) + R^{n+1}.
//
// Canonical flat basis: the rotation coordinates l_jk (j < k, lexicographic)
// come first, followed by the translation coordinates p_1..p_{n+1}. All
// indices in code are zero-based; names printed for humans are one-based.
//
// Block split of a state for the subgroup SO(n) fixing the last axis:
//   l_block  -- l_jk with j,k < n           (dimension n(n-1)/2)
//   n_vec    -- l_{j,n} for j < n           (dimension n)
//   p0       -- p_0..p_{n-1}                (dimension n)
//   t        -- p_n                         (dimension 1)

#include "matrix.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kowalevskaya {

struct BasisIndex
{
    int n = 0;
    std::vector<std::pair<int, int>> rotation_pairs;
    std::size_t rotation_count = 0;
    std::size_t total_dim = 0;

    int ambient_dim() const { return n + 1; }

    std::size_t rotation_index(int j, int k) const
    {
        if (j == k || j < 0 || k < 0 || j > n || k > n) {
            throw std::out_of_range("rotation index out of range");
        }
        if (j > k) std::swap(j, k);
        const std::size_t N = static_cast<std::size_t>(n) + 1;
        const auto uj = static_cast<std::size_t>(j);
        return uj * N - uj * (uj + 1) / 2 + static_cast<std::size_t>(k - j - 1);
    }

    std::size_t translation_index(int m) const
    {
        if (m < 0 || m > n) throw std::out_of_range("translation index out of range");
        return rotation_count + static_cast<std::size_t>(m);
    }

    bool is_rotation(std::size_t alpha) const { return alpha < rotation_count; }

    /// One-based coordinate names in canonical order, e.g. "l_1_2", "p_3".
    std::vector<std::string> coordinate_names() const
    {
        std::vector<std::string> names;
        names.reserve(total_dim);
        for (auto [j, k] : rotation_pairs) {
            names.push_back("l_" + std::to_string(j + 1) + "_" + std::to_string(k + 1));
        }
        for (int m = 0; m <= n; ++m) names.push_back("p_" + std::to_string(m + 1));
        return names;
    }
};

inline BasisIndex build_basis(int n)
{
    if (n < 2) throw std::invalid_argument("rank parameter n must be at least 2, got " + std::to_string(n));
    BasisIndex b;
    b.n = n;
    for (int j = 0; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k) b.rotation_pairs.emplace_back(j, k);
    b.rotation_count = b.rotation_pairs.size();
    b.total_dim = b.rotation_count + static_cast<std::size_t>(n) + 1;
    return b;
}

/// A point of e(n+1)*. Only the strictly upper triangle of l_hat is stored, so
/// antisymmetry cannot be violated.
template <typename T>
class PhaseState
{
public:
    PhaseState() = default;

    explicit PhaseState(int n) : basis_(build_basis(n)), coords_(basis_.total_dim, T(0)) {}

    PhaseState(int n, Vector<T> coords) : basis_(build_basis(n)), coords_(std::move(coords))
    {
        if (coords_.size() != basis_.total_dim) {
            throw std::invalid_argument("state has " + std::to_string(coords_.size()) +
                                        " coordinates, expected " + std::to_string(basis_.total_dim));
        }
    }

    int n() const { return basis_.n; }
    const BasisIndex& basis() const { return basis_; }
    std::size_t dim() const { return coords_.size(); }

    std::span<const T> coords() const { return coords_; }
    T& operator[](std::size_t alpha) { return coords_[alpha]; }
    const T& operator[](std::size_t alpha) const { return coords_[alpha]; }

    /// l_jk with l_kj = -l_jk and l_jj = 0.
    T l(int j, int k) const
    {
        if (j == k) return T(0);
        const T& v = coords_[basis_.rotation_index(j, k)];
        return j < k ? v : T(-v);
    }

    /// Sets l_jk (and therefore l_kj = -value).
    void set_l(int j, int k, const T& value)
    {
        if (j == k) throw std::invalid_argument("diagonal of l_hat is identically zero");
        coords_[basis_.rotation_index(j, k)] = j < k ? value : T(-value);
    }

    const T& p(int m) const { return coords_[basis_.translation_index(m)]; }
    void set_p(int m, const T& value) { coords_[basis_.translation_index(m)] = value; }

    Vector<T> p_vector() const
    {
        return Vector<T>(coords_.begin() + static_cast<std::ptrdiff_t>(basis_.rotation_count), coords_.end());
    }

    /// The full antisymmetric (n+1)x(n+1) matrix l_hat.
    Matrix<T> l_hat() const
    {
        const int N = n() + 1;
        Matrix<T> m(N, N);
        for (std::size_t a = 0; a < basis_.rotation_count; ++a) {
            auto [j, k] = basis_.rotation_pairs[a];
            m(j, k) = coords_[a];
            m(k, j) = -coords_[a];
        }
        return m;
    }

    template <typename U>
    PhaseState<U> cast() const
    {
        Vector<U> c;
        c.reserve(coords_.size());
        for (const auto& v : coords_) c.push_back(scalar_cast<U>(v));
        return PhaseState<U>(n(), std::move(c));
    }

    friend bool operator==(const PhaseState& a, const PhaseState& b)
    {
        return a.n() == b.n() && a.coords_ == b.coords_;
    }

private:
    BasisIndex basis_;
    Vector<T> coords_;
};

template <typename T>
PhaseState<T> make_state(int n, const Matrix<T>& l_hat, std::span<const T> p)
{
    PhaseState<T> x(n);
    if (l_hat.rows() != static_cast<std::size_t>(n + 1) || l_hat.cols() != l_hat.rows()) {
        throw std::invalid_argument("l_hat must be (n+1)x(n+1)");
    }
    if (p.size() != static_cast<std::size_t>(n + 1)) throw std::invalid_argument("p must have n+1 entries");
    for (int j = 0; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k) {
            if (l_hat(j, k) != -l_hat(k, j)) throw std::invalid_argument("l_hat is not antisymmetric");
            x.set_l(j, k, l_hat(j, k));
        }
    for (int m = 0; m <= n; ++m) x.set_p(m, p[m]);
    return x;
}

template <typename T>
struct BlockView
{
    Matrix<T> l_block;  // n x n antisymmetric
    Vector<T> n_vec;    // l_{j,n+1}
    Vector<T> p0;       // p_1..p_n
    T t{0};             // p_{n+1}
};

template <typename T>
BlockView<T> decompose(const PhaseState<T>& x)
{
    const int n = x.n();
    BlockView<T> v;
    v.l_block = Matrix<T>(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) v.l_block(j, k) = x.l(j, k);
    v.n_vec.resize(n);
    v.p0.resize(n);
    for (int j = 0; j < n; ++j) {
        v.n_vec[j] = x.l(j, n);
        v.p0[j] = x.p(j);
    }
    v.t = x.p(n);
    return v;
}

template <typename T>
PhaseState<T> reassemble(const BlockView<T>& v)
{
    const int n = static_cast<int>(v.n_vec.size());
    if (v.l_block.rows() != static_cast<std::size_t>(n) || v.p0.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("inconsistent block sizes");
    }
    PhaseState<T> x(n);
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            if (v.l_block(j, k) != -v.l_block(k, j)) throw std::invalid_argument("l_block is not antisymmetric");
            x.set_l(j, k, v.l_block(j, k));
        }
        x.set_l(j, n, v.n_vec[j]);
        x.set_p(j, v.p0[j]);
    }
    x.set_p(n, v.t);
    return x;
}

/// The projector A onto the first n coordinates, applied on both sides:
/// returns the leading n x n block of an (n+1)x(n+1) matrix.
template <typename T>
Matrix<T> project_A(const Matrix<T>& m)
{
    if (m.rows() != m.cols() || m.rows() < 2) throw std::invalid_argument("project_A expects a square matrix");
    const std::size_t n = m.rows() - 1;
    Matrix<T> r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = m(i, j);
    return r;
}

/// The same projector as an (n+1)x(n+1) operator (zero last row and column).
template <typename T>
Matrix<T> project_A_padded(const Matrix<T>& m)
{
    if (m.rows() != m.cols() || m.rows() < 2) throw std::invalid_argument("project_A expects a square matrix");
    Matrix<T> r(m.rows(), m.cols());
    for (std::size_t i = 0; i + 1 < m.rows(); ++i)
        for (std::size_t j = 0; j + 1 < m.cols(); ++j) r(i, j) = m(i, j);
    return r;
}

/// E_jk - E_kj in dimension dim.
template <typename T>
Matrix<T> elementary_antisymmetric(std::size_t dim, int j, int k)
{
    Matrix<T> e(dim, dim);
    e(j, k) = T(1);
    e(k, j) = T(-1);
    return e;
}

/// Uniform random state with rational-valued coordinates (see random_scalar).
template <typename T, typename Rng>
PhaseState<T> random_state(int n, Rng& rng, std::int64_t num_bound = 1000, std::int64_t den_bound = 997)
{
    PhaseState<T> x(n);
    for (std::size_t a = 0; a < x.dim(); ++a) x[a] = random_scalar<T>(rng, num_bound, den_bound);
    return x;
}

} // namespace kowalevskaya

#endif // KOWALEVSKAYA_ALGEBRA_HPP_

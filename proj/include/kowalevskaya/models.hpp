#ifndef KOWALEVSKAYA_MODELS_HPP_
#define KOWALEVSKAYA_MODELS_HPP_

// Hamiltonians of Kowalevskaya type on e(n+1)*:
//
//   H = alpha * sum_{j<k<=n} l_jk^2 + beta * sum_j n_j^2 + V(p)
//
// with V(p) = gamma . (p_1..p_n) for the Kowalevskaya and general modes and
// V(p) = lagrange_coeff * p_{n+1} for the Lagrange mode. The Kowalevskaya mode
// fixes (alpha, beta) = (1, 1/2), which makes H = tr(L) / 2.

#include "algebra.hpp"
#include "poisson.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace kowalevskaya {

enum class Mode { Kowalevskaya, GeneralSymmetric, Lagrange };

inline std::string_view to_string(Mode m)
{
    switch (m) {
    case Mode::Kowalevskaya: return "kowalevskaya";
    case Mode::GeneralSymmetric: return "general";
    case Mode::Lagrange: return "lagrange";
    }
    return "unknown";
}

inline Mode parse_mode(std::string_view s)
{
    if (s == "kowalevskaya") return Mode::Kowalevskaya;
    if (s == "general") return Mode::GeneralSymmetric;
    if (s == "lagrange") return Mode::Lagrange;
    throw std::invalid_argument("unknown mode '" + std::string(s) + "' (expected kowalevskaya, general or lagrange)");
}

template <typename T>
struct HamiltonianSpec
{
    Mode mode = Mode::Kowalevskaya;
    T alpha{1};
    T beta{T(1) / T(2)};
    Vector<T> gamma;     // lives in P: length n, the (n+1)-th component is structurally zero
    T lagrange_coeff{0};

    int n() const { return static_cast<int>(gamma.size()); }

    /// Throws std::invalid_argument on a spec that cannot drive a state of rank n.
    void validate(int n) const
    {
        if (gamma.size() != static_cast<std::size_t>(n)) {
            throw std::invalid_argument("gamma has " + std::to_string(gamma.size()) + " entries, expected n = " +
                                        std::to_string(n));
        }
        if (mode == Mode::Kowalevskaya) {
            if (alpha != T(1) || beta != T(1) / T(2)) {
                throw std::invalid_argument("kowalevskaya mode requires alpha = 1, beta = 1/2");
            }
            bool all_zero = true;
            for (const auto& g : gamma) all_zero = all_zero && is_zero(g);
            if (all_zero) throw std::invalid_argument("kowalevskaya mode requires gamma != 0");
        }
    }

    template <typename U>
    HamiltonianSpec<U> cast() const
    {
        HamiltonianSpec<U> s;
        s.mode = mode;
        s.alpha = scalar_cast<U>(alpha);
        s.beta = scalar_cast<U>(beta);
        s.gamma.clear();
        for (const auto& g : gamma) s.gamma.push_back(scalar_cast<U>(g));
        s.lagrange_coeff = scalar_cast<U>(lagrange_coeff);
        return s;
    }
};

template <typename T>
HamiltonianSpec<T> kowalevskaya_spec(Vector<T> gamma)
{
    HamiltonianSpec<T> s;
    s.mode = Mode::Kowalevskaya;
    s.alpha = T(1);
    s.beta = T(1) / T(2);
    s.gamma = std::move(gamma);
    s.validate(s.n());
    return s;
}

template <typename T>
HamiltonianSpec<T> general_spec(T alpha, T beta, Vector<T> gamma)
{
    HamiltonianSpec<T> s;
    s.mode = Mode::GeneralSymmetric;
    s.alpha = std::move(alpha);
    s.beta = std::move(beta);
    s.gamma = std::move(gamma);
    return s;
}

/// Lagrange mode for rank n; gamma is kept as zeros of length n.
template <typename T>
HamiltonianSpec<T> lagrange_spec(int n, T alpha, T beta, T lagrange_coeff)
{
    HamiltonianSpec<T> s;
    s.mode = Mode::Lagrange;
    s.alpha = std::move(alpha);
    s.beta = std::move(beta);
    s.gamma.assign(static_cast<std::size_t>(n), T(0));
    s.lagrange_coeff = std::move(lagrange_coeff);
    return s;
}

template <typename T>
T energy(const HamiltonianSpec<T>& spec, const PhaseState<T>& x)
{
    const int n = x.n();
    spec.validate(n);
    T rot(0), tilt(0);
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            const T v = x.l(j, k);
            rot += v * v;
        }
        const T v = x.l(j, n);
        tilt += v * v;
    }
    T h = spec.alpha * rot + spec.beta * tilt;
    if (spec.mode == Mode::Lagrange) {
        h += spec.lagrange_coeff * x.p(n);
    } else {
        for (int j = 0; j < n; ++j) h += spec.gamma[j] * x.p(j);
    }
    return h;
}

template <typename T>
Vector<T> energy_gradient(const HamiltonianSpec<T>& spec, const PhaseState<T>& x)
{
    const int n = x.n();
    spec.validate(n);
    const auto& basis = x.basis();
    Vector<T> g(x.dim(), T(0));
    const T two(2);
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) g[basis.rotation_index(j, k)] = two * spec.alpha * x.l(j, k);
        g[basis.rotation_index(j, n)] = two * spec.beta * x.l(j, n);
    }
    if (spec.mode == Mode::Lagrange) {
        g[basis.translation_index(n)] = spec.lagrange_coeff;
    } else {
        for (int j = 0; j < n; ++j) g[basis.translation_index(j)] = spec.gamma[j];
    }
    return g;
}

template <typename T>
GradientFn<T> hamiltonian_gradient(HamiltonianSpec<T> spec)
{
    return [spec = std::move(spec)](const PhaseState<T>& x) { return energy_gradient(spec, x); };
}

} // namespace kowalevskaya

#endif // KOWALEVSKAYA_MODELS_HPP_

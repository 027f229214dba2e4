#ifndef KOWALEVSKAYA_FLOW_HPP_
#define KOWALEVSKAYA_FLOW_HPP_

// Explicit time integration of dx/dt = {H, x}.
//
// Nothing here knows about the conserved quantities: the integrators are
// generic explicit Runge-Kutta schemes, so conservation can be observed
// rather than imposed.

#include "models.hpp"
#include "poisson.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace kowalevskaya {

enum class Method { FixedRk4, AdaptiveDormandPrince };

struct IntegratorConfig
{
    Method method = Method::AdaptiveDormandPrince;
    double step = 1e-3;         // fixed_rk4; also the initial trial step for the adaptive method
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double t_final = 1.0;
    double sample_interval = 0.1;
    std::size_t max_steps = 50'000'000;

    void validate() const
    {
        if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
        if (method == Method::AdaptiveDormandPrince) {
            if (!(abs_tol > 0.0 && abs_tol <= 1e-2)) throw std::invalid_argument("abs_tol must lie in (0, 1e-2]");
            if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw std::invalid_argument("rel_tol must lie in (0, 1e-2]");
        }
        if (!(t_final > 0.0) || !std::isfinite(t_final)) throw std::invalid_argument("t_final must be positive");
        if (!(sample_interval > 0.0) || sample_interval > t_final) {
            throw std::invalid_argument("sample_interval must lie in (0, t_final]");
        }
    }
};

struct IntegratorStats
{
    std::size_t steps = 0;
    std::size_t rejections = 0;
    std::size_t evaluations = 0;
};

struct Trajectory
{
    std::vector<double> times;
    std::vector<PhaseState<double>> states;
    IntegratorConfig config;
    HamiltonianSpec<double> spec;
    IntegratorStats stats;

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
};

class IntegrationError : public std::runtime_error
{
public:
    enum class Kind { StepUnderflow, NonFinite, TooManySteps };

    IntegrationError(Kind kind, double t, const std::string& what)
        : std::runtime_error(what + " at t = " + std::to_string(t)), kind_(kind), time_(t)
    {
    }

    Kind kind() const { return kind_; }
    double time() const { return time_; }

private:
    Kind kind_;
    double time_;
};

namespace detail {

inline bool all_finite(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

/// y + h * sum_i a_i k_i
inline PhaseState<double> combine(const PhaseState<double>& y, double h, std::initializer_list<double> a,
                                  std::initializer_list<const Vector<double>*> k)
{
    PhaseState<double> out = y;
    auto ai = a.begin();
    for (const Vector<double>* ki : k) {
        const double coeff = h * *ai++;
        if (coeff == 0.0) continue;
        for (std::size_t i = 0; i < out.dim(); ++i) out[i] += coeff * (*ki)[i];
    }
    return out;
}

class Rhs
{
public:
    Rhs(const StructureTensor& C, const HamiltonianSpec<double>& spec, IntegratorStats* stats)
        : C_(C), spec_(spec), stats_(stats)
    {
    }

    Vector<double> operator()(const PhaseState<double>& x) const
    {
        if (stats_) ++stats_->evaluations;
        auto dH = energy_gradient(spec_, x);
        return vector_field_from_gradient<double>(C_, x, dH);
    }

private:
    const StructureTensor& C_;
    const HamiltonianSpec<double>& spec_;
    IntegratorStats* stats_;
};

inline PhaseState<double> rk4_step(const Rhs& f, const PhaseState<double>& x, double h)
{
    const Vector<double> k1 = f(x);
    const Vector<double> k2 = f(combine(x, h, {0.5}, {&k1}));
    const Vector<double> k3 = f(combine(x, h, {0.5}, {&k2}));
    const Vector<double> k4 = f(combine(x, h, {1.0}, {&k3}));
    return combine(x, h, {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}, {&k1, &k2, &k3, &k4});
}

/// Records (t, x) for every pending sample time t_target <= t.
class Sampler
{
public:
    Sampler(Trajectory& traj, double t_final, double interval) : traj_(traj), t_final_(t_final), interval_(interval)
    {
        advance();
    }

    void offer(double t, const PhaseState<double>& x)
    {
        if (done_ || t + slack() < target_) return;
        if (traj_.times.empty() || t > traj_.times.back()) {
            traj_.times.push_back(t);
            traj_.states.push_back(x);
        }
        while (!done_ && target_ <= t + slack()) advance();
    }

private:
    double slack() const { return 1e-12 * std::max(1.0, t_final_); }

    void advance()
    {
        ++k_;
        double next = static_cast<double>(k_) * interval_;
        if (next >= t_final_ - slack()) {
            if (at_final_) {
                done_ = true;
                return;
            }
            next = t_final_;
            at_final_ = true;
        }
        target_ = next;
    }

    Trajectory& traj_;
    double t_final_;
    double interval_;
    std::size_t k_ = 0;
    double target_ = 0.0;
    bool at_final_ = false;
    bool done_ = false;
};

} // namespace detail

/// One classical fourth-order Runge-Kutta step of size h.
inline PhaseState<double> fixed_step(const StructureTensor& C, const PhaseState<double>& x,
                                     const HamiltonianSpec<double>& spec, double h)
{
    if (!(h != 0.0) || !std::isfinite(h)) throw std::invalid_argument("step size must be finite and nonzero");
    detail::Rhs f(C, spec, nullptr);
    PhaseState<double> y = detail::rk4_step(f, x, h);
    if (!detail::all_finite(y.coords())) throw IntegrationError(IntegrationError::Kind::NonFinite, h, "non-finite state");
    return y;
}

inline PhaseState<double> fixed_step(const PhaseState<double>& x, const HamiltonianSpec<double>& spec, double h)
{
    return fixed_step(structure_constants(x.n()), x, spec, h);
}

namespace detail {

inline Trajectory integrate_fixed(const StructureTensor& C, const PhaseState<double>& x0,
                                  const HamiltonianSpec<double>& spec, const IntegratorConfig& cfg, Trajectory traj)
{
    Rhs f(C, spec, &traj.stats);
    // Uniform grid: the step is shrunk to t_final / N.
    const auto count = static_cast<std::size_t>(std::ceil(cfg.t_final / cfg.step - 1e-9));
    if (count > cfg.max_steps) throw IntegrationError(IntegrationError::Kind::TooManySteps, 0.0, "step budget exceeded");
    const double h = cfg.t_final / static_cast<double>(count);
    Sampler sampler(traj, cfg.t_final, cfg.sample_interval);
    PhaseState<double> x = x0;
    for (std::size_t i = 1; i <= count; ++i) {
        x = rk4_step(f, x, h);
        ++traj.stats.steps;
        const double t = (i == count) ? cfg.t_final : static_cast<double>(i) * h;
        if (!all_finite(x.coords())) throw IntegrationError(IntegrationError::Kind::NonFinite, t, "non-finite state");
        sampler.offer(t, x);
    }
    return traj;
}

// Dormand-Prince 5(4) tableau.
struct Dopri
{
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b_hat (fifth- minus fourth-order weights)
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline Trajectory integrate_adaptive(const StructureTensor& C, const PhaseState<double>& x0,
                                     const HamiltonianSpec<double>& spec, const IntegratorConfig& cfg, Trajectory traj)
{
    using D = Dopri;
    Rhs f(C, spec, &traj.stats);
    Sampler sampler(traj, cfg.t_final, cfg.sample_interval);

    constexpr double safety = 0.9, fac_min = 0.2, fac_max = 5.0;
    constexpr double beta = 0.04;
    constexpr double alpha = 0.2 - 0.75 * beta;  // PI exponents for a fifth-order pair

    PhaseState<double> x = x0;
    Vector<double> k1 = f(x);
    double t = 0.0;
    double h = std::min(cfg.step, cfg.t_final);
    double err_prev = 1e-4;
    bool last_rejected = false;
    std::size_t attempts = 0;

    while (t < cfg.t_final) {
        if (++attempts > cfg.max_steps) {
            throw IntegrationError(IntegrationError::Kind::TooManySteps, t, "step budget exceeded");
        }
        bool final_step = false;
        if (t + h >= cfg.t_final) {
            h = cfg.t_final - t;
            final_step = true;
        }
        if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t))) {
            throw IntegrationError(IntegrationError::Kind::StepUnderflow, t, "step size underflow");
        }

        const Vector<double> k2 = f(combine(x, h, {D::a21}, {&k1}));
        const Vector<double> k3 = f(combine(x, h, {D::a31, D::a32}, {&k1, &k2}));
        const Vector<double> k4 = f(combine(x, h, {D::a41, D::a42, D::a43}, {&k1, &k2, &k3}));
        const Vector<double> k5 = f(combine(x, h, {D::a51, D::a52, D::a53, D::a54}, {&k1, &k2, &k3, &k4}));
        const Vector<double> k6 =
            f(combine(x, h, {D::a61, D::a62, D::a63, D::a64, D::a65}, {&k1, &k2, &k3, &k4, &k5}));
        const PhaseState<double> y =
            combine(x, h, {D::b1, 0.0, D::b3, D::b4, D::b5, D::b6}, {&k1, &k2, &k3, &k4, &k5, &k6});
        const Vector<double> k7 = f(y);

        double err = 0.0;
        for (std::size_t i = 0; i < x.dim(); ++i) {
            const double e = h * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] + D::e6 * k6[i] +
                                  D::e7 * k7[i]);
            const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(x[i]), std::fabs(y[i]));
            err = std::max(err, std::fabs(e) / scale);
        }
        if (!std::isfinite(err) || !all_finite(y.coords())) {
            // Retry smaller before declaring the state non-finite.
            if (h < 1e-12) throw IntegrationError(IntegrationError::Kind::NonFinite, t, "non-finite state");
            h *= fac_min;
            ++traj.stats.rejections;
            last_rejected = true;
            continue;
        }

        if (err <= 1.0) {
            t = final_step ? cfg.t_final : t + h;
            x = y;
            k1 = k7;  // first-same-as-last
            ++traj.stats.steps;
            sampler.offer(t, x);
            double fac = err == 0.0 ? fac_max
                                    : safety * std::pow(err, -alpha) * std::pow(std::max(err_prev, 1e-4), beta);
            fac = std::clamp(fac, fac_min, fac_max);
            if (last_rejected) fac = std::min(fac, 1.0);
            h *= fac;
            err_prev = err;
            last_rejected = false;
        } else {
            h *= std::max(fac_min, safety * std::pow(err, -alpha));
            ++traj.stats.rejections;
            last_rejected = true;
        }
    }
    return traj;
}

} // namespace detail

/// Integrates from t = 0 to cfg.t_final. The first sample is x0 at t = 0;
/// later samples are taken at the first completed step at or after each
/// multiple of cfg.sample_interval, recording the actual step time.
inline Trajectory integrate(const PhaseState<double>& x0, const HamiltonianSpec<double>& spec,
                            const IntegratorConfig& cfg)
{
    cfg.validate();
    spec.validate(x0.n());
    if (!detail::all_finite(x0.coords())) throw IntegrationError(IntegrationError::Kind::NonFinite, 0.0, "non-finite initial state");
    const StructureTensor C(x0.n());
    Trajectory traj;
    traj.config = cfg;
    traj.spec = spec;
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    if (cfg.method == Method::FixedRk4) return detail::integrate_fixed(C, x0, spec, cfg, std::move(traj));
    return detail::integrate_adaptive(C, x0, spec, cfg, std::move(traj));
}

} // namespace kowalevskaya

#endif // KOWALEVSKAYA_FLOW_HPP_

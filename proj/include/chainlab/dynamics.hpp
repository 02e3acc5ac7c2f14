#ifndef CHAINLAB_DYNAMICS_HPP
#define CHAINLAB_DYNAMICS_HPP

// State-update kernels for the single and coupled logistic difference
// equations (Ricker maps), the logistic map, and the continuous logistic,
// coupled logistic and Lotka-Volterra systems.
//
// Every routine is a pure function of its arguments and is templated on the
// scalar type so that the same code path can be evaluated in extended
// precision as an oracle.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "chainlab/errors.hpp"

namespace chainlab {

enum class Chain { x, y };

inline char chain_name(Chain c) { return c == Chain::x ? 'x' : 'y'; }

/// Growth rates, carrying capacities and cross couplings of two chains.
/// `a_yx` weights y inside x's growth exponent, `a_xy` weights x inside y's.
/// A nonzero `a_yx` with `a_xy == 0` is a unidirectional y -> x chain.
template <typename Scalar>
struct ChainParams {
    Scalar r_x{1};
    Scalar r_y{1};
    Scalar K_x{1};
    Scalar K_y{1};
    Scalar a_yx{0};
    Scalar a_xy{0};

    void validate() const {
        if (!(r_x > 0) || !(r_y > 0) || !(K_x > 0) || !(K_y > 0))
            throw DomainViolation("growth rates and carrying capacities must be positive");
        if (!std::isfinite(r_x) || !std::isfinite(r_y) || !std::isfinite(K_x) ||
            !std::isfinite(K_y) || !std::isfinite(a_yx) || !std::isfinite(a_xy))
            throw DomainViolation("chain parameters must be finite");
    }

    /// Reference one-parameter family, y driving x:
    /// r_x = r, r_y = 0.95 r, K_x = 0.95, K_y = 1, a_yx = -0.1, a_xy = 0.
    static ChainParams reference_family(Scalar r) {
        return {r, Scalar(0.95) * r, Scalar(0.95), Scalar(1), Scalar(-0.1), Scalar(0)};
    }

    /// Interior fixed point solving x = K_x - a_yx y, y = K_y - a_xy x, if the
    /// linear system is non-singular.
    std::optional<Eigen::Matrix<Scalar, 2, 1>> interior_fixed_point() const {
        const Scalar det = Scalar(1) - a_yx * a_xy;
        if (det == Scalar(0)) return std::nullopt;
        return Eigen::Matrix<Scalar, 2, 1>((K_x - a_yx * K_y) / det, (K_y - a_xy * K_x) / det);
    }

    friend bool operator==(const ChainParams&, const ChainParams&) = default;
};

template <typename Scalar>
struct ChainState {
    Scalar x{0};
    Scalar y{0};
    std::int64_t n{0};

    friend bool operator==(const ChainState&, const ChainState&) = default;
};

/// Lotka-Volterra coefficients for S1' = a S1 - b S1 S2, S2' = c S2 - d S1 S2.
template <typename Scalar>
struct LVParams {
    Scalar a{1};
    Scalar b{1};
    Scalar c{1};
    Scalar d{1};

    void validate() const {
        if (!(a > 0) || !(b > 0) || !(c > 0) || !(d > 0))
            throw DomainViolation("Lotka-Volterra coefficients must be positive");
    }

    friend bool operator==(const LVParams&, const LVParams&) = default;
};

/// Parameters that a shock can replace during a run. The enumerator order is
/// the canonical order in which simultaneous shocks are applied.
enum class ShockTarget { r_x, r_y, K_x, K_y, a_yx, a_xy };

template <typename Scalar>
struct AppliedShock {
    std::int64_t iteration{0};
    ShockTarget target{ShockTarget::r_x};
    Scalar value{0};

    friend bool operator==(const AppliedShock&, const AppliedShock&) = default;
};

template <typename Scalar>
Scalar& shock_slot(ChainParams<Scalar>& p, ShockTarget t) {
    switch (t) {
        case ShockTarget::r_x: return p.r_x;
        case ShockTarget::r_y: return p.r_y;
        case ShockTarget::K_x: return p.K_x;
        case ShockTarget::K_y: return p.K_y;
        case ShockTarget::a_yx: return p.a_yx;
        case ShockTarget::a_xy: return p.a_xy;
    }
    return p.r_x;
}

template <typename Scalar>
struct Clamp {
    Chain chain{Chain::x};
    Scalar value{0};

    friend bool operator==(const Clamp&, const Clamp&) = default;
};

enum class ModelKind { coupled_lde, ode, lotka_volterra };

/// Everything needed to regenerate a trajectory bit-identically.
template <typename Scalar>
struct Provenance {
    ModelKind kind{ModelKind::coupled_lde};
    ChainState<Scalar> initial{};
    Scalar dt{0};  // zero for maps
    std::optional<std::uint64_t> seed;
    std::optional<LVParams<Scalar>> lv;
    std::optional<Clamp<Scalar>> clamp;
    std::vector<AppliedShock<Scalar>> shocks;  // in application order
};

/// Time-indexed two-chain states. Row n holds (x_n, y_n); indices start at 0.
template <typename Scalar>
struct Trajectory {
    using Samples = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

    Samples samples;
    ChainParams<Scalar> params{};
    Provenance<Scalar> provenance{};

    Eigen::Index size() const { return samples.rows(); }
    auto x() const { return samples.col(0); }
    auto y() const { return samples.col(1); }
    auto series(Chain c) const { return samples.col(c == Chain::x ? 0 : 1); }
    ChainState<Scalar> state(Eigen::Index n) const {
        return {samples(n, 0), samples(n, 1), static_cast<std::int64_t>(n)};
    }
    ChainState<Scalar> back() const { return state(size() - 1); }
};

using ChainParamsd = ChainParams<double>;
using ChainStated = ChainState<double>;
using LVParamsd = LVParams<double>;
using Trajectoryd = Trajectory<double>;

namespace detail {

// x * exp(exponent) with zero absorbing; nullopt on overflow.
template <typename Scalar>
std::optional<Scalar> grow(Scalar value, Scalar exponent) {
    if (value == Scalar(0)) return Scalar(0);
    const Scalar next = value * std::exp(exponent);
    if (!std::isfinite(next)) return std::nullopt;
    return next;
}

template <typename Scalar>
void check_state(const ChainState<Scalar>& s) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || s.x < 0 || s.y < 0)
        throw DomainViolation("chain state must be finite and non-negative");
}

}  // namespace detail

/// One step of the logistic difference equation x' = x exp(r (K - x)).
template <typename Scalar>
Scalar step_lde(Scalar x, Scalar r, Scalar K) {
    if (!(x >= 0) || !(r > 0) || !(K > 0)) throw DomainViolation("step_lde requires x >= 0, r > 0, K > 0");
    const auto next = detail::grow(x, r * (K - x));
    if (!next) throw NonFinite(1, '?');
    return *next;
}

/// One step of the logistic map x' = r x (1 - x) on [0, 1] with r in (0, 4].
template <typename Scalar>
Scalar step_logistic_map(Scalar x, Scalar r) {
    if (!(x >= 0 && x <= 1)) throw DomainViolation("logistic map requires x in [0, 1]");
    if (!(r > 0 && r <= 4)) throw DomainViolation("logistic map requires r in (0, 4]");
    return r * x * (Scalar(1) - x);
}

/// Synchronous coupled update: both chains read the state at n.
template <typename Scalar>
ChainState<Scalar> step_coupled_lde(const ChainState<Scalar>& s, const ChainParams<Scalar>& p) {
    detail::check_state(s);
    const auto x = detail::grow(s.x, p.r_x * (p.K_x - s.x - p.a_yx * s.y));
    if (!x) throw NonFinite(s.n + 1, 'x');
    const auto y = detail::grow(s.y, p.r_y * (p.K_y - s.y - p.a_xy * s.x));
    if (!y) throw NonFinite(s.n + 1, 'y');
    return {*x, *y, s.n + 1};
}

/// Iterates the coupled map for `n_steps`, optionally with one chain clamped
/// (its update severed) and with parameter shocks. Shocks must be sorted by
/// (iteration, target); a shock at iteration i is in force for the update
/// i -> i+1 and every later one. Shocks at or after `n_steps` are ignored.
template <typename Scalar>
Trajectory<Scalar> run_coupled(const ChainState<Scalar>& initial, const ChainParams<Scalar>& params,
                               std::int64_t n_steps, std::optional<Clamp<Scalar>> clamp = std::nullopt,
                               std::span<const AppliedShock<Scalar>> shocks = {}) {
    if (n_steps < 1) throw DomainViolation("n_steps must be at least 1");
    params.validate();
    ChainState<Scalar> s{initial.x, initial.y, 0};
    if (clamp) {
        if (!(clamp->value >= 0) || !std::isfinite(clamp->value))
            throw DomainViolation("clamp value must be finite and non-negative");
        (clamp->chain == Chain::x ? s.x : s.y) = clamp->value;
    }
    detail::check_state(s);

    Trajectory<Scalar> traj;
    traj.params = params;
    traj.provenance.kind = ModelKind::coupled_lde;
    traj.provenance.initial = {initial.x, initial.y, 0};
    traj.provenance.clamp = clamp;
    traj.samples.resize(n_steps + 1, 2);
    traj.samples(0, 0) = s.x;
    traj.samples(0, 1) = s.y;

    ChainParams<Scalar> live = params;
    std::size_t next_shock = 0;
    for (std::int64_t n = 0; n < n_steps; ++n) {
        while (next_shock < shocks.size() && shocks[next_shock].iteration <= n) {
            const auto& shock = shocks[next_shock++];
            if (shock.iteration < n) continue;
            shock_slot(live, shock.target) = shock.value;
            traj.provenance.shocks.push_back(shock);
        }
        s = step_coupled_lde(s, live);
        if (clamp) (clamp->chain == Chain::x ? s.x : s.y) = clamp->value;
        traj.samples(n + 1, 0) = s.x;
        traj.samples(n + 1, 1) = s.y;
    }
    return traj;
}

template <typename Scalar>
Trajectory<Scalar> simulate(const ChainState<Scalar>& initial, const ChainParams<Scalar>& params,
                            std::int64_t n_steps) {
    return run_coupled(initial, params, n_steps);
}

namespace detail {

template <typename Scalar, typename Field>
Trajectory<Scalar> rk4(const Eigen::Matrix<Scalar, 2, 1>& start, Scalar dt, Scalar t_end, Field&& field) {
    using Vec = Eigen::Matrix<Scalar, 2, 1>;
    if (!(dt > 0) || !(t_end > dt)) throw DomainViolation("integration requires dt > 0 and t_end > dt");
    const auto n_steps = static_cast<std::int64_t>(std::llround(static_cast<double>(t_end / dt)));

    Trajectory<Scalar> traj;
    traj.provenance.dt = dt;
    traj.provenance.initial = {start(0), start(1), 0};
    traj.samples.resize(n_steps + 1, 2);
    traj.samples.row(0) = start.transpose();

    Vec u = start;
    const Scalar half = dt / Scalar(2);
    for (std::int64_t n = 0; n < n_steps; ++n) {
        const Vec k1 = field(u);
        const Vec k2 = field(Vec(u + half * k1));
        const Vec k3 = field(Vec(u + half * k2));
        const Vec k4 = field(Vec(u + dt * k3));
        u += (dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
        if (!std::isfinite(u(0))) throw NonFinite(n + 1, 'x');
        if (!std::isfinite(u(1))) throw NonFinite(n + 1, 'y');
        traj.samples.row(n + 1) = u.transpose();
    }
    return traj;
}

}  // namespace detail

/// Fixed-step RK4 of x' = r_x x (K_x - x - a_yx y), y' = r_y y (K_y - y - a_xy x).
template <typename Scalar>
Trajectory<Scalar> integrate_ode(const ChainState<Scalar>& initial, const ChainParams<Scalar>& params, Scalar dt,
                                 Scalar t_end) {
    using Vec = Eigen::Matrix<Scalar, 2, 1>;
    params.validate();
    detail::check_state(initial);
    const auto field = [&params](const Vec& u) -> Vec {
        return {params.r_x * u(0) * (params.K_x - u(0) - params.a_yx * u(1)),
                params.r_y * u(1) * (params.K_y - u(1) - params.a_xy * u(0))};
    };
    auto traj = detail::rk4<Scalar>(Vec(initial.x, initial.y), dt, t_end, field);
    traj.params = params;
    traj.provenance.kind = ModelKind::ode;
    return traj;
}

/// Fixed-step RK4 of the Lotka-Volterra predator-prey system
/// S1' = a S1 - b S1 S2, S2' = -c S2 + d S1 S2; column 0 is S1 (prey), column 1 is S2.
template <typename Scalar>
Trajectory<Scalar> integrate_lv(Scalar s1, Scalar s2, const LVParams<Scalar>& lv, Scalar dt, Scalar t_end) {
    using Vec = Eigen::Matrix<Scalar, 2, 1>;
    lv.validate();
    if (!(s1 > 0) || !(s2 > 0)) throw DomainViolation("Lotka-Volterra populations must be positive");
    const auto field = [&lv](const Vec& u) -> Vec {
        return {lv.a * u(0) - lv.b * u(0) * u(1), -lv.c * u(1) + lv.d * u(0) * u(1)};
    };
    auto traj = detail::rk4<Scalar>(Vec(s1, s2), dt, t_end, field);
    traj.provenance.kind = ModelKind::lotka_volterra;
    traj.provenance.lv = lv;
    return traj;
}

/// First integral V = d S1 - c ln S1 + b S2 - a ln S2 of the Lotka-Volterra flow.
template <typename Scalar>
Scalar lv_first_integral(const LVParams<Scalar>& lv, Scalar s1, Scalar s2) {
    return lv.d * s1 - lv.c * std::log(s1) + lv.b * s2 - lv.a * std::log(s2);
}

/// Rebuilds a trajectory from its provenance record.
template <typename Scalar>
Trajectory<Scalar> regenerate(const Trajectory<Scalar>& traj) {
    const auto& prov = traj.provenance;
    const auto n_steps = static_cast<std::int64_t>(traj.size() - 1);
    switch (prov.kind) {
        case ModelKind::coupled_lde: {
            auto out = run_coupled<Scalar>(prov.initial, traj.params, n_steps, prov.clamp, prov.shocks);
            out.provenance.seed = prov.seed;
            return out;
        }
        case ModelKind::ode:
            return integrate_ode<Scalar>(prov.initial, traj.params, prov.dt, prov.dt * Scalar(n_steps));
        case ModelKind::lotka_volterra:
            return integrate_lv<Scalar>(prov.initial.x, prov.initial.y, *prov.lv, prov.dt,
                                        prov.dt * Scalar(n_steps));
    }
    return traj;
}

}  // namespace chainlab

#endif  // CHAINLAB_DYNAMICS_HPP

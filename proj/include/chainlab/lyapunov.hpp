#ifndef CHAINLAB_LYAPUNOV_HPP
#define CHAINLAB_LYAPUNOV_HPP

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "chainlab/dynamics.hpp"

namespace chainlab {

inline constexpr std::int64_t kDefaultLyapunovBurnIn = 1000;

template <typename Scalar>
struct LogisticMap {
    Scalar r;

    Scalar operator()(Scalar x) const { return step_logistic_map(x, r); }
    Scalar derivative(Scalar x) const { return r * (Scalar(1) - Scalar(2) * x); }
};

/// Single-chain logistic difference equation (Ricker map).
template <typename Scalar>
struct LdeMap {
    Scalar r;
    Scalar K;

    Scalar operator()(Scalar x) const { return step_lde(x, r, K); }
    Scalar derivative(Scalar x) const { return std::exp(r * (K - x)) * (Scalar(1) - r * x); }
};

namespace detail {

inline void check_lyapunov_lengths(std::int64_t n_iter, std::int64_t n_burn) {
    if (n_iter < 10000) throw DomainViolation("Lyapunov estimate needs at least 1e4 iterations");
    if (n_burn < 0) throw DomainViolation("burn-in must be non-negative");
}

}  // namespace detail

/// Mean of ln|f'(x_n)| along the orbit of a one-dimensional map after burn-in.
template <typename Map, typename Scalar>
Scalar lyapunov_exponent(const Map& map, Scalar x0, std::int64_t n_iter,
                         std::int64_t n_burn = kDefaultLyapunovBurnIn) {
    detail::check_lyapunov_lengths(n_iter, n_burn);
    Scalar x = x0;
    for (std::int64_t i = 0; i < n_burn; ++i) x = map(x);
    Scalar sum{0};
    for (std::int64_t i = 0; i < n_iter; ++i) {
        sum += std::log(std::abs(map.derivative(x)));
        x = map(x);
    }
    return sum / Scalar(n_iter);
}

/// Largest exponent of the coupled map by tangent-vector renormalisation.
template <typename Scalar>
Scalar lyapunov_exponent(const ChainParams<Scalar>& p, const ChainState<Scalar>& initial, std::int64_t n_iter,
                         std::int64_t n_burn = kDefaultLyapunovBurnIn) {
    using Vec = Eigen::Matrix<Scalar, 2, 1>;
    using Mat = Eigen::Matrix<Scalar, 2, 2>;
    detail::check_lyapunov_lengths(n_iter, n_burn);
    p.validate();

    ChainState<Scalar> s{initial.x, initial.y, 0};
    for (std::int64_t i = 0; i < n_burn; ++i) s = step_coupled_lde(s, p);

    Vec tangent = Vec::Ones().normalized();
    Scalar sum{0};
    for (std::int64_t i = 0; i < n_iter; ++i) {
        const Scalar gx = std::exp(p.r_x * (p.K_x - s.x - p.a_yx * s.y));
        const Scalar gy = std::exp(p.r_y * (p.K_y - s.y - p.a_xy * s.x));
        Mat jac;
        jac << gx * (Scalar(1) - p.r_x * s.x), -s.x * gx * p.r_x * p.a_yx,
               -s.y * gy * p.r_y * p.a_xy, gy * (Scalar(1) - p.r_y * s.y);
        tangent = jac * tangent;
        const Scalar norm = tangent.norm();
        if (!std::isfinite(norm)) throw NonFinite(s.n + 1, '?');
        sum += std::log(norm);
        tangent /= norm;
        s = step_coupled_lde(s, p);
    }
    return sum / Scalar(n_iter);
}

}  // namespace chainlab

#endif  // CHAINLAB_LYAPUNOV_HPP

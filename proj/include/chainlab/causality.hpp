#ifndef CHAINLAB_CAUSALITY_HPP
#define CHAINLAB_CAUSALITY_HPP

// Causal-direction detection between the two chains: lagged correlation,
// Granger F-tests, convergent cross mapping, and do-style interventions that
// clamp one chain and measure the shift in the other's distribution.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "chainlab/dynamics.hpp"

namespace chainlab {

using SeriesRef = Eigen::Ref<const Eigen::VectorXd>;

enum class Direction { none, x_to_y, y_to_x, both };

std::string_view direction_name(Direction d);

/// Sign annotation of an edge's feedback. Inbound coupling a < 0 raises the
/// receiving chain's growth exponent and is read as reinforcing ("+");
/// a > 0 as self-limiting ("-").
enum class Feedback { absent, self_limiting, reinforcing };

struct CausalGraphHypothesis {
    Direction direction = Direction::none;
    Feedback into_x = Feedback::absent;
    Feedback into_y = Feedback::absent;

    static CausalGraphHypothesis from_params(const ChainParamsd& params);
    bool consistent() const;
};

// ---------------------------------------------------------------------------
// Lagged cross-correlation

struct LaggedPeak {
    double correlation = 0.0;  // signed value with the largest magnitude
    int lag = 0;
};

struct XcorrResult {
    int max_lag = 0;
    LaggedPeak x_leads;  // corr(y_n, x_{n-k})
    LaggedPeak y_leads;  // corr(x_n, y_{n-k})
};

XcorrResult lagged_xcorr(const SeriesRef& x, const SeriesRef& y, int max_lag);
XcorrResult lagged_xcorr(const Trajectoryd& traj, int max_lag);

// ---------------------------------------------------------------------------
// Granger causality

struct GrangerTest {
    double f_stat = 0.0;
    double p_value = 1.0;
    int df1 = 0;
    int df2 = 0;
};

struct GrangerResult {
    int order = 0;
    GrangerTest y_to_x;
    GrangerTest x_to_y;
};

/// Does `source` Granger-cause `target` at lag order p? OLS with intercept,
/// p own lags (restricted) against p own plus p source lags (unrestricted).
GrangerTest granger_test(const SeriesRef& target, const SeriesRef& source, int order);
GrangerResult granger(const SeriesRef& x, const SeriesRef& y, int order);
GrangerResult granger(const Trajectoryd& traj, int order);

// ---------------------------------------------------------------------------
// Convergent cross mapping

struct EmbeddingSpec {
    int E = 3;
    int tau = 1;
    std::vector<int> library_sizes;  // empty: default_library_sizes

    /// `count` log-spaced sizes from 20 up to 80% of the series length.
    static std::vector<int> default_library_sizes(Eigen::Index length, int count = 10);
    std::vector<int> resolved_library_sizes(Eigen::Index length) const;
    void validate(Eigen::Index length) const;
};

struct SkillCurve {
    std::vector<int> library_sizes;
    std::vector<double> rho;

    double final_skill() const { return rho.empty() ? 0.0 : rho.back(); }
    double gain() const { return rho.empty() ? 0.0 : rho.back() - rho.front(); }
};

struct CcmResult {
    int E = 3;
    int tau = 1;
    SkillCurve x_xmap_y;  // y estimated from x's shadow manifold: evidence for y -> x
    SkillCurve y_xmap_x;  // x estimated from y's shadow manifold: evidence for x -> y
};

/// Skill of estimating `target` from the delay embedding of `library`. The
/// first L embedded points form the library; prediction points are the
/// embedded points after the largest library, so they are held out for every L.
SkillCurve cross_map(const SeriesRef& library, const SeriesRef& target, const EmbeddingSpec& spec);
CcmResult ccm(const SeriesRef& x, const SeriesRef& y, const EmbeddingSpec& spec);
CcmResult ccm(const Trajectoryd& traj, const EmbeddingSpec& spec);

// ---------------------------------------------------------------------------
// Interventions

/// Simulation with one chain held at `clamp.value` at every iteration.
Trajectoryd intervene(const ChainParamsd& params, const Clamp<double>& clamp, const ChainStated& initial,
                      std::int64_t n_steps);

struct ShiftSpec {
    Chain target = Chain::y;  // the clamped chain
    std::vector<double> clamp_values;
    Chain probe = Chain::x;
    std::int64_t n_steps = 10000;
    std::int64_t burn_in = 1000;
    double epsilon = 1e-4;
    ChainStated initial{0.5, 0.5, 0};

    void validate() const;
};

/// Total-variation distance between the epsilon-quantised distribution of the
/// probe chain's post-burn-in values under clamping (pooled over all clamp
/// values) and without it.
double interventional_shift(const ChainParamsd& params, const ShiftSpec& spec);

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double epsilon);

// ---------------------------------------------------------------------------
// Adjudication

struct Thresholds {
    double xcorr_min = 0.3;
    double granger_alpha = 0.05;
    double ccm_min_skill = 0.5;
    double ccm_min_gain = 0.0;
    double shift_min = 0.05;
};

struct InterventionalResult {
    std::vector<double> clamp_values;
    double clamp_x_probe_y = 0.0;
    double clamp_y_probe_x = 0.0;
};

struct Verdict {
    std::optional<Direction> xcorr;
    std::optional<Direction> granger;
    std::optional<Direction> ccm;
    std::optional<Direction> interventional;
    Direction overall = Direction::none;
    bool determined = false;
    bool observationally_ambiguous = false;
};

struct CausalReport {
    std::optional<XcorrResult> xcorr;
    std::optional<GrangerResult> granger;
    std::optional<CcmResult> ccm;
    std::optional<InterventionalResult> interventional;
    Thresholds thresholds;
    Verdict verdict;
};

Direction combine(bool x_to_y, bool y_to_x);

/// Fills in per-method direction calls and the overall verdict. When an
/// intervention ran it decides the overall direction; the ambiguity flag is
/// raised if it is decisive while the observational calls disagree with each
/// other, fall below threshold, or point elsewhere.
CausalReport adjudicate(CausalReport report);

}  // namespace chainlab

#endif  // CHAINLAB_CAUSALITY_HPP

#include "chainlab/causality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include <Eigen/QR>
#include <boost/math/distributions/fisher_f.hpp>

namespace chainlab {

std::string_view direction_name(Direction d) {
    switch (d) {
        case Direction::none: return "none";
        case Direction::x_to_y: return "x->y";
        case Direction::y_to_x: return "y->x";
        case Direction::both: return "both";
    }
    return "none";
}

Direction combine(bool x_to_y, bool y_to_x) {
    if (x_to_y && y_to_x) return Direction::both;
    if (x_to_y) return Direction::x_to_y;
    if (y_to_x) return Direction::y_to_x;
    return Direction::none;
}

namespace {

Feedback feedback_of(double inbound) {
    if (inbound == 0.0) return Feedback::absent;
    return inbound < 0.0 ? Feedback::reinforcing : Feedback::self_limiting;
}

bool is_constant(const SeriesRef& s) {
    return s.size() == 0 || (s.array() == s(0)).all();
}

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    const Eigen::VectorXd ca = a.array() - a.mean();
    const Eigen::VectorXd cb = b.array() - b.mean();
    const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
    if (!(denom > 0.0)) return 0.0;
    return std::clamp(ca.dot(cb) / denom, -1.0, 1.0);
}

// Peak of corr(follower_n, leader_{n-k}) over k = 0..max_lag.
LaggedPeak lag_scan(const SeriesRef& leader, const SeriesRef& follower, int max_lag) {
    const Eigen::Index n = leader.size();
    LaggedPeak best;
    for (int k = 0; k <= max_lag; ++k) {
        const double rho = pearson(follower.tail(n - k), leader.head(n - k));
        if (k == 0 || std::abs(rho) > std::abs(best.correlation)) best = {rho, k};
    }
    return best;
}

Eigen::VectorXd standardize(const SeriesRef& s) {
    const Eigen::VectorXd c = s.array() - s.mean();
    const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(s.size()));
    return c / sd;
}

double residual_ss(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols()) throw SingularDesign("Granger regression design is rank-deficient");
    const Eigen::VectorXd beta = qr.solve(response);
    return (response - design * beta).squaredNorm();
}

}  // namespace

CausalGraphHypothesis CausalGraphHypothesis::from_params(const ChainParamsd& params) {
    CausalGraphHypothesis h;
    h.direction = combine(params.a_xy != 0.0, params.a_yx != 0.0);
    h.into_x = feedback_of(params.a_yx);
    h.into_y = feedback_of(params.a_xy);
    return h;
}

bool CausalGraphHypothesis::consistent() const {
    const bool has_y_to_x = direction == Direction::y_to_x || direction == Direction::both;
    const bool has_x_to_y = direction == Direction::x_to_y || direction == Direction::both;
    return (into_x != Feedback::absent) == has_y_to_x && (into_y != Feedback::absent) == has_x_to_y;
}

// ---------------------------------------------------------------------------

XcorrResult lagged_xcorr(const SeriesRef& x, const SeriesRef& y, int max_lag) {
    if (x.size() != y.size()) throw DomainViolation("series lengths differ");
    if (max_lag < 0 || x.size() <= 4 * static_cast<Eigen::Index>(max_lag))
        throw DomainViolation("lagged correlation needs length > 4 * max_lag");
    if (is_constant(x) || is_constant(y)) throw DegenerateSeries("lagged correlation of a constant series");
    return {max_lag, lag_scan(x, y, max_lag), lag_scan(y, x, max_lag)};
}

XcorrResult lagged_xcorr(const Trajectoryd& traj, int max_lag) { return lagged_xcorr(traj.x(), traj.y(), max_lag); }

// ---------------------------------------------------------------------------

GrangerTest granger_test(const SeriesRef& target, const SeriesRef& source, int order) {
    if (target.size() != source.size()) throw DomainViolation("series lengths differ");
    if (order < 1 || target.size() < 20 * static_cast<Eigen::Index>(order))
        throw DomainViolation("Granger test needs order >= 1 and length >= 20 * order");
    if (is_constant(target) || is_constant(source)) throw DegenerateSeries("Granger test on a constant series");

    // F is invariant to affine rescaling; standardising only helps conditioning.
    const Eigen::VectorXd t = standardize(target);
    const Eigen::VectorXd s = standardize(source);
    const Eigen::Index p = order;
    const Eigen::Index rows = t.size() - p;

    Eigen::MatrixXd full(rows, 1 + 2 * p);
    full.col(0).setOnes();
    for (Eigen::Index k = 1; k <= p; ++k) {
        full.col(k) = t.segment(p - k, rows);
        full.col(p + k) = s.segment(p - k, rows);
    }
    const Eigen::VectorXd response = t.tail(rows);

    const double rss_restricted = residual_ss(full.leftCols(1 + p), response);
    const double rss_full = residual_ss(full, response);
    if (!(rss_full > 0.0)) throw DegenerateSeries("Granger regression has zero residual");

    GrangerTest out;
    out.df1 = order;
    out.df2 = static_cast<int>(rows - 2 * p - 1);
    out.f_stat = std::max(0.0, ((rss_restricted - rss_full) / out.df1) / (rss_full / out.df2));
    const boost::math::fisher_f_distribution<double> dist(out.df1, out.df2);
    out.p_value = std::clamp(boost::math::cdf(boost::math::complement(dist, out.f_stat)), 0.0, 1.0);
    return out;
}

GrangerResult granger(const SeriesRef& x, const SeriesRef& y, int order) {
    return {order, granger_test(x, y, order), granger_test(y, x, order)};
}

GrangerResult granger(const Trajectoryd& traj, int order) { return granger(traj.x(), traj.y(), order); }

// ---------------------------------------------------------------------------

std::vector<int> EmbeddingSpec::default_library_sizes(Eigen::Index length, int count) {
    const double lo = 20.0;
    const double hi = std::floor(0.8 * static_cast<double>(length));
    if (hi <= lo || count < 2) throw DomainViolation("series too short for default library sizes");
    std::vector<int> sizes;
    for (int i = 0; i < count; ++i) {
        const double f = static_cast<double>(i) / (count - 1);
        const int L = static_cast<int>(std::lround(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))));
        if (sizes.empty() || L > sizes.back()) sizes.push_back(L);
    }
    return sizes;
}

std::vector<int> EmbeddingSpec::resolved_library_sizes(Eigen::Index length) const {
    return library_sizes.empty() ? default_library_sizes(length) : library_sizes;
}

void EmbeddingSpec::validate(Eigen::Index length) const {
    if (E < 2) throw DomainViolation("embedding dimension must be at least 2");
    if (tau < 1) throw DomainViolation("embedding lag must be at least 1");
    const auto sizes = resolved_library_sizes(length);
    if (sizes.empty()) throw DomainViolation("no library sizes");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1]) throw DomainViolation("library sizes must be strictly increasing");
    if (sizes.front() < E + 2) throw InsufficientNeighbors("library smaller than E + 2 points");
    if (length < static_cast<Eigen::Index>(sizes.back()) + E * tau)
        throw DomainViolation("series shorter than largest library plus E * tau");
}

SkillCurve cross_map(const SeriesRef& library, const SeriesRef& target, const EmbeddingSpec& spec) {
    if (library.size() != target.size()) throw DomainViolation("series lengths differ");
    spec.validate(library.size());
    if (is_constant(library) || is_constant(target)) throw DegenerateSeries("cross map of a constant series");

    const int E = spec.E;
    const Eigen::Index offset = static_cast<Eigen::Index>(E - 1) * spec.tau;
    const Eigen::Index n_points = library.size() - offset;

    // Row i is the delay vector ending at time i + offset.
    Eigen::MatrixXd embedded(n_points, E);
    for (int j = 0; j < E; ++j) embedded.col(j) = library.segment(offset - j * spec.tau, n_points);

    SkillCurve curve;
    curve.library_sizes = spec.resolved_library_sizes(library.size());
    const Eigen::Index l_max = curve.library_sizes.back();
    const Eigen::Index n_pred = n_points - l_max;
    if (n_pred < 3) throw DomainViolation("fewer than 3 held-out prediction points");

    const std::size_t n_sizes = curve.library_sizes.size();
    const int k = E + 1;
    Eigen::MatrixXd estimates(n_pred, static_cast<Eigen::Index>(n_sizes));

    std::vector<double> dist(k);
    std::vector<Eigen::Index> idx(k);
    for (Eigen::Index p = 0; p < n_pred; ++p) {
        const auto query = embedded.row(l_max + p);
        int filled = 0;
        std::size_t next_size = 0;
        // The library is a prefix, so the k nearest among the first L points
        // are the running neighbours after scanning L points. Strict '<'
        // keeps the lower index on equal distances.
        for (Eigen::Index j = 0; j < l_max; ++j) {
            const double d = (embedded.row(j) - query).norm();
            if (filled < k || d < dist[filled - 1]) {
                int pos = filled < k ? filled++ : k - 1;
                while (pos > 0 && dist[pos - 1] > d) {
                    dist[pos] = dist[pos - 1];
                    idx[pos] = idx[pos - 1];
                    --pos;
                }
                dist[pos] = d;
                idx[pos] = j;
            }
            if (j + 1 == curve.library_sizes[next_size]) {
                double wsum = 0.0;
                double acc = 0.0;
                for (int i = 0; i < filled; ++i) {
                    const double w = dist[0] > 0.0 ? std::exp(-dist[i] / dist[0]) : (dist[i] == 0.0 ? 1.0 : 0.0);
                    wsum += w;
                    acc += w * target(idx[i] + offset);
                }
                estimates(p, static_cast<Eigen::Index>(next_size)) = acc / wsum;
                ++next_size;
            }
        }
    }

    const Eigen::VectorXd observed = target.tail(n_pred);
    curve.rho.reserve(n_sizes);
    for (std::size_t s = 0; s < n_sizes; ++s)
        curve.rho.push_back(pearson(estimates.col(static_cast<Eigen::Index>(s)), observed));
    return curve;
}

CcmResult ccm(const SeriesRef& x, const SeriesRef& y, const EmbeddingSpec& spec) {
    return {spec.E, spec.tau, cross_map(x, y, spec), cross_map(y, x, spec)};
}

CcmResult ccm(const Trajectoryd& traj, const EmbeddingSpec& spec) { return ccm(traj.x(), traj.y(), spec); }

// ---------------------------------------------------------------------------

Trajectoryd intervene(const ChainParamsd& params, const Clamp<double>& clamp, const ChainStated& initial,
                      std::int64_t n_steps) {
    return run_coupled<double>(initial, params, n_steps, clamp);
}

void ShiftSpec::validate() const {
    if (clamp_values.empty()) throw DomainViolation("interventional shift needs at least one clamp value");
    if (target == probe) throw DomainViolation("probe chain must differ from the clamped chain");
    if (n_steps < 10000) throw DomainViolation("interventional shift needs n_steps >= 1e4");
    if (burn_in < 0 || burn_in >= n_steps) throw DomainViolation("burn-in must lie in [0, n_steps)");
    if (!(epsilon > 0)) throw DomainViolation("epsilon must be positive");
}

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double epsilon) {
    if (a.size() == 0 || b.size() == 0) throw DomainViolation("total variation of an empty sample");
    std::map<std::int64_t, std::array<double, 2>> counts;
    for (const double v : a) counts[std::llround(v / epsilon)][0] += 1.0;
    for (const double v : b) counts[std::llround(v / epsilon)][1] += 1.0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double tv = 0.0;
    for (const auto& [_, c] : counts) tv += std::abs(c[0] / na - c[1] / nb);
    return std::clamp(0.5 * tv, 0.0, 1.0);
}

double interventional_shift(const ChainParamsd& params, const ShiftSpec& spec) {
    spec.validate();
    const Eigen::Index kept = spec.n_steps - spec.burn_in;
    const auto probe_tail = [&](const Trajectoryd& t) -> Eigen::VectorXd { return t.series(spec.probe).tail(kept); };

    const Eigen::VectorXd baseline = probe_tail(simulate(spec.initial, params, spec.n_steps));
    Eigen::VectorXd clamped(kept * static_cast<Eigen::Index>(spec.clamp_values.size()));
    for (std::size_t i = 0; i < spec.clamp_values.size(); ++i) {
        const auto run = intervene(params, {spec.target, spec.clamp_values[i]}, spec.initial, spec.n_steps);
        clamped.segment(static_cast<Eigen::Index>(i) * kept, kept) = probe_tail(run);
    }
    return total_variation(clamped, baseline, spec.epsilon);
}

// ---------------------------------------------------------------------------

CausalReport adjudicate(CausalReport report) {
    const auto& th = report.thresholds;
    Verdict& v = report.verdict;
    v = Verdict{};

    if (report.xcorr) {
        const auto& xc = *report.xcorr;
        v.xcorr = combine(std::abs(xc.x_leads.correlation) >= th.xcorr_min && xc.x_leads.lag >= 1,
                          std::abs(xc.y_leads.correlation) >= th.xcorr_min && xc.y_leads.lag >= 1);
    }
    if (report.granger) {
        const auto& g = *report.granger;
        v.granger = combine(g.x_to_y.p_value < th.granger_alpha, g.y_to_x.p_value < th.granger_alpha);
    }
    if (report.ccm) {
        const auto convergent = [&th](const SkillCurve& c) {
            return c.final_skill() >= th.ccm_min_skill && c.gain() >= th.ccm_min_gain;
        };
        v.ccm = combine(convergent(report.ccm->y_xmap_x), convergent(report.ccm->x_xmap_y));
    }
    if (report.interventional) {
        const auto& iv = *report.interventional;
        v.interventional = combine(iv.clamp_x_probe_y > th.shift_min, iv.clamp_y_probe_x > th.shift_min);
    }

    std::vector<Direction> observational;
    for (const auto& call : {v.xcorr, v.granger, v.ccm})
        if (call) observational.push_back(*call);
    if (observational.empty()) throw DomainViolation("adjudication needs at least one observational method");

    if (v.interventional) {
        v.overall = *v.interventional;
        v.determined = true;
        v.observationally_ambiguous =
            *v.interventional != Direction::none &&
            std::any_of(observational.begin(), observational.end(), [&](Direction d) { return d != v.overall; });
    } else if (std::all_of(observational.begin(), observational.end(),
                           [&](Direction d) { return d == observational.front(); })) {
        v.overall = observational.front();
        v.determined = true;
    }
    return report;
}

}  // namespace chainlab

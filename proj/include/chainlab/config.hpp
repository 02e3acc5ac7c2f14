#ifndef CHAINLAB_CONFIG_HPP
#define CHAINLAB_CONFIG_HPP

// Experiment configuration: a JSON document validated in full before any
// computation. Unknown keys are rejected, and `to_json` writes the
// normalised form with every default made explicit.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainlab/bifurcation.hpp"
#include "chainlab/causality.hpp"
#include "chainlab/dynamics.hpp"
#include "chainlab/perturbation.hpp"

namespace chainlab {

/// Growth value of the default model: a chaotic cell of the reference
/// parameter family, where the y -> x coupling is recoverable by CCM.
inline constexpr double kDefaultChaoticR = 3.0;

struct ModelConfig {
    ModelKind kind = ModelKind::coupled_lde;
    ChainParamsd params = ChainParamsd::reference_family(kDefaultChaoticR);
    LVParamsd lv{};
    double dt = 1e-3;
    double t_end = 10.0;
};

struct SweepConfig {
    double r_min = 1.5;
    double r_max = 3.0;
    int n_r = 1500;
    std::int64_t n_burn = 1000;
    std::int64_t n_keep = 500;
    double epsilon = 1e-4;
    bool continuation = false;
    LinearParamRule param_rule{};

    SweepSpec spec() const;
};

struct DetectConfig {
    bool xcorr = true;
    bool granger = true;
    bool ccm = true;
    bool intervention = true;
    int max_lag = 10;
    int granger_order = 3;
    int E = 3;
    int tau = 1;
    std::vector<int> library_sizes;  // empty: log-spaced defaults
    int n_library_sizes = 10;
    std::vector<double> clamp_values{0.5, 1.0, 1.5};
    Thresholds thresholds{};
};

struct InterventionConfig {
    Chain clamp_chain = Chain::y;
    std::vector<double> clamp_values{1.0};
    Chain probe_chain = Chain::x;
    std::int64_t n_steps = 10000;
    std::int64_t burn_in = 1000;
    double epsilon = 1e-4;
};

struct ExperimentConfig {
    ModelConfig model{};
    ChainStated initial{0.5, 0.5, 0};
    // Each chain's initial value is raised by jitter * U[0, 1) drawn from the seed.
    double initial_jitter = 0.0;
    std::int64_t steps = 2000;
    std::int64_t burn_in = 1000;
    SweepConfig sweep{};
    std::vector<ScheduleSpec> perturbations;  // seeds resolved
    std::optional<std::string> schedule_file;
    DetectConfig detect{};
    InterventionConfig intervention{};
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    /// Initial state after seeded jitter.
    ChainStated effective_initial() const;
};

/// Parses and validates. Perturbation entries without a seed get
/// `seed + index`. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace chainlab

#endif  // CHAINLAB_CONFIG_HPP

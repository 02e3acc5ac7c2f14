#ifndef CHAINLAB_COMMANDS_HPP
#define CHAINLAB_COMMANDS_HPP

#include <filesystem>
#include <optional>
#include <ostream>
#include <string_view>

#include <json.hpp>

#include "chainlab/causality.hpp"
#include "chainlab/config.hpp"

namespace chainlab {

enum class Command { simulate, bifurcate, perturb, detect, intervene };

std::optional<Command> parse_command(std::string_view name);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int divergence = 3;
inline constexpr int detector_degeneracy = 4;
}  // namespace exit_code

/// Runs one subcommand, writing its files and `config.json` (the normalised
/// config echo) into `cfg.output_dir`. Diagnostics go to `log`. Returns the
/// process exit code.
int run_command(Command cmd, const ExperimentConfig& cfg, std::ostream& log);

/// Reads a config file, applies the seed / output-directory overrides, then
/// dispatches. Any failure maps onto the documented exit codes.
int run_command_file(Command cmd, const std::filesystem::path& config_path, std::optional<std::uint64_t> seed,
                     std::optional<std::string> output_dir, std::ostream& log);

/// Builds the full report for `detect` (without writing anything).
CausalReport detect_report(const ExperimentConfig& cfg);

/// Report document with the fixed top-level fields; numbers at 6 significant
/// digits. `config` is embedded verbatim.
nlohmann::json report_json(const CausalReport& report, const nlohmann::json& config);

}  // namespace chainlab

#endif  // CHAINLAB_COMMANDS_HPP

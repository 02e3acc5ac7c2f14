#ifndef CHAINLAB_PERTURBATION_HPP
#define CHAINLAB_PERTURBATION_HPP

// Seeded exogenous shocks: a chosen parameter is redrawn uniformly from
// [low, high] at exponentially distributed waiting times.
//
// Random numbers come from std::mt19937_64, whose output sequence is fixed
// by the C++ standard. Uniform and exponential variates are derived from the
// raw 64-bit words here rather than through <random> distributions, whose
// algorithms are implementation-defined. Each event consumes two words:
// first the waiting time, then the value.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "chainlab/dynamics.hpp"

namespace chainlab {

std::string_view target_name(ShockTarget t);
std::optional<ShockTarget> parse_target(std::string_view name);

struct ScheduleSpec {
    ShockTarget target = ShockTarget::r_x;
    double rate = 0.0;  // mean events per iteration
    double low = 0.0;
    double high = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

struct ShockEvent {
    std::int64_t iteration = 0;
    double value = 0.0;

    friend bool operator==(const ShockEvent&, const ShockEvent&) = default;
};

struct PerturbationSchedule {
    ShockTarget target = ShockTarget::r_x;
    // Set when the schedule was drawn rather than read from a file.
    std::optional<ScheduleSpec> generator;
    // Continuous arrival times of every draw inside the horizon.
    std::vector<double> arrivals;
    // Realised shocks: arrival times rounded up to iterations. Arrivals that
    // share an iteration collapse onto the last one drawn.
    std::vector<ShockEvent> events;
};

/// Uniform variate in [0, 1) from the top 53 bits of a 64-bit word.
double unit_interval(std::uint64_t word);

PerturbationSchedule generate_schedule(const ScheduleSpec& spec, std::int64_t horizon);

/// Simulation with every schedule's shocks in force from their iteration
/// onwards. Schedules must target distinct parameters. The applied shocks are
/// recorded in the trajectory provenance.
Trajectoryd simulate_perturbed(const ChainStated& initial, const ChainParamsd& params,
                               const std::vector<PerturbationSchedule>& schedules, std::int64_t n_steps);

/// Merges schedules into a single list ordered by (iteration, target).
std::vector<AppliedShock<double>> merge_schedules(const std::vector<PerturbationSchedule>& schedules);

/// Line format `iteration,target,value` with one header row.
void write_shocks(std::ostream& out, const std::vector<AppliedShock<double>>& shocks);
std::vector<PerturbationSchedule> read_schedules(std::istream& in);

}  // namespace chainlab

#endif  // CHAINLAB_PERTURBATION_HPP

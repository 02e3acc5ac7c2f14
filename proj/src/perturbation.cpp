#include "chainlab/perturbation.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "chainlab/io.hpp"

namespace chainlab {

namespace {

constexpr std::array<std::string_view, 6> kTargetNames{"r_x", "r_y", "K_x", "K_y", "a_yx", "a_xy"};

bool is_rate_or_capacity(ShockTarget t) {
    return t == ShockTarget::r_x || t == ShockTarget::r_y || t == ShockTarget::K_x || t == ShockTarget::K_y;
}

}  // namespace

std::string_view target_name(ShockTarget t) { return kTargetNames[static_cast<std::size_t>(t)]; }

std::optional<ShockTarget> parse_target(std::string_view name) {
    for (std::size_t i = 0; i < kTargetNames.size(); ++i)
        if (kTargetNames[i] == name) return static_cast<ShockTarget>(i);
    return std::nullopt;
}

void ScheduleSpec::validate() const {
    if (!(rate > 0) || !std::isfinite(rate)) throw DomainViolation("shock rate must be positive");
    if (!(low < high) || !std::isfinite(low) || !std::isfinite(high))
        throw DomainViolation("shock bounds must satisfy low < high");
    if (is_rate_or_capacity(target) && !(low > 0))
        throw DomainViolation("shocks on growth rates or capacities need a positive lower bound");
}

double unit_interval(std::uint64_t word) { return static_cast<double>(word >> 11) * 0x1.0p-53; }

PerturbationSchedule generate_schedule(const ScheduleSpec& spec, std::int64_t horizon) {
    spec.validate();
    if (horizon < 1) throw DomainViolation("schedule horizon must be at least 1");

    PerturbationSchedule schedule;
    schedule.target = spec.target;
    schedule.generator = spec;

    std::mt19937_64 engine(spec.seed);
    double t = 0.0;
    for (;;) {
        t += -std::log1p(-unit_interval(engine())) / spec.rate;
        const double value = std::min(spec.high, spec.low + (spec.high - spec.low) * unit_interval(engine()));
        if (t > static_cast<double>(horizon)) break;
        schedule.arrivals.push_back(t);
        const auto iteration = static_cast<std::int64_t>(std::ceil(t));
        if (!schedule.events.empty() && schedule.events.back().iteration == iteration)
            schedule.events.back().value = value;
        else
            schedule.events.push_back({iteration, value});
    }
    return schedule;
}

std::vector<AppliedShock<double>> merge_schedules(const std::vector<PerturbationSchedule>& schedules) {
    std::set<ShockTarget> seen;
    std::vector<AppliedShock<double>> merged;
    for (const auto& s : schedules) {
        if (!seen.insert(s.target).second)
            throw DomainViolation("perturbation schedules must target distinct parameters");
        for (const auto& e : s.events) merged.push_back({e.iteration, s.target, e.value});
    }
    std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
        return a.iteration != b.iteration ? a.iteration < b.iteration : a.target < b.target;
    });
    return merged;
}

Trajectoryd simulate_perturbed(const ChainStated& initial, const ChainParamsd& params,
                               const std::vector<PerturbationSchedule>& schedules, std::int64_t n_steps) {
    const auto shocks = merge_schedules(schedules);
    for (const auto& s : shocks) {
        ChainParamsd probe = params;
        shock_slot(probe, s.target) = s.value;
        probe.validate();
    }
    return run_coupled<double>(initial, params, n_steps, std::nullopt, shocks);
}

void write_shocks(std::ostream& out, const std::vector<AppliedShock<double>>& shocks) {
    out << "iteration,target,value\n";
    for (const auto& s : shocks)
        out << s.iteration << ',' << target_name(s.target) << ',' << format_number(s.value) << '\n';
}

std::vector<PerturbationSchedule> read_schedules(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "iteration,target,value")
        throw ConfigError("schedule file must start with header 'iteration,target,value'");

    std::map<ShockTarget, PerturbationSchedule> by_target;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto bad = [&] { return ConfigError("malformed schedule line " + std::to_string(line_no)); };
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos) throw bad();

        std::int64_t iteration = 0;
        const std::string_view it_text(line.data(), c1);
        if (auto [p, ec] = std::from_chars(it_text.data(), it_text.data() + it_text.size(), iteration);
            ec != std::errc{} || p != it_text.data() + it_text.size() || iteration < 0)
            throw bad();
        const auto target = parse_target(std::string_view(line).substr(c1 + 1, c2 - c1 - 1));
        if (!target) throw bad();
        const double value = parse_number(std::string_view(line).substr(c2 + 1));
        if (!std::isfinite(value)) throw bad();

        auto& schedule = by_target[*target];
        schedule.target = *target;
        if (!schedule.events.empty() && schedule.events.back().iteration >= iteration)
            throw ConfigError("schedule iterations must be strictly increasing per target (line " +
                              std::to_string(line_no) + ")");
        schedule.events.push_back({iteration, value});
    }
    std::vector<PerturbationSchedule> out;
    for (auto& [_, s] : by_target) out.push_back(std::move(s));
    return out;
}

}  // namespace chainlab

#include "chainlab/commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "chainlab/bifurcation.hpp"
#include "chainlab/io.hpp"
#include "chainlab/perturbation.hpp"

namespace chainlab {

using nlohmann::json;

std::optional<Command> parse_command(std::string_view name) {
    if (name == "simulate") return Command::simulate;
    if (name == "bifurcate") return Command::bifurcate;
    if (name == "perturb") return Command::perturb;
    if (name == "detect") return Command::detect;
    if (name == "intervene") return Command::intervene;
    return std::nullopt;
}

namespace {

namespace fs = std::filesystem;

json num(double v) { return round_significant(v); }

json direction_json(const std::optional<Direction>& d) {
    return d ? json(std::string(direction_name(*d))) : json(nullptr);
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

// Same layout as json::dump(2), but floats use the shortest round-trip form.
void write_json(std::string& out, const json& v, int depth) {
    const auto pad = [&out](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            out += "null";
            return;
        }
        char buf[32];
        const auto end = std::to_chars(buf, buf + sizeof buf, d).ptr;
        const std::string text(buf, end);
        out += text;
        if (text.find_first_of(".e") == std::string::npos) out += ".0";
    } else if (v.is_object() && !v.empty()) {
        out += "{\n";
        std::size_t i = 0;
        for (const auto& [key, item] : v.items()) {
            pad(depth + 1);
            out += json(key).dump() + ": ";
            write_json(out, item, depth + 1);
            out += ++i < v.size() ? ",\n" : "\n";
        }
        pad(depth);
        out += '}';
    } else if (v.is_array() && !v.empty()) {
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            pad(depth + 1);
            write_json(out, v[i], depth + 1);
            out += i + 1 < v.size() ? ",\n" : "\n";
        }
        pad(depth);
        out += ']';
    } else {
        out += v.dump();
    }
}

std::string dump(const json& doc) {
    std::string out;
    write_json(out, doc, 0);
    return out + "\n";
}

template <typename Writer>
std::string render(Writer&& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

fs::path prepare_output(const ExperimentConfig& cfg) {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    write_file(dir / "config.json", dump(to_json(cfg)));
    return dir;
}

std::vector<PerturbationSchedule> build_schedules(const ExperimentConfig& cfg, std::int64_t horizon) {
    std::vector<PerturbationSchedule> schedules;
    for (const auto& spec : cfg.perturbations) schedules.push_back(generate_schedule(spec, horizon));
    if (cfg.schedule_file) {
        std::ifstream in(*cfg.schedule_file, std::ios::binary);
        if (!in) throw ConfigError("cannot open schedule file '" + *cfg.schedule_file + "'");
        for (auto& s : read_schedules(in)) schedules.push_back(std::move(s));
    }
    merge_schedules(schedules);  // rejects duplicate targets
    return schedules;
}

Trajectoryd simulate_model(const ExperimentConfig& cfg) {
    const auto initial = cfg.effective_initial();
    const auto& m = cfg.model;
    switch (m.kind) {
        case ModelKind::coupled_lde: return simulate(initial, m.params, cfg.steps);
        case ModelKind::ode: return integrate_ode(initial, m.params, m.dt, m.t_end);
        case ModelKind::lotka_volterra: return integrate_lv(initial.x, initial.y, m.lv, m.dt, m.t_end);
    }
    return {};
}

void validate_detect(const ExperimentConfig& cfg, Eigen::Index length) {
    const auto& det = cfg.detect;
    try {
        if (det.xcorr && length <= 4 * static_cast<Eigen::Index>(det.max_lag))
            throw ConfigError("detect: steps must exceed 4 * max_lag");
        if (det.granger && length < 20 * static_cast<Eigen::Index>(det.granger_order))
            throw ConfigError("detect: steps must be at least 20 * granger_order");
        if (det.ccm) {
            EmbeddingSpec spec{det.E, det.tau, det.library_sizes};
            if (spec.library_sizes.empty())
                spec.library_sizes = EmbeddingSpec::default_library_sizes(length, det.n_library_sizes);
            spec.validate(length);
        }
    } catch (const DomainViolation& e) {
        throw ConfigError(std::string("detect: ") + e.what());
    } catch (const InsufficientNeighbors& e) {
        throw ConfigError(std::string("detect: ") + e.what());
    }
}

int cmd_simulate(const ExperimentConfig& cfg) {
    const auto traj = simulate_model(cfg);
    const auto dir = prepare_output(cfg);
    write_file(dir / "trajectory.csv", render([&](std::ostream& os) { write_trajectory_csv(os, traj); }));
    return exit_code::ok;
}

int cmd_bifurcate(const ExperimentConfig& cfg) {
    const auto diagram = sweep(cfg.sweep.spec(), cfg.effective_initial());
    const auto dir = prepare_output(cfg);
    write_file(dir / "diagram.csv", render([&](std::ostream& os) { write_diagram_csv(os, diagram); }));
    return exit_code::ok;
}

int cmd_perturb(const ExperimentConfig& cfg) {
    const auto schedules = build_schedules(cfg, cfg.steps);
    const auto traj = simulate_perturbed(cfg.effective_initial(), cfg.model.params, schedules, cfg.steps);
    const auto dir = prepare_output(cfg);
    write_file(dir / "trajectory.csv", render([&](std::ostream& os) { write_trajectory_csv(os, traj); }));
    write_file(dir / "events.csv", render([&](std::ostream& os) { write_shocks(os, traj.provenance.shocks); }));
    return exit_code::ok;
}

int cmd_detect(const ExperimentConfig& cfg) {
    validate_detect(cfg, cfg.steps);
    const auto report = detect_report(cfg);
    const auto dir = prepare_output(cfg);
    write_file(dir / "report.json", dump(report_json(report, to_json(cfg))));
    return exit_code::ok;
}

int cmd_intervene(const ExperimentConfig& cfg) {
    const auto& iv = cfg.intervention;
    const ShiftSpec spec{iv.clamp_chain, iv.clamp_values, iv.probe_chain,
                         iv.n_steps,     iv.burn_in,      iv.epsilon,   cfg.effective_initial()};
    const auto traj = intervene(cfg.model.params, {iv.clamp_chain, iv.clamp_values.front()}, spec.initial, iv.n_steps);
    const double shift = interventional_shift(cfg.model.params, spec);
    const double threshold = cfg.detect.thresholds.shift_min;

    json doc;
    doc["clamp_chain"] = std::string(1, chain_name(iv.clamp_chain));
    doc["probe_chain"] = std::string(1, chain_name(iv.probe_chain));
    doc["clamp_values"] = json::array();
    for (const double c : iv.clamp_values) doc["clamp_values"].push_back(num(c));
    doc["shift"] = num(shift);
    doc["threshold"] = num(threshold);
    doc["causal_influence"] = shift > threshold;

    const auto dir = prepare_output(cfg);
    write_file(dir / "trajectory.csv", render([&](std::ostream& os) { write_trajectory_csv(os, traj); }));
    write_file(dir / "shift.json", dump(doc));
    return exit_code::ok;
}

}  // namespace

CausalReport detect_report(const ExperimentConfig& cfg) {
    const auto& det = cfg.detect;
    const auto initial = cfg.effective_initial();

    Trajectoryd run;
    if (cfg.perturbations.empty() && !cfg.schedule_file) {
        run = simulate(initial, cfg.model.params, cfg.burn_in + cfg.steps);
    } else {
        const auto schedules = build_schedules(cfg, cfg.burn_in + cfg.steps);
        run = simulate_perturbed(initial, cfg.model.params, schedules, cfg.burn_in + cfg.steps);
    }
    const Eigen::VectorXd x = run.x().tail(cfg.steps);
    const Eigen::VectorXd y = run.y().tail(cfg.steps);

    CausalReport report;
    report.thresholds = det.thresholds;
    if (det.xcorr) report.xcorr = lagged_xcorr(x, y, det.max_lag);
    if (det.granger) report.granger = granger(x, y, det.granger_order);
    if (det.ccm) {
        EmbeddingSpec spec{det.E, det.tau, det.library_sizes};
        if (spec.library_sizes.empty())
            spec.library_sizes = EmbeddingSpec::default_library_sizes(x.size(), det.n_library_sizes);
        report.ccm = ccm(x, y, spec);
    }
    if (det.intervention) {
        const auto& iv = cfg.intervention;
        ShiftSpec spec{Chain::x, det.clamp_values, Chain::y, iv.n_steps, iv.burn_in, iv.epsilon, initial};
        InterventionalResult result;
        result.clamp_values = det.clamp_values;
        result.clamp_x_probe_y = interventional_shift(cfg.model.params, spec);
        spec.target = Chain::y;
        spec.probe = Chain::x;
        result.clamp_y_probe_x = interventional_shift(cfg.model.params, spec);
        report.interventional = result;
    }
    return adjudicate(report);
}

json report_json(const CausalReport& report, const json& config) {
    json doc;
    doc["xcorr"] = nullptr;
    doc["granger"] = nullptr;
    doc["ccm"] = nullptr;
    doc["interventional"] = nullptr;

    if (report.xcorr) {
        const auto& xc = *report.xcorr;
        doc["xcorr"] = {{"max_lag", xc.max_lag},
                        {"x_leads", {{"peak", num(xc.x_leads.correlation)}, {"lag", xc.x_leads.lag}}},
                        {"y_leads", {{"peak", num(xc.y_leads.correlation)}, {"lag", xc.y_leads.lag}}}};
    }
    if (report.granger) {
        const auto test = [](const GrangerTest& t) {
            return json{{"f_stat", num(t.f_stat)}, {"p_value", num(t.p_value)}, {"df1", t.df1}, {"df2", t.df2}};
        };
        doc["granger"] = {{"order", report.granger->order},
                          {"y_to_x", test(report.granger->y_to_x)},
                          {"x_to_y", test(report.granger->x_to_y)}};
    }
    if (report.ccm) {
        const auto curve = [](const SkillCurve& c) {
            json rho = json::array();
            for (const double v : c.rho) rho.push_back(num(v));
            return rho;
        };
        const auto& c = *report.ccm;
        doc["ccm"] = {{"E", c.E},
                      {"tau", c.tau},
                      {"library_sizes", c.x_xmap_y.library_sizes},
                      {"y_to_x", {{"estimates", "y from the shadow manifold of x"}, {"rho", curve(c.x_xmap_y)}}},
                      {"x_to_y", {{"estimates", "x from the shadow manifold of y"}, {"rho", curve(c.y_xmap_x)}}}};
    }
    if (report.interventional) {
        const auto& iv = *report.interventional;
        json clamps = json::array();
        for (const double v : iv.clamp_values) clamps.push_back(num(v));
        doc["interventional"] = {{"clamp_values", clamps},
                                 {"x_to_y", num(iv.clamp_x_probe_y)},
                                 {"y_to_x", num(iv.clamp_y_probe_x)},
                                 {"threshold", num(report.thresholds.shift_min)}};
    }

    const auto& v = report.verdict;
    json flags = json::array();
    if (v.observationally_ambiguous) flags.push_back("OBSERVATIONALLY-AMBIGUOUS");
    doc["verdict"] = {{"xcorr", direction_json(v.xcorr)},
                      {"granger", direction_json(v.granger)},
                      {"ccm", direction_json(v.ccm)},
                      {"interventional", direction_json(v.interventional)},
                      {"overall", v.determined ? std::string(direction_name(v.overall)) : "undetermined"},
                      {"flags", flags}};

    const auto& th = report.thresholds;
    json cfg = config;
    cfg["thresholds"] = {{"xcorr_min", num(th.xcorr_min)},
                         {"granger_alpha", num(th.granger_alpha)},
                         {"ccm_min_skill", num(th.ccm_min_skill)},
                         {"ccm_min_gain", num(th.ccm_min_gain)},
                         {"shift_min", num(th.shift_min)}};
    doc["config"] = cfg;
    return doc;
}

int run_command(Command cmd, const ExperimentConfig& cfg, std::ostream& log) {
    try {
        switch (cmd) {
            case Command::simulate: return cmd_simulate(cfg);
            case Command::bifurcate: return cmd_bifurcate(cfg);
            case Command::perturb: return cmd_perturb(cfg);
            case Command::detect: return cmd_detect(cfg);
            case Command::intervene: return cmd_intervene(cfg);
        }
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return exit_code::config_error;
    } catch (const DomainViolation& e) {
        log << "config error: " << e.what() << '\n';
        return exit_code::config_error;
    } catch (const NonFinite& e) {
        log << "divergence: iteration " << e.index() << " chain " << e.chain() << '\n';
        return exit_code::divergence;
    } catch (const DetectorError& e) {
        log << "detector degeneracy: " << e.what() << '\n';
        return exit_code::detector_degeneracy;
    }
    return exit_code::config_error;
}

int run_command_file(Command cmd, const fs::path& config_path, std::optional<std::uint64_t> seed,
                     std::optional<std::string> output_dir, std::ostream& log) {
    ExperimentConfig cfg;
    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw ConfigError("cannot open config file '" + config_path.string() + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!doc.is_object()) throw ConfigError("config must be a JSON object");
        if (seed) doc["seed"] = *seed;
        if (output_dir) doc["output_dir"] = *output_dir;
        cfg = parse_config(doc);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return exit_code::config_error;
    }
    return run_command(cmd, cfg, log);
}

}  // namespace chainlab

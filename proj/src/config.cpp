#include "chainlab/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace chainlab {

using nlohmann::json;

namespace {

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }

    void mark(const std::string& key) { seen_.insert(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!has(key)) return;
        out = convert<T>(obj_.at(key), where_ + "." + key);
    }

    void finish() const {
        for (const auto& item : obj_.items())
            if (!seen_.contains(item.key())) throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
    }

    template <typename T>
    static T convert(const json& v, const std::string& where) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(where + ": expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer");
            return v.get<std::uint64_t>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
            const auto wide = v.get<std::int64_t>();
            if (wide < std::numeric_limits<T>::min() || wide > std::numeric_limits<T>::max())
                throw ConfigError(where + ": integer out of range");
            return static_cast<T>(wide);
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw ConfigError(where + ": expected a number");
            const double d = v.get<double>();
            if (!std::isfinite(d)) throw ConfigError(where + ": expected a finite number");
            return d;
        } else {
            static_assert(sizeof(T) == 0, "unsupported config type");
        }
    }

    template <typename T>
    void get_list(const std::string& key, std::vector<T>& out) {
        seen_.insert(key);
        if (!has(key)) return;
        const json& arr = obj_.at(key);
        if (!arr.is_array()) throw ConfigError(where_ + "." + key + ": expected an array");
        out.clear();
        for (std::size_t i = 0; i < arr.size(); ++i)
            out.push_back(convert<T>(arr[i], where_ + "." + key + "[" + std::to_string(i) + "]"));
    }

private:
    const json& obj_;
    std::string where_;
    std::set<std::string> seen_;
};

Chain parse_chain(const std::string& s, const std::string& where) {
    if (s == "x") return Chain::x;
    if (s == "y") return Chain::y;
    throw ConfigError(where + ": chain must be 'x' or 'y'");
}

std::string_view model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::coupled_lde: return "coupled_lde";
        case ModelKind::ode: return "ode";
        case ModelKind::lotka_volterra: return "lotka_volterra";
    }
    return "coupled_lde";
}

ModelKind parse_model_kind(const std::string& s) {
    for (const auto k : {ModelKind::coupled_lde, ModelKind::ode, ModelKind::lotka_volterra})
        if (model_kind_name(k) == s) return k;
    throw ConfigError("model.kind: expected coupled_lde, ode or lotka_volterra");
}

void read_params(ObjectReader& parent, const std::string& key, ChainParamsd& p, const std::string& where) {
    if (!parent.has(key)) {
        parent.mark(key);
        return;
    }
    ObjectReader r(parent.raw(key), where);
    r.get("r_x", p.r_x);
    r.get("r_y", p.r_y);
    r.get("K_x", p.K_x);
    r.get("K_y", p.K_y);
    r.get("a_yx", p.a_yx);
    r.get("a_xy", p.a_xy);
    r.finish();
}

// Runs a domain validator and reports its failure as a config error.
template <typename F>
void validated(const std::string& where, F&& check) {
    try {
        check();
    } catch (const DomainViolation& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

json params_json(const ChainParamsd& p) {
    return {{"r_x", p.r_x}, {"r_y", p.r_y}, {"K_x", p.K_x}, {"K_y", p.K_y}, {"a_yx", p.a_yx}, {"a_xy", p.a_xy}};
}

}  // namespace

SweepSpec SweepConfig::spec() const {
    SweepSpec s;
    s.r_min = r_min;
    s.r_max = r_max;
    s.n_r = n_r;
    s.n_burn = n_burn;
    s.n_keep = n_keep;
    s.epsilon = epsilon;
    s.continuation = continuation;
    s.param_rule = param_rule;
    return s;
}

ChainStated ExperimentConfig::effective_initial() const {
    if (initial_jitter == 0.0) return initial;
    std::mt19937_64 engine(seed);
    const double dx = initial_jitter * unit_interval(engine());
    const double dy = initial_jitter * unit_interval(engine());
    return {initial.x + dx, initial.y + dy, 0};
}

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    ObjectReader top(doc, "config");
    top.get("seed", cfg.seed);
    top.get("output_dir", cfg.output_dir);
    top.get("steps", cfg.steps);
    top.get("burn_in", cfg.burn_in);
    top.get("initial_jitter", cfg.initial_jitter);

    if (top.has("model")) {
        ObjectReader m(top.raw("model"), "model");
        std::string kind(model_kind_name(cfg.model.kind));
        m.get("kind", kind);
        cfg.model.kind = parse_model_kind(kind);
        read_params(m, "params", cfg.model.params, "model.params");
        if (m.has("lv")) {
            ObjectReader lv(m.raw("lv"), "model.lv");
            lv.get("a", cfg.model.lv.a);
            lv.get("b", cfg.model.lv.b);
            lv.get("c", cfg.model.lv.c);
            lv.get("d", cfg.model.lv.d);
            lv.finish();
        } else {
            m.mark("lv");
        }
        m.get("dt", cfg.model.dt);
        m.get("t_end", cfg.model.t_end);
        m.finish();
    }

    if (top.has("initial")) {
        ObjectReader i(top.raw("initial"), "initial");
        i.get("x", cfg.initial.x);
        i.get("y", cfg.initial.y);
        i.finish();
    }

    if (top.has("sweep")) {
        ObjectReader s(top.raw("sweep"), "sweep");
        s.get("r_min", cfg.sweep.r_min);
        s.get("r_max", cfg.sweep.r_max);
        s.get("n_r", cfg.sweep.n_r);
        s.get("n_burn", cfg.sweep.n_burn);
        s.get("n_keep", cfg.sweep.n_keep);
        s.get("epsilon", cfg.sweep.epsilon);
        s.get("continuation", cfg.sweep.continuation);
        if (s.has("param_rule")) {
            ObjectReader pr(s.raw("param_rule"), "sweep.param_rule");
            auto& rule = cfg.sweep.param_rule;
            pr.get("r_x_scale", rule.r_x_scale);
            pr.get("r_y_scale", rule.r_y_scale);
            pr.get("K_x", rule.K_x);
            pr.get("K_y", rule.K_y);
            pr.get("a_yx", rule.a_yx);
            pr.get("a_xy", rule.a_xy);
            pr.finish();
        } else {
            s.mark("param_rule");
        }
        s.finish();
    }

    if (top.has("perturbations")) {
        const json& list = top.raw("perturbations");
        if (!list.is_array()) throw ConfigError("perturbations: expected an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = "perturbations[" + std::to_string(i) + "]";
            ObjectReader p(list[i], where);
            ScheduleSpec spec;
            for (const char* key : {"target", "rate", "low", "high"})
                if (!p.has(key)) throw ConfigError(where + ": missing required key '" + key + "'");
            std::string target;
            p.get("target", target);
            const auto t = parse_target(target);
            if (!t) throw ConfigError(where + ".target: unknown parameter '" + target + "'");
            spec.target = *t;
            p.get("rate", spec.rate);
            p.get("low", spec.low);
            p.get("high", spec.high);
            spec.seed = cfg.seed + i;
            p.get("seed", spec.seed);
            p.finish();
            validated(where, [&] { spec.validate(); });
            cfg.perturbations.push_back(spec);
        }
    }
    if (top.has("schedule_file")) {
        std::string path;
        top.get("schedule_file", path);
        cfg.schedule_file = path;
    } else {
        top.mark("schedule_file");
    }

    if (top.has("detect")) {
        ObjectReader d(top.raw("detect"), "detect");
        auto& det = cfg.detect;
        if (d.has("methods")) {
            std::vector<std::string> methods;
            d.get_list("methods", methods);
            det.xcorr = det.granger = det.ccm = det.intervention = false;
            for (const auto& name : methods) {
                if (name == "xcorr") det.xcorr = true;
                else if (name == "granger") det.granger = true;
                else if (name == "ccm") det.ccm = true;
                else if (name == "intervention") det.intervention = true;
                else throw ConfigError("detect.methods: unknown method '" + name + "'");
            }
        } else {
            d.mark("methods");
        }
        d.get("max_lag", det.max_lag);
        d.get("granger_order", det.granger_order);
        d.get("E", det.E);
        d.get("tau", det.tau);
        d.get_list("library_sizes", det.library_sizes);
        d.get("n_library_sizes", det.n_library_sizes);
        d.get_list("clamp_values", det.clamp_values);
        if (d.has("thresholds")) {
            ObjectReader t(d.raw("thresholds"), "detect.thresholds");
            t.get("xcorr_min", det.thresholds.xcorr_min);
            t.get("granger_alpha", det.thresholds.granger_alpha);
            t.get("ccm_min_skill", det.thresholds.ccm_min_skill);
            t.get("ccm_min_gain", det.thresholds.ccm_min_gain);
            t.get("shift_min", det.thresholds.shift_min);
            t.finish();
        } else {
            d.mark("thresholds");
        }
        d.finish();
    }

    if (top.has("intervention")) {
        ObjectReader iv(top.raw("intervention"), "intervention");
        auto& cfg_iv = cfg.intervention;
        std::string clamp_chain(1, chain_name(cfg_iv.clamp_chain));
        std::string probe_chain(1, chain_name(cfg_iv.probe_chain));
        iv.get("clamp_chain", clamp_chain);
        iv.get("probe_chain", probe_chain);
        cfg_iv.clamp_chain = parse_chain(clamp_chain, "intervention.clamp_chain");
        cfg_iv.probe_chain = parse_chain(probe_chain, "intervention.probe_chain");
        iv.get_list("clamp_values", cfg_iv.clamp_values);
        iv.get("n_steps", cfg_iv.n_steps);
        iv.get("burn_in", cfg_iv.burn_in);
        iv.get("epsilon", cfg_iv.epsilon);
        iv.finish();
    }
    top.finish();

    // Range checks.
    const auto& model = cfg.model;
    validated("model.params", [&] { model.params.validate(); });
    if (model.kind == ModelKind::lotka_volterra) validated("model.lv", [&] { model.lv.validate(); });
    if (model.kind != ModelKind::coupled_lde && !(model.dt > 0 && model.t_end > model.dt))
        throw ConfigError("model: need dt > 0 and t_end > dt");
    validated("initial", [&] { detail::check_state(cfg.initial); });
    if (model.kind == ModelKind::lotka_volterra && !(cfg.initial.x > 0 && cfg.initial.y > 0))
        throw ConfigError("initial: Lotka-Volterra populations must be positive");
    if (!(cfg.initial_jitter >= 0)) throw ConfigError("initial_jitter must be non-negative");
    if (cfg.steps < 1) throw ConfigError("steps must be at least 1");
    if (cfg.burn_in < 0) throw ConfigError("burn_in must be non-negative");
    validated("sweep", [&] {
        const auto spec = cfg.sweep.spec();
        spec.validate();
        for (int i = 0; i < spec.n_r; ++i) spec.param_rule(spec.r_at(i)).validate();
    });

    std::set<ShockTarget> targets;
    for (const auto& p : cfg.perturbations)
        if (!targets.insert(p.target).second)
            throw ConfigError("perturbations: each parameter may be targeted by one schedule only");

    const auto& det = cfg.detect;
    if (!det.xcorr && !det.granger && !det.ccm) throw ConfigError("detect.methods: need an observational method");
    if (det.max_lag < 0) throw ConfigError("detect.max_lag must be non-negative");
    if (det.granger_order < 1) throw ConfigError("detect.granger_order must be at least 1");
    if (det.E < 2 || det.tau < 1) throw ConfigError("detect: need E >= 2 and tau >= 1");
    if (det.n_library_sizes < 2) throw ConfigError("detect.n_library_sizes must be at least 2");
    for (std::size_t i = 1; i < det.library_sizes.size(); ++i)
        if (det.library_sizes[i] <= det.library_sizes[i - 1])
            throw ConfigError("detect.library_sizes must be strictly increasing");
    if (det.intervention && det.clamp_values.empty()) throw ConfigError("detect.clamp_values must not be empty");
    for (const double c : det.clamp_values)
        if (!(c >= 0)) throw ConfigError("detect.clamp_values must be non-negative");
    const auto& th = det.thresholds;
    if (!(th.granger_alpha > 0 && th.granger_alpha < 1)) throw ConfigError("granger_alpha must lie in (0, 1)");
    if (!(th.shift_min >= 0 && th.shift_min < 1)) throw ConfigError("shift_min must lie in [0, 1)");

    const auto& iv = cfg.intervention;
    for (const double c : iv.clamp_values)
        if (!(c >= 0)) throw ConfigError("intervention.clamp_values must be non-negative");
    validated("intervention", [&] {
        ShiftSpec{iv.clamp_chain, iv.clamp_values, iv.probe_chain, iv.n_steps, iv.burn_in, iv.epsilon, cfg.initial}
            .validate();
    });
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json out;
    out["seed"] = cfg.seed;
    out["output_dir"] = cfg.output_dir;
    out["steps"] = cfg.steps;
    out["burn_in"] = cfg.burn_in;
    out["initial_jitter"] = cfg.initial_jitter;
    out["initial"] = {{"x", cfg.initial.x}, {"y", cfg.initial.y}};
    out["model"] = {{"kind", std::string(model_kind_name(cfg.model.kind))},
                    {"params", params_json(cfg.model.params)},
                    {"lv", {{"a", cfg.model.lv.a}, {"b", cfg.model.lv.b}, {"c", cfg.model.lv.c}, {"d", cfg.model.lv.d}}},
                    {"dt", cfg.model.dt},
                    {"t_end", cfg.model.t_end}};
    const auto& sw = cfg.sweep;
    const auto& rule = sw.param_rule;
    out["sweep"] = {{"r_min", sw.r_min},
                    {"r_max", sw.r_max},
                    {"n_r", sw.n_r},
                    {"n_burn", sw.n_burn},
                    {"n_keep", sw.n_keep},
                    {"epsilon", sw.epsilon},
                    {"continuation", sw.continuation},
                    {"param_rule",
                     {{"r_x_scale", rule.r_x_scale},
                      {"r_y_scale", rule.r_y_scale},
                      {"K_x", rule.K_x},
                      {"K_y", rule.K_y},
                      {"a_yx", rule.a_yx},
                      {"a_xy", rule.a_xy}}}};
    json perturbations = json::array();
    for (const auto& p : cfg.perturbations)
        perturbations.push_back({{"target", std::string(target_name(p.target))},
                                 {"rate", p.rate},
                                 {"low", p.low},
                                 {"high", p.high},
                                 {"seed", p.seed}});
    out["perturbations"] = perturbations;
    out["schedule_file"] = cfg.schedule_file ? json(*cfg.schedule_file) : json(nullptr);

    const auto& det = cfg.detect;
    json methods = json::array();
    if (det.xcorr) methods.push_back("xcorr");
    if (det.granger) methods.push_back("granger");
    if (det.ccm) methods.push_back("ccm");
    if (det.intervention) methods.push_back("intervention");
    out["detect"] = {{"methods", methods},
                     {"max_lag", det.max_lag},
                     {"granger_order", det.granger_order},
                     {"E", det.E},
                     {"tau", det.tau},
                     {"library_sizes", det.library_sizes},
                     {"n_library_sizes", det.n_library_sizes},
                     {"clamp_values", det.clamp_values},
                     {"thresholds",
                      {{"xcorr_min", det.thresholds.xcorr_min},
                       {"granger_alpha", det.thresholds.granger_alpha},
                       {"ccm_min_skill", det.thresholds.ccm_min_skill},
                       {"ccm_min_gain", det.thresholds.ccm_min_gain},
                       {"shift_min", det.thresholds.shift_min}}}};
    const auto& iv = cfg.intervention;
    out["intervention"] = {{"clamp_chain", std::string(1, chain_name(iv.clamp_chain))},
                           {"clamp_values", iv.clamp_values},
                           {"probe_chain", std::string(1, chain_name(iv.probe_chain))},
                           {"n_steps", iv.n_steps},
                           {"burn_in", iv.burn_in},
                           {"epsilon", iv.epsilon}};
    return out;
}

}  // namespace chainlab

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainlab/io.hpp"
#include "chainlab/perturbation.hpp"

namespace chainlab {
namespace {

namespace fs = std::filesystem;

// Scratch directory removed on scope exit.
struct Workdir {
    fs::path path;
    explicit Workdir(const std::string& name) : path(fs::temp_directory_path() / ("chainlab_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~Workdir() { fs::remove_all(path); }
    fs::path operator/(const std::string& leaf) const { return path / leaf; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

int run(const std::string& args) {
    const std::string line = std::string("\"") + CHAINLAB_CLI + "\" " + args + " 2>/dev/null";
    const int status = std::system(line.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run(const std::string& cmd, const fs::path& config, const fs::path& out) {
    return run(cmd + " \"" + config.string() + "\" --out \"" + out.string() + "\"");
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (const char c : text) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("cli exit codes") {
    Workdir w("exit");
    put(w / "unknown.json", R"({"model": {"params": {"r_x": 2.0, "gamma": 1}}})");
    put(w / "malformed.json", R"({"steps": 10,)");
    put(w / "negative.json", R"({"steps": -5})");
    put(w / "clamp.json", R"({"intervention": {"clamp_values": [5000.0]}, "model": {"params": {"r_x": 2.0}}})");
    put(w / "flat.json", R"({"model": {"params": {"r_x": 0.5, "r_y": 0.475}}})");
    put(w / "no_rate.json", R"({"perturbations": [{"target": "K_x", "low": 0.8, "high": 1.0}]})");
    put(w / "ok.json", "{}");

    CHECK(run("simulate", w / "unknown.json", w / "o1") == 2);
    CHECK(run("simulate", w / "malformed.json", w / "o2") == 2);
    CHECK(run("simulate", w / "negative.json", w / "o3") == 2);
    CHECK(run("simulate", w / "missing.json", w / "o4") == 2);
    CHECK(run("perturb", w / "no_rate.json", w / "o8") == 2);
    CHECK(run("intervene", w / "clamp.json", w / "o5") == 3);
    CHECK(run("detect", w / "flat.json", w / "o6") == 4);
    CHECK(run("frobnicate \"" + (w / "ok.json").string() + "\"") == 2);
    CHECK(run("simulate", w / "ok.json", w / "o7") == 0);
}

TEST_CASE("cli simulate writes steps + 1 rows and echoes the defaults") {
    Workdir w("simulate");
    put(w / "c.json", R"({"model": {"params": {"r_x": 2.0, "r_y": 1.9}}})");
    REQUIRE(run("simulate", w / "c.json", w / "out") == 0);
    const auto csv = slurp(w / "out" / "trajectory.csv");
    CHECK(csv.rfind("n,x,y\n", 0) == 0);
    CHECK(count_lines(csv) == 2001 + 1);
    CHECK(csv.find("\n0,0.5,0.5\n") != std::string::npos);

    const auto echo = nlohmann::json::parse(slurp(w / "out" / "config.json"));
    CHECK(echo["steps"] == 2000);
    CHECK(echo["model"]["params"]["K_x"] == 0.95);
    CHECK(echo["model"]["params"]["a_yx"] == -0.1);
}

TEST_CASE("cli bifurcate defaults use the reference parameter family") {
    Workdir w("bifurcate");
    put(w / "c.json", R"({"sweep": {"n_r": 50}})");
    REQUIRE(run("bifurcate", w / "c.json", w / "out") == 0);
    const auto echo = nlohmann::json::parse(slurp(w / "out" / "config.json"));
    const auto& rule = echo["sweep"]["param_rule"];
    CHECK(rule["r_x_scale"] == 1.0);
    CHECK(rule["r_y_scale"] == 0.95);
    CHECK(rule["K_x"] == 0.95);
    CHECK(rule["K_y"] == 1.0);
    CHECK(rule["a_yx"] == -0.1);
    CHECK(rule["a_xy"] == 0.0);
    CHECK(echo["sweep"]["r_min"] == 1.5);
    CHECK(echo["sweep"]["r_max"] == 3.0);
    CHECK(echo["sweep"]["epsilon"] == 1e-4);
    const auto csv = slurp(w / "out" / "diagram.csv");
    CHECK(csv.rfind("r,chain,value\n1.5,x,", 0) == 0);
}

TEST_CASE("cli config echo reproduces the run") {
    Workdir w("echo");
    put(w / "c.json", R"({"seed": 11, "initial_jitter": 0.05,
        "perturbations": [{"target": "a_yx", "rate": 0.02, "low": -0.3, "high": 0.0}]})");
    for (const char* cmd : {"simulate", "perturb", "detect", "intervene"}) {
        CAPTURE(cmd);
        const fs::path data = std::string(cmd) == "detect" ? "report.json" : "trajectory.csv";
        REQUIRE(run(cmd, w / "c.json", w / "out") == 0);
        const auto original = slurp(w / "out" / data);
        const auto echo = slurp(w / "out" / "config.json");
        put(w / "echo.json", echo);
        REQUIRE(run(cmd, w / "echo.json", w / "out") == 0);
        CHECK(slurp(w / "out" / "config.json") == echo);
        CHECK(slurp(w / "out" / data) == original);
        fs::remove_all(w / "out");
    }
}

TEST_CASE("cli seed override changes jittered output") {
    Workdir w("seed");
    put(w / "c.json", R"({"initial_jitter": 0.1})");
    REQUIRE(run("simulate \"" + (w / "c.json").string() + "\" --seed 1 --out \"" + (w / "a").string() + "\"") == 0);
    REQUIRE(run("simulate \"" + (w / "c.json").string() + "\" --seed 2 --out \"" + (w / "b").string() + "\"") == 0);
    CHECK(slurp(w / "a" / "trajectory.csv") != slurp(w / "b" / "trajectory.csv"));
    CHECK(nlohmann::json::parse(slurp(w / "b" / "config.json"))["seed"] == 2);
}

TEST_CASE("cli perturb") {
    Workdir w("perturb");
    SUBCASE("without shocks equals simulate") {
        put(w / "c.json", "{}");
        REQUIRE(run("perturb", w / "c.json", w / "p") == 0);
        REQUIRE(run("simulate", w / "c.json", w / "s") == 0);
        CHECK(slurp(w / "p" / "trajectory.csv") == slurp(w / "s" / "trajectory.csv"));
        CHECK(slurp(w / "p" / "events.csv") == "iteration,target,value\n");
    }
    SUBCASE("event log lists every applied shock") {
        put(w / "c.json", R"({"steps": 3000, "perturbations": [
            {"target": "K_x", "rate": 0.01, "low": 0.8, "high": 1.1, "seed": 3},
            {"target": "r_y", "rate": 0.004, "low": 2.0, "high": 3.0, "seed": 4}]})");
        REQUIRE(run("perturb", w / "c.json", w / "p") == 0);
        std::istringstream log(slurp(w / "p" / "events.csv"));
        const auto schedules = read_schedules(log);
        std::size_t rows = 0;
        for (const auto& s : schedules) rows += s.events.size();
        const auto k = generate_schedule(ScheduleSpec{ShockTarget::K_x, 0.01, 0.8, 1.1, 3}, 3000);
        const auto r = generate_schedule(ScheduleSpec{ShockTarget::r_y, 0.004, 2.0, 3.0, 4}, 3000);
        CHECK(rows > 10);
        CHECK(rows == k.events.size() + r.events.size());
    }
    SUBCASE("schedule file round trip") {
        put(w / "shocks.csv", "iteration,target,value\n5,K_y,1.2\n9,K_y,0.9\n");
        put(w / "c.json", R"({"steps": 20, "schedule_file": ")" + (w / "shocks.csv").string() + R"("})");
        REQUIRE(run("perturb", w / "c.json", w / "p") == 0);
        CHECK(slurp(w / "p" / "events.csv") == "iteration,target,value\n5,K_y,1.2\n9,K_y,0.9\n");
    }
}

TEST_CASE("cli intervene") {
    Workdir w("intervene");
    SUBCASE("clamping x with no x -> y coupling leaves y alone") {
        put(w / "c.json", R"({"intervention": {"clamp_chain": "x", "probe_chain": "y", "clamp_values": [0.3, 1.2]}})");
        REQUIRE(run("intervene", w / "c.json", w / "o") == 0);
        const auto doc = nlohmann::json::parse(slurp(w / "o" / "shift.json"));
        CHECK(doc["shift"] == 0.0);
        CHECK(doc["causal_influence"] == false);
    }
    SUBCASE("clamping y at K_y in the stable regime settles x at K_x - a_yx K_y") {
        put(w / "c.json", R"({"model": {"params": {"r_x": 0.5, "r_y": 0.475}},
            "intervention": {"clamp_values": [1.0]}})");
        REQUIRE(run("intervene", w / "c.json", w / "o") == 0);
        const auto csv = slurp(w / "o" / "trajectory.csv");
        const auto last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
        const auto x = parse_number(last.substr(last.find(',') + 1, last.rfind(',') - last.find(',') - 1));
        CHECK(std::abs(x - 1.05) < 1e-6);
        CHECK(last.substr(last.rfind(',') + 1) == "1\n");
    }
}

TEST_CASE("cli detect report layout") {
    Workdir w("detect");
    put(w / "c.json", "{}");
    REQUIRE(run("detect", w / "c.json", w / "o") == 0);
    const auto doc = nlohmann::json::parse(slurp(w / "o" / "report.json"));
    for (const char* key : {"xcorr", "granger", "ccm", "interventional", "verdict", "config"})
        CHECK_MESSAGE(doc.contains(key), key);
    CHECK(doc["verdict"]["overall"] == "y->x");
    CHECK(doc["verdict"]["ccm"] == "y->x");
}

}  // namespace chainlab

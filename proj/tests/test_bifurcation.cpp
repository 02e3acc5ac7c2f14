#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chainlab/bifurcation.hpp"
#include "chainlab/io.hpp"

namespace chainlab {

namespace {

const ChainStated kStart{0.5, 0.5, 0};

SweepSpec small_spec() {
    SweepSpec s;
    s.n_r = 151;
    s.threads = 1;
    return s;
}

// Number of distinct quantised values of an uncoupled single chain, by
// direct iteration.
std::size_t direct_count(double r, double K, std::int64_t burn, std::int64_t keep, double eps) {
    double x = 0.5;
    for (std::int64_t i = 0; i < burn; ++i) x = step_lde(x, r, K);
    std::vector<std::int64_t> keys;
    for (std::int64_t i = 0; i < keep; ++i) {
        x = step_lde(x, r, K);
        keys.push_back(std::llround(x / eps));
    }
    std::sort(keys.begin(), keys.end());
    return static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

}  // namespace

TEST_CASE("fixed-point regime gives one value per chain at the algebraic fixed point") {
    SweepSpec spec = small_spec();
    spec.r_min = 1.5;
    spec.r_max = 1.8;
    spec.n_r = 7;
    const auto d = sweep(spec, kStart);
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        CHECK(d.values(i, Chain::x) == std::vector<double>{1.05});
        CHECK(d.values(i, Chain::y) == std::vector<double>{1.0});
    }
}

TEST_CASE("y chain flips to period 2 at r_y K_y = 2") {
    const double critical = 2.0 / 0.95;
    SweepSpec spec;
    spec.r_min = 2.09;
    spec.r_max = 2.12;
    spec.n_r = 31;
    spec.n_burn = 200000;
    spec.n_keep = 200;
    const auto census = attractor_census(sweep(spec, kStart));
    const auto first = std::find_if(census.begin(), census.end(), [](const CensusRow& r) { return r.y_count >= 2; });
    REQUIRE(first != census.end());
    const double width = (spec.r_max - spec.r_min) / spec.n_r;
    CHECK(std::abs(first->r - critical) <= width);

    // Oracle: iterate the uncoupled y map on either side of the threshold.
    CHECK(direct_count(0.95 * (critical - width), 1.0, 200000, 200, 1e-4) == 1);
    CHECK(direct_count(0.95 * (critical + 2 * width), 1.0, 200000, 200, 1e-4) == 2);
}

TEST_CASE("census in fixed-point, period-2 and chaotic cells") {
    SweepSpec spec;
    spec.r_min = 1.6;
    spec.r_max = 3.0;
    spec.n_r = 3;  // r = 1.6, 2.3, 3.0
    const auto census = attractor_census(sweep(spec, kStart));
    CHECK(census[0].y_count == 1);
    CHECK(census[1].y_count == 2);
    CHECK(direct_count(0.95 * 2.3, 1.0, 1000, 500, 1e-4) == 2);
    CHECK(census[2].y_count > 50);
    CHECK(census[2].x_count > 50);
}

TEST_CASE("identical chains give identical attractor sets") {
    SweepSpec spec = small_spec();
    spec.param_rule = LinearParamRule{1.0, 1.0, 1.0, 1.0, 0.0, 0.0};
    const auto d = sweep(spec, kStart);
    for (const auto& cell : d.cells) CHECK(cell.x_keys == cell.y_keys);
}

TEST_CASE("diagram does not depend on evaluation order or thread count") {
    SweepSpec spec = small_spec();
    const auto serial = sweep(spec, kStart);
    spec.threads = 4;
    CHECK(sweep(spec, kStart) == serial);

    for (int i = spec.n_r - 1; i >= 0; i -= 7) CHECK(sweep_cell(spec, kStart, i) == serial.cells[i]);
}

TEST_CASE("quantised values are exact multiples and sets are bounded") {
    SweepSpec spec = small_spec();
    spec.n_keep = 300;
    const auto d = sweep(spec, kStart);
    for (std::size_t i = 0; i < d.cells.size(); ++i) {
        for (const Chain c : {Chain::x, Chain::y}) {
            const auto& keys = d.cells[i].keys(c);
            CHECK(keys.size() <= 300);
            CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
            for (const double v : d.values(i, c)) CHECK(v == d.epsilon * std::round(v / d.epsilon));
        }
    }
}

TEST_CASE("doubling n_keep never lowers a count") {
    SweepSpec spec = small_spec();
    spec.n_keep = 250;
    const auto coarse = attractor_census(sweep(spec, kStart));
    spec.n_keep = 500;
    const auto fine = attractor_census(sweep(spec, kStart));
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        CHECK(fine[i].x_count >= coarse[i].x_count);
        CHECK(fine[i].y_count >= coarse[i].y_count);
    }
}

TEST_CASE("stable region has census one on both chains") {
    // Both chains are stable while r_x x* < 2 and r_y K_y < 2.
    SweepSpec spec = small_spec();
    spec.r_min = 0.2;
    spec.r_max = 2.0 / 1.05 - 0.03;
    const auto census = attractor_census(sweep(spec, kStart));
    for (const auto& row : census) {
        CHECK(row.x_count == 1);
        CHECK(row.y_count == 1);
    }
}

TEST_CASE("continuation runs sequentially and agrees in the fixed-point regime") {
    SweepSpec spec = small_spec();
    spec.r_max = 1.85;
    spec.n_r = 20;
    const auto independent = sweep(spec, kStart);
    spec.continuation = true;
    CHECK(sweep(spec, kStart) == independent);
}

TEST_CASE("diverged cells are gaps") {
    SweepSpec spec = small_spec();
    spec.r_min = 0.5;
    spec.r_max = 3.0;
    spec.n_r = 6;
    spec.param_rule = [](double r) { return ChainParamsd{r, r, 1.0, 1.0, r > 2.0 ? -1000.0 : 0.0, 0.0}; };
    const auto d = sweep(spec, kStart);
    for (const auto& cell : d.cells) {
        CHECK(cell.diverged == (cell.r > 2.0));
        if (cell.diverged) {
            CHECK(cell.x_keys.empty());
            CHECK(cell.diverged_at.has_value());
        }
    }
    std::ostringstream os;
    write_diagram_csv(os, d);
    CHECK(os.str().find("\n3,") == std::string::npos);
}

TEST_CASE("diagram CSV is sorted with six significant digits") {
    SweepSpec spec = small_spec();
    spec.r_min = 2.2;
    spec.r_max = 2.3;
    spec.n_r = 2;
    const auto d = sweep(spec, kStart);
    std::ostringstream os;
    write_diagram_csv(os, d);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "r,chain,value");
    std::vector<std::tuple<double, std::string, double>> rows;
    while (std::getline(in, line)) {
        const auto a = line.find(','), b = line.rfind(',');
        rows.emplace_back(std::stod(line.substr(0, a)), line.substr(a + 1, b - a - 1), std::stod(line.substr(b + 1)));
        CHECK(line.size() - b - 1 <= 8);
    }
    CHECK(std::is_sorted(rows.begin(), rows.end()));
    std::size_t expected = 0;
    for (const auto& c : d.cells) expected += c.x_keys.size() + c.y_keys.size();
    CHECK(rows.size() == expected);
}

TEST_CASE("invalid sweeps are rejected") {
    SweepSpec spec;
    spec.r_min = 3.0;
    spec.r_max = 1.0;
    CHECK_THROWS_AS(sweep(spec, kStart), DomainViolation);
    spec = SweepSpec{};
    spec.n_r = 1;
    CHECK_THROWS_AS(sweep(spec, kStart), DomainViolation);
    spec = SweepSpec{};
    spec.epsilon = 0.0;
    CHECK_THROWS_AS(sweep(spec, kStart), DomainViolation);
}

}  // namespace chainlab

#ifndef CHAINLAB_BIFURCATION_HPP
#define CHAINLAB_BIFURCATION_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "chainlab/dynamics.hpp"

namespace chainlab {

/// Maps the swept growth value r onto full chain parameters:
/// r_x = r_x_scale * r, r_y = r_y_scale * r, everything else fixed.
/// The defaults give ChainParams::reference_family.
struct LinearParamRule {
    double r_x_scale = 1.0;
    double r_y_scale = 0.95;
    double K_x = 0.95;
    double K_y = 1.00;
    double a_yx = -0.1;
    double a_xy = 0.0;

    ChainParamsd operator()(double r) const {
        return {r_x_scale * r, r_y_scale * r, K_x, K_y, a_yx, a_xy};
    }
};

struct SweepSpec {
    double r_min = 1.5;
    double r_max = 3.0;
    int n_r = 1500;
    std::int64_t n_burn = 1000;
    std::int64_t n_keep = 500;
    double epsilon = 1e-4;
    std::function<ChainParamsd(double)> param_rule = LinearParamRule{};
    // Start each cell from the previous cell's final state instead of the
    // shared initial state. Forces sequential evaluation.
    bool continuation = false;
    // Worker threads; 0 reads CHAINLAB_THREADS, then hardware concurrency.
    unsigned threads = 0;

    void validate() const;
    double r_at(int index) const;
};

/// Quantised attractor samples for one r value. Keys are multiples of
/// epsilon (value = key * epsilon), sorted and duplicate-free.
struct BifurcationCell {
    double r = 0.0;
    std::vector<std::int64_t> x_keys;
    std::vector<std::int64_t> y_keys;
    bool diverged = false;
    std::optional<std::int64_t> diverged_at;

    const std::vector<std::int64_t>& keys(Chain c) const { return c == Chain::x ? x_keys : y_keys; }
    friend bool operator==(const BifurcationCell&, const BifurcationCell&) = default;
};

struct BifurcationDiagram {
    double epsilon = 1e-4;
    std::vector<BifurcationCell> cells;

    /// Dequantised attractor values of one chain in one cell.
    std::vector<double> values(std::size_t cell, Chain c) const;
    friend bool operator==(const BifurcationDiagram&, const BifurcationDiagram&) = default;
};

/// Round-half-away-from-zero to the nearest multiple of epsilon.
std::int64_t quantize(double value, double epsilon);

BifurcationDiagram sweep(const SweepSpec& spec, const ChainStated& initial);

/// Evaluates a single grid cell from `initial`, independent of its neighbours.
BifurcationCell sweep_cell(const SweepSpec& spec, const ChainStated& initial, int index);

struct CensusRow {
    double r = 0.0;
    std::size_t x_count = 0;
    std::size_t y_count = 0;
    bool diverged = false;

    std::size_t count(Chain c) const { return c == Chain::x ? x_count : y_count; }
};

std::vector<CensusRow> attractor_census(const BifurcationDiagram& diagram);

unsigned resolve_thread_count(unsigned requested);

}  // namespace chainlab

#endif  // CHAINLAB_BIFURCATION_HPP

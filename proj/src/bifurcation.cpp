#include "chainlab/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace chainlab {

void SweepSpec::validate() const {
    if (!(r_min < r_max)) throw DomainViolation("sweep requires r_min < r_max");
    if (n_r < 2) throw DomainViolation("sweep requires n_r >= 2");
    if (!(epsilon > 0)) throw DomainViolation("sweep requires epsilon > 0");
    if (n_burn < 0 || n_keep < 1) throw DomainViolation("sweep requires n_burn >= 0 and n_keep >= 1");
    if (!param_rule) throw DomainViolation("sweep requires a parameter rule");
}

double SweepSpec::r_at(int index) const {
    return r_min + (r_max - r_min) * static_cast<double>(index) / static_cast<double>(n_r - 1);
}

std::int64_t quantize(double value, double epsilon) {
    return std::llround(value / epsilon);
}

std::vector<double> BifurcationDiagram::values(std::size_t cell, Chain c) const {
    const auto& keys = cells.at(cell).keys(c);
    std::vector<double> out;
    out.reserve(keys.size());
    for (auto k : keys) out.push_back(static_cast<double>(k) * epsilon);
    return out;
}

namespace {

void sort_unique(std::vector<std::int64_t>& keys) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
}

// Runs one cell and reports the final state for sweep continuation.
BifurcationCell run_cell(const SweepSpec& spec, ChainStated start, int index, ChainStated* final_state) {
    BifurcationCell cell;
    cell.r = spec.r_at(index);
    const ChainParamsd params = spec.param_rule(cell.r);
    params.validate();

    ChainStated s{start.x, start.y, 0};
    const std::int64_t total = spec.n_burn + spec.n_keep;
    cell.x_keys.reserve(static_cast<std::size_t>(spec.n_keep));
    cell.y_keys.reserve(static_cast<std::size_t>(spec.n_keep));
    try {
        for (std::int64_t n = 0; n < total; ++n) {
            s = step_coupled_lde(s, params);
            if (s.n > spec.n_burn) {
                cell.x_keys.push_back(quantize(s.x, spec.epsilon));
                cell.y_keys.push_back(quantize(s.y, spec.epsilon));
            }
        }
    } catch (const NonFinite& e) {
        cell.diverged = true;
        cell.diverged_at = e.index();
        cell.x_keys.clear();
        cell.y_keys.clear();
        if (final_state) *final_state = start;
        return cell;
    }
    sort_unique(cell.x_keys);
    sort_unique(cell.y_keys);
    if (final_state) *final_state = s;
    return cell;
}

}  // namespace

unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CHAINLAB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

BifurcationCell sweep_cell(const SweepSpec& spec, const ChainStated& initial, int index) {
    spec.validate();
    if (index < 0 || index >= spec.n_r) throw DomainViolation("sweep cell index out of range");
    return run_cell(spec, initial, index, nullptr);
}

BifurcationDiagram sweep(const SweepSpec& spec, const ChainStated& initial) {
    spec.validate();
    detail::check_state(initial);
    BifurcationDiagram diagram;
    diagram.epsilon = spec.epsilon;
    diagram.cells.resize(static_cast<std::size_t>(spec.n_r));
    for (int i = 0; i < spec.n_r; ++i) spec.param_rule(spec.r_at(i)).validate();

    if (spec.continuation) {
        ChainStated carry = initial;
        for (int i = 0; i < spec.n_r; ++i) diagram.cells[i] = run_cell(spec, carry, i, &carry);
        return diagram;
    }

    const unsigned n_threads = std::min<unsigned>(resolve_thread_count(spec.threads), spec.n_r);
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int i = next++; i < spec.n_r; i = next++) diagram.cells[i] = run_cell(spec, initial, i, nullptr);
    };
    if (n_threads <= 1) {
        worker();
        return diagram;
    }
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    pool.clear();
    return diagram;
}

std::vector<CensusRow> attractor_census(const BifurcationDiagram& diagram) {
    std::vector<CensusRow> rows;
    rows.reserve(diagram.cells.size());
    for (const auto& cell : diagram.cells)
        rows.push_back({cell.r, cell.x_keys.size(), cell.y_keys.size(), cell.diverged});
    return rows;
}

}  // namespace chainlab

#ifndef CHAINLAB_IO_HPP
#define CHAINLAB_IO_HPP

// Locale-independent text output. CSV files use '\n' line endings, a single
// header row, and numbers at no more than 6 significant digits.

#include <ostream>
#include <string>
#include <string_view>

#include "chainlab/bifurcation.hpp"
#include "chainlab/dynamics.hpp"

namespace chainlab {

/// Shortest representation of `value` at 6 significant digits.
std::string format_number(double value);

/// Rounds to 6 significant digits (the value `format_number` prints).
double round_significant(double value);

/// Parses a complete decimal string; throws ConfigError on trailing junk.
double parse_number(std::string_view text);

/// Columns `n,x,y`.
void write_trajectory_csv(std::ostream& out, const Trajectoryd& traj);

/// Columns `r,chain,value`, sorted by (r, chain, value). Diverged cells
/// contribute no rows.
void write_diagram_csv(std::ostream& out, const BifurcationDiagram& diagram);

}  // namespace chainlab

#endif  // CHAINLAB_IO_HPP

#include "chainlab/io.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace chainlab {

std::string format_number(double value) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 6);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    std::string out(buf, end);
    if (out == "-0") out = "0";
    return out;
}

double round_significant(double value) {
    if (!std::isfinite(value)) return value;
    return parse_number(format_number(value));
}

double parse_number(std::string_view text) {
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw ConfigError("not a number: '" + std::string(text) + "'");
    return value;
}

void write_trajectory_csv(std::ostream& out, const Trajectoryd& traj) {
    out << "n,x,y\n";
    for (Eigen::Index n = 0; n < traj.size(); ++n)
        out << n << ',' << format_number(traj.samples(n, 0)) << ',' << format_number(traj.samples(n, 1)) << '\n';
}

void write_diagram_csv(std::ostream& out, const BifurcationDiagram& diagram) {
    out << "r,chain,value\n";
    for (const auto& cell : diagram.cells) {
        if (cell.diverged) continue;
        const std::string r = format_number(cell.r);
        for (const Chain c : {Chain::x, Chain::y})
            for (const auto key : cell.keys(c))
                out << r << ',' << chain_name(c) << ',' << format_number(static_cast<double>(key) * diagram.epsilon)
                    << '\n';
    }
}

}  // namespace chainlab

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "frapdesign/optimizer.hpp"

namespace frapdesign {

/// One curve of a line chart. NaN y values break the line.
struct SvgSeries {
    std::string label;
    std::string color;
    bool dashed = false;
    std::vector<std::pair<double, double>> points;
};

/// Minimal hand-rolled SVG line chart: axes, ticks, labelled series,
/// optional vertical marker lines. No external renderer involved.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<SvgSeries>& series,
                              const std::vector<double>& vertical_marks = {});

// Figure renderers for the sweep products (written atomically).
void write_fig1_svg(const BetaSweepResult& sweep, const std::string& path);
void write_fig2_svg(const BetaSweepResult& sweep, const std::string& path);
void write_fig3_svg(const BetaSweepResult& sweep, const std::string& path);
void write_problem2_svg(const EnergyConstrainedMap& map, const std::string& path);

}  // namespace frapdesign

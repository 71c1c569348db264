#include "frapdesign/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "frapdesign/io_util.hpp"
#include "frapdesign/sensitivity.hpp"

namespace frapdesign {

namespace {

constexpr double kWidth = 820, kHeight = 560;
constexpr double kLeft = 78, kRight = 30, kTop = 48, kBottom = 64;

const char* kNColor[4] = {"#8a2be2", "#2ca02c", "#1f77b4", "#d62728"};  // N = 1..4

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Bounds {
    double xlo = std::numeric_limits<double>::infinity();
    double xhi = -std::numeric_limits<double>::infinity();
    double ylo = std::numeric_limits<double>::infinity();
    double yhi = -std::numeric_limits<double>::infinity();

    void include(double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        ylo = std::min(ylo, y);
        yhi = std::max(yhi, y);
    }
    bool valid() const { return xlo < xhi && ylo <= yhi; }
};

double nice_step(double range, int target_ticks) {
    const double raw = range / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

class Canvas {
public:
    Canvas(const Bounds& b) : b_(b) {
        if (b_.yhi == b_.ylo) {
            b_.ylo -= 1.0;
            b_.yhi += 1.0;
        }
    }

    double px(double x) const {
        return kLeft + (x - b_.xlo) / (b_.xhi - b_.xlo) * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        return kHeight - kBottom - (y - b_.ylo) / (b_.yhi - b_.ylo) * (kHeight - kTop - kBottom);
    }

    void axes(std::ostringstream& out, const std::string& x_label, const std::string& y_label) {
        out << "<rect x='0' y='0' width='" << kWidth << "' height='" << kHeight
            << "' fill='white'/>\n";
        out << "<line x1='" << kLeft << "' y1='" << kHeight - kBottom << "' x2='" << kWidth - kRight
            << "' y2='" << kHeight - kBottom << "' stroke='black'/>\n";
        out << "<line x1='" << kLeft << "' y1='" << kTop << "' x2='" << kLeft << "' y2='"
            << kHeight - kBottom << "' stroke='black'/>\n";
        const double xs = nice_step(b_.xhi - b_.xlo, 8);
        for (double x = std::ceil(b_.xlo / xs) * xs; x <= b_.xhi + 1e-9; x += xs) {
            out << "<line x1='" << px(x) << "' y1='" << kHeight - kBottom << "' x2='" << px(x)
                << "' y2='" << kHeight - kBottom + 5 << "' stroke='black'/>\n";
            out << "<text x='" << px(x) << "' y='" << kHeight - kBottom + 20
                << "' font-size='12' text-anchor='middle'>" << num(x) << "</text>\n";
        }
        const double ys = nice_step(b_.yhi - b_.ylo, 7);
        for (double y = std::ceil(b_.ylo / ys) * ys; y <= b_.yhi + 1e-9; y += ys) {
            out << "<line x1='" << kLeft - 5 << "' y1='" << py(y) << "' x2='" << kLeft << "' y2='"
                << py(y) << "' stroke='black'/>\n";
            out << "<text x='" << kLeft - 8 << "' y='" << py(y) + 4
                << "' font-size='12' text-anchor='end'>" << num(y) << "</text>\n";
        }
        out << "<text x='" << (kLeft + kWidth - kRight) / 2 << "' y='" << kHeight - 18
            << "' font-size='14' text-anchor='middle'>" << x_label << "</text>\n";
        out << "<text x='20' y='" << (kTop + kHeight - kBottom) / 2
            << "' font-size='14' text-anchor='middle' transform='rotate(-90 20 "
            << (kTop + kHeight - kBottom) / 2 << ")'>" << y_label << "</text>\n";
    }

    const Bounds& bounds() const { return b_; }

private:
    Bounds b_;
};

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<SvgSeries>& series,
                              const std::vector<double>& vertical_marks) {
    Bounds bounds;
    for (const SvgSeries& s : series)
        for (const auto& [x, y] : s.points) bounds.include(x, y);
    if (!bounds.valid()) bounds = {0, 1, 0, 1};

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "' viewBox='0 0 " << kWidth << ' ' << kHeight << "'>\n";
    Canvas canvas(bounds);
    canvas.axes(out, x_label, y_label);
    out << "<text x='" << kWidth / 2 << "' y='24' font-size='16' text-anchor='middle'>" << title
        << "</text>\n";

    for (double mark : vertical_marks) {
        if (mark < canvas.bounds().xlo || mark > canvas.bounds().xhi) continue;
        out << "<line x1='" << canvas.px(mark) << "' y1='" << kTop << "' x2='" << canvas.px(mark)
            << "' y2='" << kHeight - kBottom
            << "' stroke='#999999' stroke-dasharray='3,3'/>\n";
    }

    double legend_y = kTop + 8;
    for (const SvgSeries& s : series) {
        out << "<path d='";
        bool pen_down = false;
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(y) || !std::isfinite(x)) {
                pen_down = false;
                continue;
            }
            out << (pen_down ? 'L' : 'M') << canvas.px(x) << ' ' << canvas.py(y) << ' ';
            pen_down = true;
        }
        out << "' fill='none' stroke='" << s.color << "' stroke-width='"
            << (s.dashed ? 1.2 : 2.0) << "'";
        if (s.dashed) out << " stroke-dasharray='6,4'";
        out << "/>\n";
        if (!s.label.empty()) {
            out << "<line x1='" << kWidth - kRight - 150 << "' y1='" << legend_y << "' x2='"
                << kWidth - kRight - 120 << "' y2='" << legend_y << "' stroke='" << s.color
                << "' stroke-width='2'" << (s.dashed ? " stroke-dasharray='6,4'" : "") << "/>\n";
            out << "<text x='" << kWidth - kRight - 114 << "' y='" << legend_y + 4
                << "' font-size='12'>" << s.label << "</text>\n";
            legend_y += 16;
        }
    }
    out << "</svg>\n";
    return out.str();
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void write_fig1_svg(const BetaSweepResult& sweep, const std::string& path) {
    std::vector<SvgSeries> series;
    for (int n = 1; n <= 4; ++n) {
        SvgSeries s;
        s.label = "best N=" + std::to_string(n);
        s.color = kNColor[n - 1];
        s.dashed = true;
        for (const DesignSweepResult& res : sweep.results) {
            double y = kNaN;
            if (n <= static_cast<int>(res.per_n_best.size()) &&
                res.per_n_best[n - 1].kernel_sum > 0.0)
                y = std::log(res.per_n_best[n - 1].kernel_sum);
            s.points.emplace_back(res.beta, y);
        }
        series.push_back(std::move(s));
    }
    SvgSeries overall;
    overall.label = "overall";
    overall.color = "#000000";
    for (const DesignSweepResult& res : sweep.results)
        overall.points.emplace_back(
            res.beta,
            res.overall_best.kernel_sum > 0.0 ? std::log(res.overall_best.kernel_sum) : kNaN);
    series.push_back(std::move(overall));

    std::vector<double> marks;
    for (const Transition& t : sweep.transitions) marks.push_back(t.beta);
    atomic_write_file(path, render_line_chart("Optimal design value", "beta",
                                              "log kernel sum", series, marks));
}

void write_fig2_svg(const BetaSweepResult& sweep, const std::string& path) {
    std::vector<SvgSeries> series;
    for (int slot = 0; slot < 4; ++slot) {
        SvgSeries s;
        s.label = "r" + std::to_string(slot + 1);
        s.color = kNColor[slot];
        for (const DesignSweepResult& res : sweep.results) {
            const auto& radii = res.overall_best.radii;
            s.points.emplace_back(res.beta,
                                  slot < static_cast<int>(radii.size()) ? radii[slot] : kNaN);
        }
        series.push_back(std::move(s));
    }
    std::vector<double> marks;
    for (const Transition& t : sweep.transitions) marks.push_back(t.beta);
    atomic_write_file(path, render_line_chart("Optimal design radii", "beta", "scaled radius",
                                              series, marks));
}

void write_fig3_svg(const BetaSweepResult& sweep, const std::string& path) {
    SvgSeries s;
    s.label = "energy";
    s.color = "#1f77b4";
    for (const DesignSweepResult& res : sweep.results) {
        double energy = kNaN;
        if (!res.overall_best.radii.empty())
            energy = shape_energy(BleachShape(res.overall_best.radii));
        s.points.emplace_back(res.beta, energy);
    }
    std::vector<double> marks;
    for (const Transition& t : sweep.transitions) marks.push_back(t.beta);
    atomic_write_file(path, render_line_chart("Energy of the optimal design", "beta",
                                              "energy (scaled L1 norm)", {s}, marks));
}

void write_problem2_svg(const EnergyConstrainedMap& map, const std::string& path) {
    Bounds bounds;
    const double half_beta =
        map.beta_grid.size() > 1 ? 0.5 * (map.beta_grid[1] - map.beta_grid[0]) : 0.5;
    bounds.include(map.beta_grid.front() - half_beta, map.energy_grid.lo);
    bounds.include(map.beta_grid.back() + half_beta, map.energy_grid.hi);

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "' viewBox='0 0 " << kWidth << ' ' << kHeight << "'>\n";
    Canvas canvas(bounds);
    canvas.axes(out, "beta", "energy");
    out << "<text x='" << kWidth / 2
        << "' y='24' font-size='16' text-anchor='middle'>Optimal component count under an energy "
           "constraint</text>\n";

    for (std::size_t s = 0; s < map.slices.size(); ++s) {
        const double beta = map.beta_grid[s];
        const double x0 = canvas.px(beta - half_beta);
        const double x1 = canvas.px(beta + half_beta);
        for (int b = 0; b < map.energy_grid.bins; ++b) {
            const EnergyCell& cell = map.slices[s].cells[b];
            if (cell.n_star == 0) continue;
            const double y0 = canvas.py(map.energy_grid.lo + (b + 1) * map.energy_grid.width());
            const double y1 = canvas.py(map.energy_grid.lo + b * map.energy_grid.width());
            out << "<rect x='" << x0 << "' y='" << y0 << "' width='" << (x1 - x0) << "' height='"
                << (y1 - y0) << "' fill='" << kNColor[std::min(cell.n_star, 4) - 1] << "'/>\n";
        }
    }
    double legend_y = kTop + 8;
    for (int n = 1; n <= 4; ++n) {
        out << "<rect x='" << kWidth - kRight - 150 << "' y='" << legend_y - 9
            << "' width='12' height='12' fill='" << kNColor[n - 1] << "'/>\n";
        out << "<text x='" << kWidth - kRight - 132 << "' y='" << legend_y + 2
            << "' font-size='12'>N = " << n << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
    atomic_write_file(path, out.str());
}

}  // namespace frapdesign

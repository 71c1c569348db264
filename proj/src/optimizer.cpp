#include "frapdesign/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "frapdesign/kernel.hpp"
#include "frapdesign/parallel.hpp"

namespace frapdesign {

namespace {

// Depth-first enumeration of strictly increasing index tuples with
// incremental value updates: row[j] accumulates sum_{a<=p} (-1)^a k[idx_a][j],
// so adding index i at (1-based) position p costs d[i] + 2 (-1)^p row_{p-1}[i].
// fn(indices, value) is invoked for every tuple of the requested length.
template <class F>
void enumerate_tuples(const double* k, int n, int first, int length, F&& fn) {
    std::vector<double> rows(static_cast<std::size_t>(length) * n, 0.0);
    std::vector<int> indices(length, 0);
    auto descend = [&](auto&& self, int p, int start, double value_prefix) -> void {
        const double sign = (p % 2 == 0) ? 1.0 : -1.0;
        const double* prev_row = (p >= 2) ? &rows[(p - 2) * static_cast<std::size_t>(n)] : nullptr;
        double* row = &rows[(p - 1) * static_cast<std::size_t>(n)];
        for (int i = start; i <= n - 1 - (length - p); ++i) {
            const double* ki = k + static_cast<std::size_t>(i) * n;
            const double cross = prev_row ? 2.0 * sign * prev_row[i] : 0.0;
            const double value = value_prefix + ki[i] + cross;
            indices[p - 1] = i;
            if (p == length) {
                fn(indices, value);
                continue;
            }
            if (prev_row)
                for (int j = i + 1; j < n; ++j) row[j] = prev_row[j] + sign * ki[j];
            else
                for (int j = i + 1; j < n; ++j) row[j] = sign * ki[j];
            self(self, p + 1, i + 1, value);
        }
    };
    descend(descend, 1, first, 0.0);
}

}  // namespace

DesignSweepResult solve_problem1(const KernelTable& table, double beta,
                                 const SearchOptions& options) {
    if (options.n_max < 1) throw std::invalid_argument("solve_problem1: n_max must be >= 1");
    if (options.n_max > 4)
        std::cerr << "solve_problem1: n_max = " << options.n_max
                  << " enumerates O(grid^" << options.n_max << ") tuples; expect long runtimes\n";

    const int ib = table.beta_index(beta);
    const double* slice = table.slice(ib);
    const int n = table.nr();
    const int first = (table.r_grid().front() == 0.0) ? 1 : 0;  // radii must be positive

    DesignSweepResult result;
    result.beta = table.beta_grid()[ib];
    result.per_n_best.resize(options.n_max);

    for (int len = 1; len <= options.n_max; ++len) {
        PerNBest& best = result.per_n_best[len - 1];
        best.n = len;
        std::vector<int> best_idx;
        enumerate_tuples(slice, n, first, len, [&](const std::vector<int>& idx, double value) {
            if (value > best.kernel_sum) {
                best.kernel_sum = value;
                best_idx = idx;
            }
        });
        best.radii.reserve(len);
        for (int i : best_idx) best.radii.push_back(table.r_grid()[i]);
    }

    double max_value = -std::numeric_limits<double>::infinity();
    for (const PerNBest& b : result.per_n_best) max_value = std::max(max_value, b.kernel_sum);
    const double slack = options.near_tie_rel * std::abs(max_value);
    for (const PerNBest& b : result.per_n_best) {
        if (b.kernel_sum >= max_value - slack) {
            result.overall_best = b;
            break;
        }
    }
    result.s_int = 32.0 * M_PI * std::pow(result.beta, 3) * result.overall_best.kernel_sum;
    return result;
}

BetaSweepResult sweep_beta(const KernelTable& table, const SearchOptions& options, double beta_min,
                           double beta_max, unsigned n_threads) {
    std::vector<int> picks;
    for (int b = 0; b < table.nb(); ++b) {
        const double beta = table.beta_grid()[b];
        if (beta >= beta_min && beta <= beta_max) picks.push_back(b);
    }
    if (picks.empty()) throw std::invalid_argument("sweep_beta: no beta grid points in range");

    BetaSweepResult sweep;
    sweep.results.resize(picks.size());
    parallel_for(
        picks.size(),
        [&](std::size_t i) {
            sweep.results[i] = solve_problem1(table, table.beta_grid()[picks[i]], options);
        },
        n_threads);

    const double step = (table.nb() > 1) ? table.beta_grid()[1] - table.beta_grid()[0] : 0.0;
    for (std::size_t i = 1; i < sweep.results.size(); ++i) {
        const int prev = sweep.results[i - 1].overall_best.n;
        const int cur = sweep.results[i].overall_best.n;
        if (cur != prev) {
            Transition t;
            t.beta = 0.5 * (sweep.results[i - 1].beta + sweep.results[i].beta);
            t.uncertainty = step;
            t.n_from = prev;
            t.n_to = cur;
            sweep.transitions.push_back(t);
            if (cur < prev) sweep.monotonicity_anomaly = true;
        }
    }
    return sweep;
}

EnergyGridSpec EnergyGridSpec::paper_default(double r_max) {
    EnergyGridSpec spec;
    spec.lo = 0.25 * M_PI;
    spec.hi = 0.9 * M_PI * r_max * r_max;
    spec.bins = 100;
    return spec;
}

namespace {

struct EnvelopePoint {
    double energy;
    double value;
    std::vector<int> indices;
};

// best configuration per exact achieved energy, for one N
class EnergyEnvelope {
public:
    explicit EnergyEnvelope(int lattice_size)
        : value_(lattice_size, -std::numeric_limits<double>::infinity()),
          tuple_(lattice_size) {}

    void offer(int lattice, const std::vector<int>& idx, double value) {
        if (value > value_[lattice]) {
            value_[lattice] = value;
            tuple_[lattice] = idx;
        }
    }

    std::vector<EnvelopePoint> points(double energy_per_lattice) const {
        std::vector<EnvelopePoint> pts;
        for (std::size_t l = 0; l < value_.size(); ++l)
            if (value_[l] > -std::numeric_limits<double>::infinity())
                pts.push_back({energy_per_lattice * static_cast<double>(l), value_[l], tuple_[l]});
        return pts;
    }

private:
    std::vector<double> value_;
    std::vector<std::vector<int>> tuple_;
};

}  // namespace

EnergySlice solve_problem2(const KernelTable& table, double beta, const EnergyGridSpec& grid,
                           const SearchOptions& options) {
    if (grid.bins < 1 || !(grid.hi > grid.lo))
        throw std::invalid_argument("solve_problem2: bad energy grid");
    const auto& rg = table.r_grid();
    if (rg.front() != 0.0)
        throw std::invalid_argument("solve_problem2: r grid must start at 0");
    const double step = rg[1] - rg[0];
    for (std::size_t i = 1; i < rg.size(); ++i)
        if (std::abs(rg[i] - i * step) > 1e-9 * std::max(1.0, rg[i]))
            throw std::invalid_argument("solve_problem2: r grid must be uniform");

    const int ib = table.beta_index(beta);
    const double* slice = table.slice(ib);
    const int n = table.nr();
    // with r_i = i*step the energy is pi step^2 times an integer, exactly
    const double energy_unit = M_PI * step * step;
    const int lattice_size = (n - 1) * (n - 1) + 1;

    EnergySlice out;
    out.beta = table.beta_grid()[ib];
    out.cells.resize(grid.bins);

    std::vector<std::vector<EnvelopePoint>> per_n_points(options.n_max);
    for (int len = 2; len <= options.n_max; ++len) {
        EnergyEnvelope envelope(lattice_size);
        enumerate_tuples(slice, n, 1, len, [&](const std::vector<int>& idx, double value) {
            int lattice = 0;
            int sign = 1;  // outermost interval counts +
            for (int p = len - 1; p >= 0; --p) {
                lattice += sign * idx[p] * idx[p];
                sign = -sign;
            }
            envelope.offer(lattice, idx, value);
        });
        per_n_points[len - 1] = envelope.points(energy_unit);
    }

    const double half_bin = 0.5 * grid.width();
    const double r_max = rg.back();
    for (int b = 0; b < grid.bins; ++b) {
        EnergyCell& cell = out.cells[b];
        const double ec = grid.center(b);

        double best_value = -std::numeric_limits<double>::infinity();
        int best_n = 0;
        std::vector<double> best_radii;

        // N = 1: the disk is fixed by the energy, no search needed
        if (options.n_max >= 1) {
            const double r = std::sqrt(ec / M_PI);
            if (r <= r_max) {
                best_value = table.interpolate(r, r, out.beta);
                best_n = 1;
                best_radii = {r};
            }
        }

        for (int len = 2; len <= options.n_max; ++len) {
            const auto& pts = per_n_points[len - 1];
            if (pts.empty()) continue;
            // envelope interpolation at the bin center
            const auto it = std::lower_bound(
                pts.begin(), pts.end(), ec,
                [](const EnvelopePoint& p, double e) { return p.energy < e; });
            double value;
            if (it == pts.begin()) {
                if (it->energy > ec) continue;  // below the achieved range
                value = it->value;
            } else if (it == pts.end()) {
                continue;  // above the achieved range
            } else {
                const EnvelopePoint& hi = *it;
                const EnvelopePoint& lo = *(it - 1);
                const double t = (ec - lo.energy) / (hi.energy - lo.energy);
                value = (1.0 - t) * lo.value + t * hi.value;
            }
            if (value > best_value) {
                best_value = value;
                best_n = len;
                // representative config: best achieved point within half a bin
                best_radii.clear();
                double rep_value = -std::numeric_limits<double>::infinity();
                for (auto walk = pts.begin(); walk != pts.end(); ++walk) {
                    if (std::abs(walk->energy - ec) <= half_bin && walk->value > rep_value) {
                        rep_value = walk->value;
                        best_radii.clear();
                        for (int i : walk->indices) best_radii.push_back(rg[i]);
                    }
                }
            }
        }

        if (best_n > 0) {
            cell.n_star = best_n;
            cell.value = best_value;
            cell.radii = std::move(best_radii);
        }
    }
    return out;
}

EnergyConstrainedMap sweep_problem2(const KernelTable& table, const EnergyGridSpec& grid,
                                    const SearchOptions& options, double beta_min, double beta_max,
                                    unsigned n_threads) {
    std::vector<int> picks;
    for (int b = 0; b < table.nb(); ++b) {
        const double beta = table.beta_grid()[b];
        if (beta >= beta_min && beta <= beta_max) picks.push_back(b);
    }
    if (picks.empty()) throw std::invalid_argument("sweep_problem2: no beta grid points in range");

    EnergyConstrainedMap map;
    map.energy_grid = grid;
    map.beta_grid.resize(picks.size());
    map.slices.resize(picks.size());
    parallel_for(
        picks.size(),
        [&](std::size_t i) {
            map.beta_grid[i] = table.beta_grid()[picks[i]];
            map.slices[i] = solve_problem2(table, map.beta_grid[i], grid, options);
        },
        n_threads);
    return map;
}

}  // namespace frapdesign

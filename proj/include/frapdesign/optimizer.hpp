#pragma once

#include <limits>
#include <vector>

#include "frapdesign/forward_model.hpp"

namespace frapdesign {

class KernelTable;

struct PerNBest {
    int n = 0;
    std::vector<double> radii;
    double kernel_sum = -std::numeric_limits<double>::infinity();
};

struct DesignSweepResult {
    double beta = 0.0;
    std::vector<PerNBest> per_n_best;  // index n-1 holds the best N-jump design
    PerNBest overall_best;
    double s_int = 0.0;  // overall kernel sum with the T = R = 1 prefactor
};

struct SearchOptions {
    int n_max = 4;
    // Values this close (relative) to the maximum are treated as ties and the
    // smaller N wins; a grid step's worth of vanishingly thin extra annulus
    // otherwise shadows the genuinely simpler optimum.
    double near_tie_rel = 1e-4;
};

/// Exhaustive search over strictly increasing radius tuples on the table's
/// r grid for every N <= n_max, at a beta that lies on the table's beta grid.
/// Deterministic: lexicographically smallest tuple on exact ties, smallest N
/// among near-ties of the overall maximum.
DesignSweepResult solve_problem1(const KernelTable& table, double beta,
                                 const SearchOptions& options = {});

struct Transition {
    double beta = 0.0;        // midpoint between the bracketing grid points
    double uncertainty = 0.0; // one beta step
    int n_from = 0;
    int n_to = 0;
};

struct BetaSweepResult {
    std::vector<DesignSweepResult> results;
    std::vector<Transition> transitions;
    bool monotonicity_anomaly = false;  // set when N* ever decreases with beta
};

/// solve_problem1 across the table's beta grid (optionally restricted),
/// with transition detection on the overall component count.
BetaSweepResult sweep_beta(const KernelTable& table, const SearchOptions& options = {},
                           double beta_min = 0.0,
                           double beta_max = std::numeric_limits<double>::infinity(),
                           unsigned n_threads = 0);

struct EnergyGridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int bins = 0;

    static EnergyGridSpec paper_default(double r_max);
    double width() const { return (hi - lo) / bins; }
    double center(int b) const { return lo + (b + 0.5) * width(); }
};

struct EnergyCell {
    int n_star = 0;  // 0 marks an empty cell
    double value = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> radii;  // representative config, when one lands within half a bin
};

struct EnergySlice {
    double beta = 0.0;
    std::vector<EnergyCell> cells;
};

/// Energy-constrained search: per N, the best kernel sum achieved at each
/// exact energy, linearly interpolated onto the common energy grid; the best
/// N is selected per bin. The disk case is computed directly from the energy.
/// Requires a uniform r grid starting at 0.
EnergySlice solve_problem2(const KernelTable& table, double beta, const EnergyGridSpec& grid,
                           const SearchOptions& options = {});

struct EnergyConstrainedMap {
    std::vector<double> beta_grid;
    EnergyGridSpec energy_grid;
    std::vector<EnergySlice> slices;
};

EnergyConstrainedMap sweep_problem2(const KernelTable& table, const EnergyGridSpec& grid,
                                    const SearchOptions& options = {}, double beta_min = 0.0,
                                    double beta_max = std::numeric_limits<double>::infinity(),
                                    unsigned n_threads = 0);

struct L2DesignOptions {
    int n_cells = 64;            // radial cells of the piecewise-constant profile
    double support_radius = 4.0; // scaled truncation radius of the design
    int n_q = 48;                // target quadrature orders over the cylinder
    int n_t = 48;
    double tol = 1e-8;           // relative Rayleigh-quotient change at convergence
    int max_iter = 5000;
};

struct L2DesignResult {
    double sigma1 = 0.0;  // largest singular value of the design-to-sensitivity map
    std::vector<double> cell_edges;
    std::vector<double> profile;  // piecewise-constant, L2 norm scaled to c2
    std::vector<double> rayleigh_history;
    int iterations = 0;
};

/// Largest singular pair of the linear map from (radial, real-valued)
/// initial conditions to the sensitivity field over the observation
/// cylinder, by power iteration on the normal operator. Throws
/// std::runtime_error with the last Rayleigh quotient on non-convergence.
L2DesignResult l2_optimal_design(const ExperimentGeometry& geometry,
                                 const L2DesignOptions& options = {}, double c2 = 1.0);

}  // namespace frapdesign

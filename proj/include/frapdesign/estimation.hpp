#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frapdesign/forward_model.hpp"

namespace frapdesign {

// Counter-based pseudo-random primitives (splitmix64 finalizer chain).
// Purely integer state: a draw is a function of (seed, counters) alone, so
// results do not depend on evaluation order and are reproducible everywhere.
std::uint64_t mix64(std::uint64_t z);
double counter_uniform(std::uint64_t seed, std::uint64_t c1, std::uint64_t c2, std::uint64_t c3);
double counter_gaussian(std::uint64_t seed, std::uint64_t c1, std::uint64_t c2);

/// Discrete observation points: a square pixel raster clipped to the disk
/// ||x|| <= R, each observed at uniformly spaced times.
struct EstimationOptions {
    int spatial_pixels = 16;  // raster size across the diameter
    int time_samples = 12;
    double bracket_low = 0.1;   // search interval [low*D, high*D]
    double bracket_high = 10.0;
    double golden_tol = 1e-10;  // relative interval tolerance of the 1-D fit
};

struct EstimationReport {
    double predicted = 0.0;  // sigma^2 / (u_ref^2 * S_GRS)
    double empirical = 0.0;  // mean of |D_hat - D|^2 / D^2 over successful trials
    double s_grs = 0.0;
    std::vector<double> estimates;  // per-trial D_hat (NaN marks a failed fit)
    int failures = 0;
    int n_trials = 0;
    std::uint64_t seed = 0;

    std::string to_json() const;
};

/// Synthetic estimation experiment: draws white Gaussian noise on the data
/// grid, refits the diffusivity by 1-D least squares per trial, and compares
/// the empirical squared relative error with the sensitivity-based
/// prediction. Deterministic for a fixed seed.
EstimationReport run_estimation_experiment(const BleachShape& shape,
                                           const ExperimentGeometry& geometry, int n_trials,
                                           std::uint64_t seed,
                                           const EstimationOptions& options = {});

}  // namespace frapdesign

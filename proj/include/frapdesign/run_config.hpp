#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frapdesign/optimizer.hpp"

namespace frapdesign {

/// Resolved parameters of a CLI run. Defaults follow the reference setup:
/// radii on [0, 5] in steps of 0.05, beta on [0, 20] in steps of 0.1, N <= 4.
struct RunConfig {
    double r_max = 5.0;
    double r_step = 0.05;
    double beta_min = 0.0;
    double beta_max = 20.0;
    double beta_step = 0.1;
    int n_max = 4;

    int beta0_q_order = 128;
    int beta0_theta_order = 96;
    int ode_q_order = 64;
    double tol = 1e-7;  // ODE relative tolerance of the kernel march

    double energy_min = 0.0;  // 0 with energy_max 0 selects the default grid
    double energy_max = 0.0;
    int energy_bins = 100;

    std::uint64_t seed = 1;
    int trials = 200;
    double sigma = 0.05;

    std::string cache = "kernel_table.bin";
    std::string out_dir = ".";
    unsigned n_threads = 0;

    /// Parses a flat key=value file ('#' comments); unknown keys are errors.
    static RunConfig from_file(const std::string& path);

    /// Applies one key=value override (the CLI flag path).
    void set(const std::string& key, const std::string& value);

    /// key=value dump of every field, written next to outputs for provenance.
    std::string resolved() const;

    void validate() const;

    std::vector<double> r_grid() const;
    std::vector<double> beta_grid() const;  // always starts at 0 for tabulation
    EnergyGridSpec energy_grid() const;
    SearchOptions search_options() const;
};

}  // namespace frapdesign

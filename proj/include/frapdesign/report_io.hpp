#pragma once

#include <string>
#include <vector>

#include "frapdesign/optimizer.hpp"

namespace frapdesign {

// CSV emission for the sweep products. All writers are atomic
// (temp-then-rename) and use enough digits to round-trip doubles.

/// "beta,nstar,r1,r2,r3,r4,kernel_sum,s_int"; unused radii stay blank.
void write_sweep_csv(const BetaSweepResult& sweep, const std::string& path);

/// Parsed form of the sweep CSV, for round-trip checks and downstream use.
struct SweepRow {
    double beta;
    int n_star;
    std::vector<double> radii;
    double kernel_sum;
    double s_int;
};
std::vector<SweepRow> parse_sweep_csv(const std::string& path);

/// "beta,log_kernel_sum_overall,nstar,log_best_n1..n4" (natural logs of the
/// dimensionless kernel sums; blank where a value is not positive).
void write_fig1_csv(const BetaSweepResult& sweep, const std::string& path);

/// "beta,r1,r2,r3,r4" of the overall best configuration.
void write_fig2_csv(const BetaSweepResult& sweep, const std::string& path);

/// "beta,energy" of the overall best configuration.
void write_fig3_csv(const BetaSweepResult& sweep, const std::string& path);

/// "beta,uncertainty,n_from,n_to".
void write_transitions_csv(const BetaSweepResult& sweep, const std::string& path);

/// "beta,energy,nstar,value,r1,r2,r3,r4"; empty cells are skipped.
void write_problem2_csv(const EnergyConstrainedMap& map, const std::string& path);

/// Full sweep as JSON (results, transitions, anomaly flag).
void write_sweep_json(const BetaSweepResult& sweep, const std::string& path);

}  // namespace frapdesign

#pragma once

#include <functional>
#include <string>
#include <vector>

namespace frapdesign {

struct CheckResult {
    int criterion = 0;  // acceptance criterion the check belongs to (1..8)
    std::string name;
    bool pass = false;
    std::string details;
    double seconds = 0.0;
};

struct ValidationOptions {
    std::string cache_dir = ".";  // kernel tables are cached here between runs
    unsigned n_threads = 0;
};

/// Runs the full acceptance suite (kernel route equivalence, oracle
/// equivalence, transition reproduction, sensitivity gain, the
/// energy-constrained majority claim, the error-scaling experiment, the
/// invariant battery, and the spectral design checks). Tolerances are fixed
/// in the implementation; on_result fires as each check completes.
std::vector<CheckResult> run_acceptance_suite(
    const ValidationOptions& options = {},
    const std::function<void(const CheckResult&)>& on_result = {});

bool all_passed(const std::vector<CheckResult>& results);
std::string report_json(const std::vector<CheckResult>& results);

}  // namespace frapdesign

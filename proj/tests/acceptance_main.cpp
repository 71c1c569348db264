// Acceptance suite runner: executes every check and prints one line per
// criterion, then a summary. Exit status is nonzero if anything failed.

#include <cstdio>
#include <iostream>
#include <map>
#include <vector>

#include "frapdesign/validation.hpp"

int main() {
    using namespace frapdesign;
    ValidationOptions options;
    options.cache_dir = ".";

    std::vector<CheckResult> results;
    try {
        results = run_acceptance_suite(options, [](const CheckResult& r) {
            std::cerr << "  .. " << (r.pass ? "ok  " : "FAIL") << " " << r.name << ": "
                      << r.details << " [" << r.seconds << " s]\n";
        });
    } catch (const std::exception& e) {
        std::cerr << "acceptance suite aborted: " << e.what() << "\n";
        return 2;
    }

    std::map<int, std::pair<bool, std::string>> by_criterion;
    for (const CheckResult& r : results) {
        auto it = by_criterion.find(r.criterion);
        if (it == by_criterion.end()) {
            by_criterion[r.criterion] = {r.pass, r.name + ": " + r.details};
        } else {
            it->second.first = it->second.first && r.pass;
            it->second.second += "; " + r.name + ": " + r.details;
        }
    }

    bool all = true;
    for (const auto& [criterion, entry] : by_criterion) {
        std::printf("%s criterion %d: %s\n", entry.first ? "[PASS]" : "[FAIL]", criterion,
                    entry.second.c_str());
        all = all && entry.first;
    }
    std::printf("%s\n", all ? "acceptance: all criteria passed" : "acceptance: FAILURES present");
    return all ? 0 : 1;
}

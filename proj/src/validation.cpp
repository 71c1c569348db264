#include "frapdesign/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "frapdesign/estimation.hpp"
#include "frapdesign/forward_model.hpp"
#include "frapdesign/kernel.hpp"
#include "frapdesign/optimizer.hpp"
#include "frapdesign/sensitivity.hpp"

namespace frapdesign {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

KernelTable cached_table(const std::string& path, const std::vector<double>& r_grid,
                         const std::vector<double>& beta_grid, const MarchConfig& config) {
    const std::uint64_t want = march_config_hash(r_grid, beta_grid, config);
    try {
        KernelTable table = load_table(path);
        if (table.meta().creation_hash == want) return table;
    } catch (const std::exception&) {
        // absent or stale cache; rebuild below
    }
    KernelTable table = kernel_ode_march(r_grid, beta_grid, config);
    save_table(table, path);
    return table;
}

double slice0_max_abs(const KernelTable& table) {
    double m = 0.0;
    const double* s = table.slice(0);
    for (int i = 0; i < table.nr() * table.nr(); ++i) m = std::max(m, std::abs(s[i]));
    return m;
}

// ---- criterion 1: the two kernel evaluation routes agree -------------------

CheckResult check_route_equivalence(const ValidationOptions& options) {
    CheckResult res{1, "kernel route equivalence"};
    const auto t0 = Clock::now();
    MarchConfig config;
    config.n_threads = options.n_threads;
    const KernelTable table =
        kernel_ode_march(uniform_grid(0.0, 5.0, 0.1), uniform_grid(0.0, 20.0, 0.1), config);

    // Entries below the integrator's own absolute resolution cannot be
    // compared relatively; they get an absolute floor instead.
    const double floor = 1e-7 * slice0_max_abs(table);
    std::uint64_t state = 20240517;
    double worst_rel = 0.0, worst_abs = 0.0;
    bool ok = true;
    std::string worst_point;
    for (int trial = 0; trial < 20; ++trial) {
        const int ir = 1 + static_cast<int>(mix64(state = mix64(state)) % (table.nr() - 1));
        const int is = 1 + static_cast<int>(mix64(state = mix64(state)) % (table.nr() - 1));
        const int ib = 1 + static_cast<int>(mix64(state = mix64(state)) % (table.nb() - 1));
        const double r = table.r_grid()[ir], s = table.r_grid()[is];
        const double beta = table.beta_grid()[ib];
        const double direct = kernel_direct(r, s, beta);
        const double marched = table.at(ib, ir, is);
        const double diff = std::abs(direct - marched);
        if (diff > std::max(1e-3 * std::abs(direct), floor)) ok = false;
        if (std::abs(direct) > floor) {
            const double rel = diff / std::abs(direct);
            if (rel > worst_rel) {
                worst_rel = rel;
                worst_point = "(" + fmt(r) + "," + fmt(s) + ";" + fmt(beta) + ")";
            }
        } else {
            worst_abs = std::max(worst_abs, diff);
        }
    }
    res.seconds = elapsed_s(t0);
    res.pass = ok && res.seconds < 300.0;
    res.details = "worst rel " + fmt(worst_rel) + " at " + worst_point + ", worst abs " +
                  fmt(worst_abs) + " below floor " + fmt(floor) + ", " + fmt(res.seconds) + " s";
    return res;
}

// ---- criterion 2: kernel sums match the brute-force oracle -----------------

CheckResult check_oracle_equivalence(const KernelTable& table) {
    CheckResult res{2, "oracle equivalence"};
    const auto t0 = Clock::now();
    const SpaceTimeGrid grid = SpaceTimeGrid::tensor_gauss(64, 64);
    const std::vector<std::vector<double>> shapes = {{0.5}, {1.0}, {2.0}, {1.0, 2.0}};
    const std::vector<double> betas = {0.5, 1.0, 3.0, 10.0};
    double worst = 0.0;
    std::string worst_case;
    for (const auto& radii : shapes) {
        const BleachShape shape(radii);
        for (double beta : betas) {
            const SensitivityValue oracle =
                oracle_sensitivity(shape, ExperimentGeometry::from_beta(beta), grid);
            const double table_sum = kernel_alternating_sum(radii, table, beta);
            const double rel =
                std::abs(table_sum - oracle.kernel_sum) / std::abs(oracle.kernel_sum);
            if (rel > worst) {
                worst = rel;
                worst_case = "N=" + std::to_string(radii.size()) + " r1=" + fmt(radii[0]) +
                             " beta=" + fmt(beta);
            }
        }
    }
    res.seconds = elapsed_s(t0);
    res.pass = worst <= 0.01;
    res.details = "worst rel " + fmt(worst) + " (" + worst_case + ")";
    return res;
}

// ---- criterion 3 + 4: transition structure and the annulus gain ------------

CheckResult check_transitions(const BetaSweepResult& sweep) {
    CheckResult res{3, "transition reproduction"};
    double to2 = -1.0, to3 = -1.0, to4 = -1.0;
    for (const Transition& t : sweep.transitions) {
        if (t.n_to == 2 && to2 < 0.0) to2 = t.beta;
        if (t.n_to == 3 && to3 < 0.0) to3 = t.beta;
        if (t.n_to == 4 && to4 < 0.0) to4 = t.beta;
    }
    res.pass = to2 > 0.0 && std::abs(to2 - 1.8) <= 0.3 && to3 > 0.0 &&
               std::abs(to3 - 6.1) <= 0.4 && to4 > 0.0 && std::abs(to4 - 13.8) <= 0.6;
    res.details = "disk->annulus at " + fmt(to2) + " (want 1.8+-0.3), ->annulus+disk at " +
                  fmt(to3) + " (want 6.1+-0.4), ->double annulus at " + fmt(to4) +
                  " (want 13.8+-0.6)";
    return res;
}

CheckResult check_sensitivity_gain(const BetaSweepResult& sweep) {
    CheckResult res{4, "sensitivity gain"};
    double best_ratio = 0.0, at_beta = 0.0;
    for (const DesignSweepResult& r : sweep.results) {
        if (r.overall_best.n != 2 || r.per_n_best.size() < 2) continue;
        const double ratio = r.per_n_best[1].kernel_sum / r.per_n_best[0].kernel_sum;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            at_beta = r.beta;
        }
    }
    res.pass = best_ratio >= 1.5 && best_ratio <= 2.5;
    res.details = "max best-annulus/best-disk ratio " + fmt(best_ratio) + " at beta " +
                  fmt(at_beta) + " (want within [1.5, 2.5])";
    return res;
}

// ---- criterion 5: the energy-constrained majority claim --------------------

CheckResult check_energy_majority(const KernelTable& table, const ValidationOptions& options) {
    CheckResult res{5, "energy majority"};
    const auto t0 = Clock::now();
    const EnergyGridSpec grid = EnergyGridSpec::paper_default(table.r_grid().back());
    const EnergyConstrainedMap map =
        sweep_problem2(table, grid, SearchOptions{}, 0.0,
                       std::numeric_limits<double>::infinity(), options.n_threads);
    std::size_t nonempty = 0, n4 = 0;
    for (const EnergySlice& slice : map.slices)
        for (const EnergyCell& cell : slice.cells) {
            if (cell.n_star == 0) continue;
            ++nonempty;
            if (cell.n_star == 4) ++n4;
        }
    res.seconds = elapsed_s(t0);
    res.pass = nonempty > 0 && 2 * n4 > nonempty;
    res.details = std::to_string(n4) + " of " + std::to_string(nonempty) +
                  " non-empty cells pick N=4 (" +
                  fmt(100.0 * static_cast<double>(n4) / static_cast<double>(nonempty)) + "%)";
    return res;
}

// ---- criterion 6: error scaling of the estimation experiment ---------------

CheckResult check_error_scaling() {
    CheckResult res{6, "error scaling"};
    const auto t0 = Clock::now();
    const std::vector<std::vector<double>> shapes = {{1.0}, {1.0, 2.0}};
    const std::vector<double> sigmas = {0.02, 0.05, 0.1};
    std::vector<double> xs, ys;
    int failures = 0;
    std::uint64_t seed = 887311;
    for (const auto& radii : shapes) {
        const BleachShape shape(radii);
        for (double sigma : sigmas) {
            const ExperimentGeometry geometry(1.0, 1.0, 0.25, sigma);
            const EstimationReport report =
                run_estimation_experiment(shape, geometry, 200, seed++);
            failures += report.failures;
            xs.push_back(std::log(report.predicted));
            ys.push_back(std::log(report.empirical));
        }
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    res.seconds = elapsed_s(t0);
    res.pass = std::abs(slope - 1.0) <= 0.15 && failures == 0 && res.seconds < 600.0;
    res.details = "regression slope " + fmt(slope) + " (want 1 +- 0.15), " +
                  std::to_string(failures) + " fit failures, " + fmt(res.seconds) + " s";
    return res;
}

// ---- criterion 7: invariant battery ----------------------------------------

CheckResult check_kernel_symmetry(const KernelTable& table) {
    CheckResult res{7, "kernel symmetry"};
    double worst = 0.0;
    const int n = table.nr();
    for (int b = 0; b < table.nb(); ++b) {
        const double* s = table.slice(b);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                worst = std::max(worst, std::abs(s[i * n + j] - s[j * n + i]));
    }
    res.pass = worst <= 1e-12 * std::max(1.0, table.max_abs());
    res.details = "max |k(r,s)-k(s,r)| = " + fmt(worst);
    return res;
}

CheckResult check_kernel_zero_argument(const KernelTable& table) {
    CheckResult res{7, "kernel zero argument"};
    res.pass = true;
    const int n = table.nr();
    for (int b = 0; b < table.nb() && res.pass; ++b) {
        const double* s = table.slice(b);
        for (int j = 0; j < n; ++j)
            if (s[j] != 0.0 || s[static_cast<std::size_t>(j) * n] != 0.0) res.pass = false;
    }
    res.details = res.pass ? "k(0,s;beta) identically zero" : "nonzero entry in the r=0 column";
    return res;
}

CheckResult check_diagonal_monotone(const KernelTable& table) {
    CheckResult res{7, "kernel diagonal monotone"};
    // slack: the march controls absolute error to ode_abs_tol_scale * max|k0|
    const double slack = 10.0 * table.meta().ode_abs_tol_scale * slice0_max_abs(table);
    double worst = -1.0;
    for (int i = 0; i < table.nr(); ++i)
        for (int b = 0; b + 1 < table.nb(); ++b)
            worst = std::max(worst, table.at(b + 1, i, i) - table.at(b, i, i));
    res.pass = worst <= slack;
    res.details = "max increase of k(r,r;beta) over a beta step = " + fmt(worst) +
                  " (slack " + fmt(slack) + ")";
    return res;
}

double mass_integral(const BleachShape& shape, double beta, double tau) {
    const double sig = std::sqrt(tau / (2.0 * beta));
    const double hi = shape.radii().back() + 12.0 * sig;
    const double width = std::min(0.5 * sig, 0.05);
    const int panels = static_cast<int>(std::ceil(hi / width));
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const QuadratureRule rule =
            gauss_legendre(16, hi * p / panels, hi * (p + 1) / panels);
        acc += rule.integrate(
            [&](double q) { return 2.0 * M_PI * q * solve_radial(shape, beta, q, tau); });
    }
    return acc;
}

CheckResult check_mass_conservation() {
    CheckResult res{7, "mass conservation"};
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const auto& radii : {std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}}) {
        const BleachShape shape(radii);
        const double energy = shape_energy(shape);
        for (double tau : {0.1, 1.0}) {
            const double mass = mass_integral(shape, 1.0, tau);
            worst = std::max(worst, std::abs(mass - energy) / energy);
        }
    }
    res.seconds = elapsed_s(t0);
    res.pass = worst <= 1e-6;
    res.details = "worst relative mass defect " + fmt(worst);
    return res;
}

CheckResult check_dudd_identity() {
    CheckResult res{7, "dudD identity"};
    double worst = 0.0;
    for (const auto& radii : {std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}}) {
        const BleachShape shape(radii);
        const ExperimentGeometry geometry = ExperimentGeometry::from_beta(1.0);
        std::vector<double> lhs, rhs;
        for (double q : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9}) {
                lhs.push_back(sensitivity_field(shape, geometry, q, tau));
                const double h = 1e-3 * tau;
                const double dv = (solve_radial(shape, 1.0, q, tau + h) -
                                   solve_radial(shape, 1.0, q, tau - h)) /
                                  (2.0 * h);
                rhs.push_back(tau / geometry.D * dv);
            }
        }
        double scale = 0.0;
        for (double v : lhs) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < lhs.size(); ++i)
            worst = std::max(worst, std::abs(lhs[i] - rhs[i]) /
                                        std::max(std::abs(lhs[i]), 1e-3 * scale));
    }
    res.pass = worst <= 1e-4;
    res.details = "worst relative identity defect " + fmt(worst);
    return res;
}

CheckResult check_rotation_invariance() {
    CheckResult res{7, "rotation invariance"};
    const auto t0 = Clock::now();
    const ExperimentGeometry geometry = ExperimentGeometry::from_beta(1.0);
    const SpaceTimeGrid grid = SpaceTimeGrid::tensor_gauss(20, 16);
    const int n = 33;
    const double h = 2.2 / n;

    const PixelMask mask = PixelMask::disk(n, h, 0.3, 0.0, 0.6);
    const double s0 = oracle_sensitivity_2d(mask, geometry, grid, 48).s_int;
    const double s90 = oracle_sensitivity_2d(mask.rotated_quarter_turn(), geometry, grid, 48).s_int;
    const double quarter_rel = std::abs(s90 - s0) / s0;

    const double angle = M_PI / 3.0;
    const PixelMask rotated =
        PixelMask::disk(n, h, 0.3 * std::cos(angle), 0.3 * std::sin(angle), 0.6);
    const double s60 = oracle_sensitivity_2d(rotated, geometry, grid, 48).s_int;
    const double third_rel = std::abs(s60 - s0) / s0;

    res.seconds = elapsed_s(t0);
    res.pass = quarter_rel <= 1e-12 && third_rel <= 1e-3;
    res.details = "quarter-turn rel diff " + fmt(quarter_rel) + ", pi/3 rel diff " +
                  fmt(third_rel);
    return res;
}

CheckResult check_convexity() {
    CheckResult res{7, "convexity"};
    const auto t0 = Clock::now();
    const ExperimentGeometry geometry = ExperimentGeometry::from_beta(1.0);
    const SpaceTimeGrid grid = SpaceTimeGrid::tensor_gauss(16, 12);
    const int n = 33;
    const double h = 2.2 / n;
    const PixelMask a = PixelMask::disk(n, h, 0.0, 0.0, 0.8);
    const PixelMask b = PixelMask::disk(n, h, 0.25, 0.15, 0.55);
    const double sa = oracle_sensitivity_2d(a, geometry, grid).s_int;
    const double sb = oracle_sensitivity_2d(b, geometry, grid).s_int;
    double worst = -std::numeric_limits<double>::infinity();
    for (double lambda : {0.25, 0.5, 0.75}) {
        PixelMask blend = a;
        for (std::size_t i = 0; i < blend.values.size(); ++i)
            blend.values[i] = lambda * a.values[i] + (1.0 - lambda) * b.values[i];
        const double s_blend = oracle_sensitivity_2d(blend, geometry, grid).s_int;
        const double bound = lambda * sa + (1.0 - lambda) * sb;
        worst = std::max(worst, (s_blend - bound) / bound);
    }
    res.seconds = elapsed_s(t0);
    res.pass = worst <= 1e-9;
    res.details = "max (S(blend) - bound)/bound = " + fmt(worst) + " (convexity wants <= 0)";
    return res;
}

CheckResult check_exhaustive_agreement() {
    CheckResult res{7, "optimizer exhaustive agreement"};
    const auto t0 = Clock::now();
    MarchConfig config;
    config.beta0_q_order = 64;
    config.beta0_theta_order = 48;
    const KernelTable table =
        kernel_ode_march(uniform_grid(0.0, 1.9, 0.1), uniform_grid(0.0, 2.0, 0.5), config);
    const SearchOptions options;
    const DesignSweepResult fast = solve_problem1(table, 1.0, options);

    // independent naive search: every tuple, full double-sum, no shortcuts
    const int n = table.nr();
    const int ib = table.beta_index(1.0);
    auto value_of = [&](const std::vector<int>& idx) {
        double sum = 0.0;
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t c = 0; c < idx.size(); ++c) {
                const double term = table.at(ib, idx[a], idx[c]);
                sum += ((a + c) % 2 == 0) ? term : -term;
            }
        return sum;
    };
    std::vector<PerNBest> naive(options.n_max);
    for (int len = 1; len <= options.n_max; ++len) {
        naive[len - 1].n = len;
        std::vector<int> idx(len);
        auto recurse = [&](auto&& self, int p, int start) -> void {
            for (int i = start; i <= n - 1 - (len - 1 - p); ++i) {
                idx[p] = i;
                if (p == len - 1) {
                    const double v = value_of(idx);
                    if (v > naive[len - 1].kernel_sum) {
                        naive[len - 1].kernel_sum = v;
                        naive[len - 1].radii.clear();
                        for (int t : idx) naive[len - 1].radii.push_back(table.r_grid()[t]);
                    }
                } else {
                    self(self, p + 1, i + 1);
                }
            }
        };
        recurse(recurse, 0, 1);
    }
    double naive_max = -std::numeric_limits<double>::infinity();
    for (const auto& b : naive) naive_max = std::max(naive_max, b.kernel_sum);
    int naive_overall = 0;
    for (const auto& b : naive)
        if (b.kernel_sum >= naive_max - options.near_tie_rel * std::abs(naive_max)) {
            naive_overall = b.n;
            break;
        }

    bool ok = naive_overall == fast.overall_best.n;
    double worst_rel = 0.0;
    for (int len = 1; len <= options.n_max; ++len) {
        const PerNBest& f = fast.per_n_best[len - 1];
        const PerNBest& g = naive[len - 1];
        if (f.radii != g.radii) ok = false;
        worst_rel = std::max(worst_rel, std::abs(f.kernel_sum - g.kernel_sum) /
                                            std::max(std::abs(g.kernel_sum), 1e-300));
    }
    if (worst_rel > 1e-12) ok = false;
    res.seconds = elapsed_s(t0);
    res.pass = ok;
    res.details = "tuples match = " + std::string(ok ? "yes" : "no") + ", worst value rel diff " +
                  fmt(worst_rel);
    return res;
}

// ---- criterion 8: spectral design -------------------------------------------

CheckResult check_spectral_design() {
    CheckResult res{8, "spectral design"};
    const auto t0 = Clock::now();
    const ExperimentGeometry geometry = ExperimentGeometry::from_beta(1.0);
    L2DesignOptions options;
    options.n_cells = 64;
    const L2DesignResult coarse = l2_optimal_design(geometry, options);
    options.n_cells = 128;
    const L2DesignResult fine = l2_optimal_design(geometry, options);

    bool monotone = true;
    for (std::size_t i = 1; i < coarse.rayleigh_history.size(); ++i)
        if (coarse.rayleigh_history[i] <
            coarse.rayleigh_history[i - 1] * (1.0 - 1e-12))
            monotone = false;
    const double rel = std::abs(fine.sigma1 - coarse.sigma1) / fine.sigma1;
    res.seconds = elapsed_s(t0);
    res.pass = monotone && rel <= 0.01;
    res.details = "Rayleigh monotone = " + std::string(monotone ? "yes" : "no") +
                  ", sigma1 " + fmt(coarse.sigma1) + " vs " + fmt(fine.sigma1) +
                  " (rel diff " + fmt(rel) + ")";
    return res;
}

}  // namespace

std::vector<CheckResult> run_acceptance_suite(
    const ValidationOptions& options, const std::function<void(const CheckResult&)>& on_result) {
    std::vector<CheckResult> results;
    auto push = [&](CheckResult r) {
        if (on_result) on_result(r);
        results.push_back(std::move(r));
    };

    push(check_route_equivalence(options));

    MarchConfig config;
    config.n_threads = options.n_threads;
    const KernelTable table =
        cached_table(options.cache_dir + "/kernel_table_full.bin", uniform_grid(0.0, 5.0, 0.05),
                     uniform_grid(0.0, 20.0, 0.1), config);

    push(check_oracle_equivalence(table));

    const BetaSweepResult sweep = sweep_beta(table, SearchOptions{}, 0.0,
                                             std::numeric_limits<double>::infinity(),
                                             options.n_threads);
    push(check_transitions(sweep));
    push(check_sensitivity_gain(sweep));
    push(check_energy_majority(table, options));
    push(check_error_scaling());

    push(check_kernel_symmetry(table));
    push(check_kernel_zero_argument(table));
    push(check_diagonal_monotone(table));
    push(check_mass_conservation());
    push(check_dudd_identity());
    push(check_rotation_invariance());
    push(check_convexity());
    push(check_exhaustive_agreement());

    push(check_spectral_design());
    return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const CheckResult& r : results)
        if (!r.pass) return false;
    return true;
}

std::string report_json(const std::vector<CheckResult>& results) {
    nlohmann::json j;
    nlohmann::json checks = nlohmann::json::array();
    for (const CheckResult& r : results)
        checks.push_back({{"criterion", r.criterion},
                          {"name", r.name},
                          {"pass", r.pass},
                          {"details", r.details},
                          {"seconds", r.seconds}});
    j["checks"] = checks;
    j["all_pass"] = all_passed(results);
    return j.dump(2);
}

}  // namespace frapdesign

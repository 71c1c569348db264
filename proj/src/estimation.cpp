#include "frapdesign/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace frapdesign {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t c1, std::uint64_t c2, std::uint64_t c3) {
    const std::uint64_t h = mix64(mix64(mix64(seed ^ 0x8f1bbcdcbfa53e0bull) + c1) + mix64(c2) + c3);
    // 53 mantissa bits, shifted into (0, 1)
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double counter_gaussian(std::uint64_t seed, std::uint64_t c1, std::uint64_t c2) {
    const double u1 = counter_uniform(seed, c1, c2, 0);
    const double u2 = counter_uniform(seed, c1, c2, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

namespace {

struct GoldenResult {
    double minimizer = 0.0;
    bool interior = false;
};

template <class F>
GoldenResult golden_minimize(F&& f, double a, double b, double rel_tol) {
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    const double a0 = a, b0 = b;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while ((b - a) > rel_tol * (std::abs(a) + std::abs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    GoldenResult res;
    res.minimizer = 0.5 * (a + b);
    const double margin = 1e-6 * (b0 - a0);
    res.interior = (res.minimizer > a0 + margin) && (res.minimizer < b0 - margin);
    return res;
}

// Data points grouped by their (radius, time) cell; noise stays per-point.
struct DataLayout {
    std::vector<double> q;           // unique scaled radii
    std::vector<int> multiplicity;   // pixels sharing each radius
    std::vector<double> tau;         // scaled observation times
    std::vector<std::size_t> point_base;  // running point index of (radius, time) cell
    std::size_t n_points = 0;
};

DataLayout build_layout(const EstimationOptions& opt) {
    DataLayout lay;
    const int n = opt.spatial_pixels;
    std::map<double, int> radii;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double x = (ix + 0.5) * 2.0 / n - 1.0;
            const double y = (iy + 0.5) * 2.0 / n - 1.0;
            const double q2 = x * x + y * y;
            if (q2 <= 1.0) radii[std::sqrt(q2)] += 1;
        }
    }
    if (radii.empty()) throw std::invalid_argument("run_estimation_experiment: empty data raster");
    for (const auto& [q, count] : radii) {
        lay.q.push_back(q);
        lay.multiplicity.push_back(count);
    }
    for (int k = 0; k < opt.time_samples; ++k)
        lay.tau.push_back((k + 0.5) / opt.time_samples);
    std::size_t base = 0;
    for (std::size_t c = 0; c < lay.q.size() * lay.tau.size(); ++c) {
        lay.point_base.push_back(base);
        base += lay.multiplicity[c / lay.tau.size()];
    }
    lay.n_points = base;
    return lay;
}

}  // namespace

EstimationReport run_estimation_experiment(const BleachShape& shape,
                                           const ExperimentGeometry& geometry, int n_trials,
                                           std::uint64_t seed, const EstimationOptions& options) {
    if (n_trials < 10) throw std::invalid_argument("run_estimation_experiment: need n_trials >= 10");
    if (options.spatial_pixels < 2 || options.time_samples < 1)
        throw std::invalid_argument("run_estimation_experiment: data grid too small");

    const DataLayout lay = build_layout(options);
    const std::size_t nc = lay.q.size() * lay.tau.size();
    const double D_true = geometry.D;
    const double sigma = geometry.sigma;

    // model values and sensitivities at the true parameter, one per cell
    std::vector<double> u_true(nc), dudD(nc);
    for (std::size_t iq = 0; iq < lay.q.size(); ++iq) {
        for (std::size_t it = 0; it < lay.tau.size(); ++it) {
            const std::size_t c = iq * lay.tau.size() + it;
            u_true[c] = solve_radial(shape, geometry.beta(), lay.q[iq], lay.tau[it]);
            dudD[c] = sensitivity_field(shape, geometry, lay.q[iq], lay.tau[it]);
        }
    }

    double s_grs = 0.0;
    for (std::size_t iq = 0; iq < lay.q.size(); ++iq)
        for (std::size_t it = 0; it < lay.tau.size(); ++it) {
            const std::size_t c = iq * lay.tau.size() + it;
            s_grs += lay.multiplicity[iq] * dudD[c] * dudD[c];
        }
    s_grs *= D_true * D_true / (geometry.u_ref * geometry.u_ref);

    EstimationReport report;
    report.seed = seed;
    report.n_trials = n_trials;
    report.s_grs = s_grs;
    report.predicted = (s_grs > 0.0) ? sigma * sigma / (geometry.u_ref * geometry.u_ref * s_grs)
                                     : std::numeric_limits<double>::infinity();
    report.estimates.assign(n_trials, std::numeric_limits<double>::quiet_NaN());

    auto run_trial = [&](int trial) -> double {
        // per-cell noise sums; the objective only needs sum of residual data
        std::vector<double> y_sum(nc);
        for (std::size_t c = 0; c < nc; ++c) {
            const int mult = lay.multiplicity[c / lay.tau.size()];
            double s = mult * u_true[c];
            for (int p = 0; p < mult; ++p)
                s += sigma * counter_gaussian(seed, static_cast<std::uint64_t>(trial),
                                              lay.point_base[c] + p);
            y_sum[c] = s;
        }
        auto objective = [&](double d_candidate) {
            // sum over points of (u_i(D') - y_i)^2, up to a D'-independent constant
            const ExperimentGeometry trial_geom(geometry.R, geometry.T, d_candidate, sigma,
                                                geometry.u_ref);
            const double beta_c = trial_geom.beta();
            double acc = 0.0;
            for (std::size_t iq = 0; iq < lay.q.size(); ++iq) {
                for (std::size_t it = 0; it < lay.tau.size(); ++it) {
                    const std::size_t c = iq * lay.tau.size() + it;
                    const double u = solve_radial(shape, beta_c, lay.q[iq], lay.tau[it]);
                    acc += lay.multiplicity[iq] * u * u - 2.0 * u * y_sum[c];
                }
            }
            return acc;
        };
        const GoldenResult fit = golden_minimize(objective, options.bracket_low * D_true,
                                                 options.bracket_high * D_true, options.golden_tol);
        return fit.interior ? fit.minimizer : std::numeric_limits<double>::quiet_NaN();
    };

    const unsigned n_workers = std::min<unsigned>(std::thread::hardware_concurrency(), 8);
    if (n_workers > 1 && n_trials > 4) {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (unsigned w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (int t; (t = next.fetch_add(1)) < n_trials;)
                    report.estimates[t] = run_trial(t);
            });
        }
        for (auto& th : pool) th.join();
    } else {
        for (int t = 0; t < n_trials; ++t) report.estimates[t] = run_trial(t);
    }

    double err_acc = 0.0;
    int used = 0;
    for (double d_hat : report.estimates) {
        if (std::isnan(d_hat)) {
            ++report.failures;
            continue;
        }
        const double rel = (d_hat - D_true) / D_true;
        err_acc += rel * rel;
        ++used;
    }
    report.empirical = (used > 0) ? err_acc / used : std::numeric_limits<double>::quiet_NaN();
    return report;
}

std::string EstimationReport::to_json() const {
    nlohmann::json j;
    j["predicted"] = predicted;
    j["empirical"] = empirical;
    j["s_grs"] = s_grs;
    j["failures"] = failures;
    j["n_trials"] = n_trials;
    j["seed"] = seed;
    nlohmann::json arr = nlohmann::json::array();
    for (double e : estimates) {
        if (std::isnan(e))
            arr.push_back(nullptr);
        else
            arr.push_back(e);
    }
    j["estimates"] = arr;
    return j.dump(2);
}

}  // namespace frapdesign

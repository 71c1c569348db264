#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "frapdesign/estimation.hpp"
#include "frapdesign/io_util.hpp"
#include "frapdesign/kernel.hpp"
#include "frapdesign/report_io.hpp"
#include "frapdesign/run_config.hpp"
#include "frapdesign/sensitivity.hpp"
#include "frapdesign/svg.hpp"
#include "frapdesign/validation.hpp"

namespace {

using namespace frapdesign;

struct CliOverrides {
    std::optional<std::string> config_path;
    std::optional<std::string> cache;
    std::optional<std::string> out_dir;
    std::optional<double> beta_min, beta_max, beta_step;
    std::optional<double> r_max, r_step;
    std::optional<int> n_max;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<double> sigma;
    std::optional<int> trials;
    std::optional<unsigned> n_threads;
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_path, "key=value config file");
    cmd->add_option("--cache", o.cache, "kernel table cache path");
    cmd->add_option("--out-dir", o.out_dir, "output directory");
    cmd->add_option("--beta-min", o.beta_min, "lower end of the reported beta range");
    cmd->add_option("--beta-max", o.beta_max, "upper end of the beta grid");
    cmd->add_option("--beta-step", o.beta_step, "beta grid spacing");
    cmd->add_option("--r-max", o.r_max, "upper end of the radius grid");
    cmd->add_option("--r-step", o.r_step, "radius grid spacing");
    cmd->add_option("--n-max", o.n_max, "largest jump count searched");
    cmd->add_option("--seed", o.seed, "random seed of the estimation experiment");
    cmd->add_option("--tol", o.tol, "relative tolerance of the kernel integration");
    cmd->add_option("--sigma", o.sigma, "noise level of the estimation experiment");
    cmd->add_option("--trials", o.trials, "trial count of the estimation experiment");
    cmd->add_option("--threads", o.n_threads, "worker threads (0 = hardware)");
}

RunConfig resolve_config(const CliOverrides& o) {
    RunConfig config;
    if (o.config_path) config = RunConfig::from_file(*o.config_path);
    if (o.cache) config.cache = *o.cache;
    if (o.out_dir) config.out_dir = *o.out_dir;
    if (o.beta_min) config.beta_min = *o.beta_min;
    if (o.beta_max) config.beta_max = *o.beta_max;
    if (o.beta_step) config.beta_step = *o.beta_step;
    if (o.r_max) config.r_max = *o.r_max;
    if (o.r_step) config.r_step = *o.r_step;
    if (o.n_max) config.n_max = *o.n_max;
    if (o.seed) config.seed = *o.seed;
    if (o.tol) config.tol = *o.tol;
    if (o.sigma) config.sigma = *o.sigma;
    if (o.trials) config.trials = *o.trials;
    if (o.n_threads) config.n_threads = *o.n_threads;
    config.validate();
    return config;
}

void write_resolved(const RunConfig& config, const std::string& command) {
    std::filesystem::create_directories(config.out_dir);
    atomic_write_file(config.out_dir + "/" + command + "_resolved.config", config.resolved());
}

MarchConfig march_config(const RunConfig& config) {
    MarchConfig mc;
    mc.beta0_q_order = config.beta0_q_order;
    mc.beta0_theta_order = config.beta0_theta_order;
    mc.ode_q_order = config.ode_q_order;
    mc.ode_rel_tol = config.tol;
    mc.n_threads = config.n_threads;
    mc.log = [](const std::string& msg) { std::cerr << "[tabulate] " << msg << "\n"; };
    return mc;
}

KernelTable load_table_or_explain(const RunConfig& config) {
    try {
        return load_table(config.cache);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("cannot load kernel table: ") + e.what() +
                                 "\n  run `frapdesign tabulate` first (cache path: " +
                                 config.cache + ")");
    }
}

int cmd_tabulate(const RunConfig& config) {
    write_resolved(config, "tabulate");
    const std::vector<double> r_grid = config.r_grid();
    const std::vector<double> beta_grid = config.beta_grid();
    const MarchConfig mc = march_config(config);
    const std::uint64_t want = march_config_hash(r_grid, beta_grid, mc);

    try {
        const KernelTable existing = load_table(config.cache);
        if (existing.meta().creation_hash == want) {
            std::cout << "cache hit: " << config.cache << " already holds this configuration"
                      << " (hash " << std::hex << want << std::dec << ")\n";
            return 0;
        }
        std::cerr << "[tabulate] cache holds a different configuration; recomputing\n";
    } catch (const std::exception&) {
        // no usable cache
    }

    const KernelTable table = kernel_ode_march(r_grid, beta_grid, mc);
    save_table(table, config.cache);
    const std::string bytes = read_file(config.cache);
    const std::uint64_t checksum =
        fnv1a64(bytes.data(), bytes.size() - sizeof(std::uint64_t));
    std::cout << "wrote " << config.cache << ": " << table.nb() << " x " << table.nr() << " x "
              << table.nr() << " values, checksum " << std::hex << checksum << std::dec << "\n";
    return 0;
}

int cmd_optimize(const RunConfig& config) {
    write_resolved(config, "optimize");
    const KernelTable table = load_table_or_explain(config);
    const BetaSweepResult sweep = sweep_beta(table, config.search_options(), config.beta_min,
                                             config.beta_max, config.n_threads);
    const std::string dir = config.out_dir;
    write_sweep_csv(sweep, dir + "/sweep.csv");
    write_sweep_json(sweep, dir + "/sweep.json");
    write_fig1_csv(sweep, dir + "/fig1.csv");
    write_fig2_csv(sweep, dir + "/fig2.csv");
    write_fig3_csv(sweep, dir + "/fig3.csv");
    write_transitions_csv(sweep, dir + "/transitions.csv");
    write_fig1_svg(sweep, dir + "/fig1.svg");
    write_fig2_svg(sweep, dir + "/fig2.svg");
    write_fig3_svg(sweep, dir + "/fig3.svg");

    for (const Transition& t : sweep.transitions)
        std::cout << "transition N=" << t.n_from << " -> N=" << t.n_to << " at beta = " << t.beta
                  << " +- " << t.uncertainty << "\n";
    if (sweep.monotonicity_anomaly)
        std::cout << "warning: optimal component count is not monotone in beta\n";
    std::cout << "wrote sweep and figure data to " << dir << "\n";
    return 0;
}

int cmd_problem2(const RunConfig& config) {
    write_resolved(config, "problem2");
    const KernelTable table = load_table_or_explain(config);
    const EnergyConstrainedMap map =
        sweep_problem2(table, config.energy_grid(), config.search_options(), config.beta_min,
                       config.beta_max, config.n_threads);
    write_problem2_csv(map, config.out_dir + "/problem2.csv");
    write_problem2_svg(map, config.out_dir + "/fig4.svg");

    std::size_t nonempty = 0, n4 = 0;
    for (const EnergySlice& slice : map.slices)
        for (const EnergyCell& cell : slice.cells) {
            if (cell.n_star == 0) continue;
            ++nonempty;
            if (cell.n_star == 4) ++n4;
        }
    std::cout << "energy-constrained map: " << nonempty << " non-empty cells, " << n4
              << " pick N=4\n";
    std::cout << "wrote problem2.csv and fig4.svg to " << config.out_dir << "\n";
    return 0;
}

int cmd_estimate(const RunConfig& config, const std::vector<double>& radii, double beta) {
    write_resolved(config, "estimate");
    const BleachShape shape(radii);
    const ExperimentGeometry geometry(1.0, 1.0, 1.0 / (4.0 * beta), config.sigma);
    const EstimationReport report =
        run_estimation_experiment(shape, geometry, config.trials, config.seed);
    atomic_write_file(config.out_dir + "/estimation.json", report.to_json());
    std::cout << "predicted mean squared relative error: " << report.predicted << "\n";
    std::cout << "empirical mean squared relative error: " << report.empirical << "\n";
    std::cout << "ratio empirical/predicted: " << report.empirical / report.predicted << " ("
              << report.failures << " failed fits)\n";
    std::cout << "wrote " << config.out_dir << "/estimation.json\n";
    return 0;
}

int cmd_validate(const RunConfig& config) {
    write_resolved(config, "validate");
    ValidationOptions options;
    options.cache_dir = config.out_dir;
    options.n_threads = config.n_threads;
    const std::vector<CheckResult> results =
        run_acceptance_suite(options, [](const CheckResult& r) {
            std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << r.criterion << " ("
                      << r.name << "): " << r.details << "\n";
        });
    atomic_write_file(config.out_dir + "/validation.json", report_json(results));
    std::cout << "wrote " << config.out_dir << "/validation.json\n";
    return all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal bleach-shape design for diffusion-coefficient identification"};
    app.require_subcommand(1);

    CliOverrides o_tab, o_opt, o_p2, o_est, o_val;
    CLI::App* tabulate = app.add_subcommand("tabulate", "compute and cache the kernel table");
    add_common_flags(tabulate, o_tab);
    CLI::App* optimize = app.add_subcommand("optimize", "run the design sweep (problem 1)");
    add_common_flags(optimize, o_opt);
    CLI::App* problem2 = app.add_subcommand("problem2", "energy-constrained design map");
    add_common_flags(problem2, o_p2);
    CLI::App* estimate = app.add_subcommand("estimate", "synthetic estimation experiment");
    add_common_flags(estimate, o_est);
    std::vector<double> radii{1.0};
    double beta_est = 1.0;
    estimate->add_option("--radii", radii, "jump radii of the probed shape");
    estimate->add_option("--beta", beta_est, "scaled inverse diffusivity of the experiment");
    CLI::App* validate = app.add_subcommand("validate", "run the full acceptance suite");
    add_common_flags(validate, o_val);

    CLI11_PARSE(app, argc, argv);

    try {
        if (tabulate->parsed()) return cmd_tabulate(resolve_config(o_tab));
        if (optimize->parsed()) return cmd_optimize(resolve_config(o_opt));
        if (problem2->parsed()) return cmd_problem2(resolve_config(o_p2));
        if (estimate->parsed()) return cmd_estimate(resolve_config(o_est), radii, beta_est);
        if (validate->parsed()) return cmd_validate(resolve_config(o_val));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

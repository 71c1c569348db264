#include "frapdesign/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "frapdesign/kernel.hpp"

namespace frapdesign {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    RunConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return config;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    auto as_double = [&] {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::runtime_error("bad numeric value for " + key);
        return v;
    };
    auto as_int = [&] {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) throw std::runtime_error("bad integer value for " + key);
        return static_cast<int>(v);
    };

    if (key == "r_max") r_max = as_double();
    else if (key == "r_step") r_step = as_double();
    else if (key == "beta_min") beta_min = as_double();
    else if (key == "beta_max") beta_max = as_double();
    else if (key == "beta_step") beta_step = as_double();
    else if (key == "n_max") n_max = as_int();
    else if (key == "beta0_q_order") beta0_q_order = as_int();
    else if (key == "beta0_theta_order") beta0_theta_order = as_int();
    else if (key == "ode_q_order") ode_q_order = as_int();
    else if (key == "tol") tol = as_double();
    else if (key == "energy_min") energy_min = as_double();
    else if (key == "energy_max") energy_max = as_double();
    else if (key == "energy_bins") energy_bins = as_int();
    else if (key == "seed") seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "trials") trials = as_int();
    else if (key == "sigma") sigma = as_double();
    else if (key == "cache") cache = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "n_threads") n_threads = static_cast<unsigned>(as_int());
    else throw std::runtime_error("unknown config key: " + key);
}

std::string RunConfig::resolved() const {
    std::ostringstream out;
    out.precision(17);
    out << "r_max = " << r_max << "\n";
    out << "r_step = " << r_step << "\n";
    out << "beta_min = " << beta_min << "\n";
    out << "beta_max = " << beta_max << "\n";
    out << "beta_step = " << beta_step << "\n";
    out << "n_max = " << n_max << "\n";
    out << "beta0_q_order = " << beta0_q_order << "\n";
    out << "beta0_theta_order = " << beta0_theta_order << "\n";
    out << "ode_q_order = " << ode_q_order << "\n";
    out << "tol = " << tol << "\n";
    out << "energy_min = " << energy_min << "\n";
    out << "energy_max = " << energy_max << "\n";
    out << "energy_bins = " << energy_bins << "\n";
    out << "seed = " << seed << "\n";
    out << "trials = " << trials << "\n";
    out << "sigma = " << sigma << "\n";
    out << "cache = " << cache << "\n";
    out << "out_dir = " << out_dir << "\n";
    out << "n_threads = " << n_threads << "\n";
    return out.str();
}

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw std::invalid_argument("config: " + what);
    };
    require(r_max > 0.0 && r_step > 0.0 && r_step < r_max, "need 0 < r_step < r_max");
    require(beta_step > 0.0 && beta_max > 0.0, "need positive beta_step and beta_max");
    require(beta_min >= 0.0 && beta_min < beta_max, "need 0 <= beta_min < beta_max");
    require(n_max >= 1, "need n_max >= 1");
    require(beta0_q_order >= 4 && beta0_theta_order >= 4 && ode_q_order >= 4,
            "quadrature orders too small");
    require(tol > 0.0, "need positive tol");
    require(energy_bins >= 1, "need energy_bins >= 1");
    require((energy_min == 0.0 && energy_max == 0.0) || energy_max > energy_min,
            "need energy_max > energy_min");
    require(trials >= 10, "need trials >= 10");
    require(sigma >= 0.0, "need sigma >= 0");
    require(!cache.empty() && !out_dir.empty(), "cache and out_dir must be set");
}

std::vector<double> RunConfig::r_grid() const { return uniform_grid(0.0, r_max, r_step); }

std::vector<double> RunConfig::beta_grid() const { return uniform_grid(0.0, beta_max, beta_step); }

EnergyGridSpec RunConfig::energy_grid() const {
    if (energy_min == 0.0 && energy_max == 0.0) {
        EnergyGridSpec spec = EnergyGridSpec::paper_default(r_max);
        spec.bins = energy_bins;
        return spec;
    }
    EnergyGridSpec spec;
    spec.lo = energy_min;
    spec.hi = energy_max;
    spec.bins = energy_bins;
    return spec;
}

SearchOptions RunConfig::search_options() const {
    SearchOptions options;
    options.n_max = n_max;
    return options;
}

}  // namespace frapdesign

#include "frapdesign/report_io.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "frapdesign/io_util.hpp"
#include "frapdesign/sensitivity.hpp"

namespace frapdesign {

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

void pad_radii(std::ostringstream& out, const std::vector<double>& radii, int n_slots = 4) {
    for (int i = 0; i < n_slots; ++i) {
        out << ',';
        if (i < static_cast<int>(radii.size())) out << fmt(radii[i]);
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void write_sweep_csv(const BetaSweepResult& sweep, const std::string& path) {
    std::ostringstream out;
    out << "beta,nstar,r1,r2,r3,r4,kernel_sum,s_int\n";
    for (const DesignSweepResult& res : sweep.results) {
        out << fmt(res.beta) << ',' << res.overall_best.n;
        pad_radii(out, res.overall_best.radii);
        out << ',' << fmt(res.overall_best.kernel_sum) << ',' << fmt(res.s_int) << '\n';
    }
    atomic_write_file(path, out.str());
}

std::vector<SweepRow> parse_sweep_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != "beta,nstar,r1,r2,r3,r4,kernel_sum,s_int")
        throw std::runtime_error("parse_sweep_csv: unexpected header in " + path);
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 8) throw std::runtime_error("parse_sweep_csv: malformed row");
        SweepRow row;
        row.beta = std::stod(fields[0]);
        row.n_star = std::stoi(fields[1]);
        for (int i = 0; i < 4; ++i)
            if (!fields[2 + i].empty()) row.radii.push_back(std::stod(fields[2 + i]));
        row.kernel_sum = std::stod(fields[6]);
        row.s_int = std::stod(fields[7]);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_fig1_csv(const BetaSweepResult& sweep, const std::string& path) {
    std::ostringstream out;
    out << "beta,log_kernel_sum_overall,nstar,log_best_n1,log_best_n2,log_best_n3,log_best_n4\n";
    for (const DesignSweepResult& res : sweep.results) {
        out << fmt(res.beta) << ',';
        if (res.overall_best.kernel_sum > 0.0) out << fmt(std::log(res.overall_best.kernel_sum));
        out << ',' << res.overall_best.n;
        for (int n = 1; n <= 4; ++n) {
            out << ',';
            if (n <= static_cast<int>(res.per_n_best.size())) {
                const double v = res.per_n_best[n - 1].kernel_sum;
                if (v > 0.0) out << fmt(std::log(v));
            }
        }
        out << '\n';
    }
    atomic_write_file(path, out.str());
}

void write_fig2_csv(const BetaSweepResult& sweep, const std::string& path) {
    std::ostringstream out;
    out << "beta,r1,r2,r3,r4\n";
    for (const DesignSweepResult& res : sweep.results) {
        out << fmt(res.beta);
        pad_radii(out, res.overall_best.radii);
        out << '\n';
    }
    atomic_write_file(path, out.str());
}

void write_fig3_csv(const BetaSweepResult& sweep, const std::string& path) {
    std::ostringstream out;
    out << "beta,energy\n";
    for (const DesignSweepResult& res : sweep.results) {
        double energy = 0.0;
        if (!res.overall_best.radii.empty())
            energy = shape_energy(BleachShape(res.overall_best.radii));
        out << fmt(res.beta) << ',' << fmt(energy) << '\n';
    }
    atomic_write_file(path, out.str());
}

void write_transitions_csv(const BetaSweepResult& sweep, const std::string& path) {
    std::ostringstream out;
    out << "beta,uncertainty,n_from,n_to\n";
    for (const Transition& t : sweep.transitions)
        out << fmt(t.beta) << ',' << fmt(t.uncertainty) << ',' << t.n_from << ',' << t.n_to << '\n';
    atomic_write_file(path, out.str());
}

void write_problem2_csv(const EnergyConstrainedMap& map, const std::string& path) {
    std::ostringstream out;
    out << "beta,energy,nstar,value,r1,r2,r3,r4\n";
    for (std::size_t s = 0; s < map.slices.size(); ++s) {
        const EnergySlice& slice = map.slices[s];
        for (int b = 0; b < map.energy_grid.bins; ++b) {
            const EnergyCell& cell = slice.cells[b];
            if (cell.n_star == 0) continue;
            out << fmt(slice.beta) << ',' << fmt(map.energy_grid.center(b)) << ',' << cell.n_star
                << ',' << fmt(cell.value);
            pad_radii(out, cell.radii);
            out << '\n';
        }
    }
    atomic_write_file(path, out.str());
}

void write_sweep_json(const BetaSweepResult& sweep, const std::string& path) {
    nlohmann::json j;
    nlohmann::json results = nlohmann::json::array();
    for (const DesignSweepResult& res : sweep.results) {
        nlohmann::json r;
        r["beta"] = res.beta;
        r["nstar"] = res.overall_best.n;
        r["radii"] = res.overall_best.radii;
        r["kernel_sum"] = res.overall_best.kernel_sum;
        r["s_int"] = res.s_int;
        nlohmann::json per_n = nlohmann::json::array();
        for (const PerNBest& b : res.per_n_best) {
            per_n.push_back({{"n", b.n}, {"radii", b.radii}, {"kernel_sum", b.kernel_sum}});
        }
        r["per_n_best"] = per_n;
        results.push_back(r);
    }
    j["results"] = results;
    nlohmann::json transitions = nlohmann::json::array();
    for (const Transition& t : sweep.transitions)
        transitions.push_back({{"beta", t.beta},
                               {"uncertainty", t.uncertainty},
                               {"n_from", t.n_from},
                               {"n_to", t.n_to}});
    j["transitions"] = transitions;
    j["monotonicity_anomaly"] = sweep.monotonicity_anomaly;
    atomic_write_file(path, j.dump(2));
}

}  // namespace frapdesign

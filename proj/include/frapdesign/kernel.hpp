#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace frapdesign {

/// Raised when an adaptive quadrature cannot reach the requested accuracy;
/// carries the value it did reach and the remaining error estimate.
struct accuracy_error : std::runtime_error {
    accuracy_error(const std::string& what, double value_, double estimate_)
        : std::runtime_error(what), value(value_), estimate(estimate_) {}
    double value;
    double estimate;
};

struct KernelTableMeta {
    int beta0_q_order = 128;
    int beta0_theta_order = 96;
    int ode_q_order = 64;
    double ode_rel_tol = 1e-7;
    double ode_abs_tol_scale = 1e-9;  // absolute tolerance = scale * max|k(.,.;0)|
    std::uint64_t creation_hash = 0;
};

/// Tabulated sensitivity kernel k(r, s; beta) on a shared r = s grid and a
/// beta grid starting at 0. Values are stored fully (both triangles), built
/// symmetric by construction.
class KernelTable {
public:
    KernelTable() = default;
    KernelTable(std::vector<double> r_grid, std::vector<double> beta_grid,
                std::vector<double> values, KernelTableMeta meta);

    const std::vector<double>& r_grid() const { return r_grid_; }
    const std::vector<double>& beta_grid() const { return beta_grid_; }
    const std::vector<double>& values() const { return values_; }
    const KernelTableMeta& meta() const { return meta_; }

    int nr() const { return static_cast<int>(r_grid_.size()); }
    int nb() const { return static_cast<int>(beta_grid_.size()); }

    double at(int ib, int ir, int is) const {
        return values_[(static_cast<std::size_t>(ib) * nr() + ir) * nr() + is];
    }
    const double* slice(int ib) const {
        return values_.data() + static_cast<std::size_t>(ib) * nr() * nr();
    }

    /// Index of a beta that lies on the grid (within one part in 1e-9 of a
    /// node); throws std::out_of_range otherwise.
    int beta_index(double beta) const;

    /// Bilinear interpolation in (r, s), linear in beta. No extrapolation:
    /// arguments outside the grids throw std::out_of_range.
    double interpolate(double r, double s, double beta) const;

    double max_abs() const;

    /// Checks symmetry, the zero-argument column, grid ordering and
    /// finiteness; throws std::runtime_error naming the failed check.
    void validate() const;

private:
    std::vector<double> r_grid_;
    std::vector<double> beta_grid_;
    std::vector<double> values_;  // [beta][r][s]
    KernelTableMeta meta_;
};

/// Kernel at beta = 0 via the closed real-space triple integral, by tensor
/// Gauss-Legendre quadrature. Symmetric in (r, s); exactly 0 when r or s is 0.
double kernel_beta0(double r, double s, int n_q = 128, int n_theta = 96);

/// Full beta = 0 slice on a grid (exploits symmetry, runs in parallel).
std::vector<double> kernel_beta0_grid(const std::vector<double>& r_grid, int n_q = 128,
                                      int n_theta = 96, unsigned n_threads = 0);

struct KernelDirectConfig {
    int q_order = 64;        // nodes of the windowed inner q integral
    int panel_order = 16;    // outer panel order (error gauged against 2x)
    double rel_tol = 1e-7;   // relative to the L1 size of the outer integral
    int max_depth = 48;
};

/// Slow reference evaluation of k(r, s; beta) by the (q, rho) double
/// integral, rho in [beta, inf) mapped to a finite interval through
/// rho = beta / tau. Throws accuracy_error if the adaptive outer quadrature
/// stalls. Requires beta > 0.
double kernel_direct(double r, double s, double beta, const KernelDirectConfig& config = {});

struct MarchConfig {
    int beta0_q_order = 128;
    int beta0_theta_order = 96;
    int ode_q_order = 64;
    double ode_rel_tol = 1e-7;
    double ode_abs_tol_scale = 1e-9;
    unsigned n_threads = 0;
    std::function<void(const std::string&)> log;  // optional progress sink
};

/// Builds the full kernel table: beta = 0 slice from kernel_beta0, then all
/// (r, s) pairs advanced together in beta by an adaptive embedded
/// Dormand-Prince 5(4) integrator driven by a single max-norm controller,
/// with values emitted at every beta grid point. beta_grid[0] must be 0.
KernelTable kernel_ode_march(const std::vector<double>& r_grid,
                             const std::vector<double>& beta_grid, const MarchConfig& config = {});

/// Hash of everything that determines a marched table's content (grids,
/// quadrature orders, tolerances); stored in the table meta and used for
/// cache-hit detection.
std::uint64_t march_config_hash(const std::vector<double>& r_grid,
                                const std::vector<double>& beta_grid, const MarchConfig& config);

/// Lossless binary persistence (documented little-endian layout with a
/// trailing checksum). save_table writes atomically; load_table re-validates
/// the invariants and names the failed check on error.
void save_table(const KernelTable& table, const std::string& path);
KernelTable load_table(const std::string& path);

/// CSV export with header "beta,r,s,k".
void export_csv(const KernelTable& table, const std::string& path);

/// Uniform grid lo, lo+step, ..., hi (inclusive; hi must be a whole number of
/// steps away from lo).
std::vector<double> uniform_grid(double lo, double hi, double step);

/// FNV-1a 64-bit hash, used for table checksums and cache keys.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace frapdesign

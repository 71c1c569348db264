#pragma once

#include <utility>
#include <vector>

#include "frapdesign/sensitivity_value.hpp"

namespace frapdesign {

/// Observation window and noise model of the experiment. Data live on the
/// cylinder ||x|| <= R, t in [0, T]; beta = R^2 / (4 T D) is the scaled
/// inverse diffusivity all dimensionless quantities are expressed in.
struct ExperimentGeometry {
    double R;
    double T;
    double D;
    double sigma;
    double u_ref;

    ExperimentGeometry(double R_, double T_, double D_, double sigma_ = 0.0, double u_ref_ = 1.0);

    double beta() const { return R * R / (4.0 * T * D); }

    /// Unit window (R = T = 1) with D chosen so that beta() == beta.
    static ExperimentGeometry from_beta(double beta, double sigma = 0.0, double u_ref = 1.0);
};

/// Radially symmetric binary initial condition described by its jump radii
/// r_1 < ... < r_N (scaled units of R). Occupancy alternates inward from the
/// outermost interval [r_{N-1}, r_N]; odd N means the disk [0, r_1] is filled.
class BleachShape {
public:
    explicit BleachShape(std::vector<double> radii);

    const std::vector<double>& radii() const { return radii_; }
    int jump_count() const { return static_cast<int>(radii_.size()); }

    /// Sign of the delta carried by jump j (0-based); the outermost is -1.
    double jump_sign(int j) const;

    /// Filled intervals [lo, hi), innermost first.
    std::vector<std::pair<double, double>> occupied_intervals() const;

    /// Indicator value g(r).
    bool contains(double r) const;

private:
    std::vector<double> radii_;
};

/// Tensor quadrature grid over the scaled observation cylinder; weights
/// absorb the 2 pi q area element so that integrating 1 yields pi.
struct SpaceTimeGrid {
    std::vector<double> radial_nodes;  // q in (0, 1)
    std::vector<double> time_nodes;    // tau in (0, 1)
    std::vector<double> weights;       // nq x nt, q-major

    static SpaceTimeGrid tensor_gauss(int n_radial, int n_time);

    double weight(int iq, int it) const { return weights[iq * time_nodes.size() + it]; }
};

/// Scaled concentration v(q, tau) for the given shape, by radial reduction of
/// the free-space heat propagator. tau must be positive.
double solve_radial(const BleachShape& shape, double beta, double q, double tau);

/// Parameter sensitivity du/dD at (q R, tau T), evaluated as
/// (T/R^2) tau * Laplacian(v) via the propagator applied to the jump
/// distribution of the shape. tau must be positive.
double sensitivity_field(const BleachShape& shape, const ExperimentGeometry& geometry, double q,
                         double tau);

/// Brute-force S_int = int int |du/dD|^2 dx dt over the observation cylinder
/// by direct quadrature of sensitivity_field on the grid. Attaches a warning
/// when the self-estimated quadrature error exceeds accuracy_request.
SensitivityValue oracle_sensitivity(const BleachShape& shape, const ExperimentGeometry& geometry,
                                    const SpaceTimeGrid& grid, double accuracy_request = 1e-3);

/// Real-valued pixel raster of an initial condition, centered coordinates in
/// units of R. Values outside [0,1] are rejected; non-binary values are
/// allowed so relaxed designs can be probed.
struct PixelMask {
    int nx = 0;
    int ny = 0;
    double pixel_size = 0.0;  // scaled units
    std::vector<double> values;

    double value(int ix, int iy) const { return values[iy * nx + ix]; }
    double center_x(int ix) const { return (ix - 0.5 * (nx - 1)) * pixel_size; }
    double center_y(int iy) const { return (iy - 0.5 * (ny - 1)) * pixel_size; }

    /// Rotate by a quarter turn about the grid center (exact on the raster).
    PixelMask rotated_quarter_turn() const;

    /// Coverage raster of a disk of given center/radius (scaled units),
    /// anti-aliased by subsampling each pixel.
    static PixelMask disk(int n, double pixel_size, double cx, double cy, double radius,
                          int subsamples = 4);
};

/// S_int for an arbitrary (not necessarily radial) initial condition via 2-D
/// heat-kernel convolution against the mask, target points on a polar grid of
/// n_angles rays through the radial/time nodes of `grid`.
SensitivityValue oracle_sensitivity_2d(const PixelMask& mask, const ExperimentGeometry& geometry,
                                       const SpaceTimeGrid& grid, int n_angles = 32);

}  // namespace frapdesign

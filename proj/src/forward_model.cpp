#include "frapdesign/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "frapdesign/special_functions.hpp"

namespace frapdesign {

ExperimentGeometry::ExperimentGeometry(double R_, double T_, double D_, double sigma_,
                                       double u_ref_)
    : R(R_), T(T_), D(D_), sigma(sigma_), u_ref(u_ref_) {
    if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("ExperimentGeometry: R must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("ExperimentGeometry: T must be positive");
    if (!(D > 0.0) || !std::isfinite(D)) throw std::invalid_argument("ExperimentGeometry: D must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("ExperimentGeometry: sigma must be nonnegative");
    if (!(u_ref > 0.0) || !std::isfinite(u_ref)) throw std::invalid_argument("ExperimentGeometry: u_ref must be positive");
}

ExperimentGeometry ExperimentGeometry::from_beta(double beta, double sigma, double u_ref) {
    if (!(beta > 0.0)) throw std::invalid_argument("ExperimentGeometry::from_beta: beta must be positive");
    return ExperimentGeometry(1.0, 1.0, 1.0 / (4.0 * beta), sigma, u_ref);
}

BleachShape::BleachShape(std::vector<double> radii) : radii_(std::move(radii)) {
    if (radii_.empty()) throw std::invalid_argument("BleachShape: need at least one jump radius");
    double prev = 0.0;
    for (double r : radii_) {
        if (!std::isfinite(r) || !(r > prev))
            throw std::invalid_argument("BleachShape: radii must be positive and strictly increasing");
        prev = r;
    }
}

double BleachShape::jump_sign(int j) const {
    // 1-based position p carries (-1)^(N-p+1); the outermost jump is -1.
    const int n = jump_count();
    return ((n - j) % 2 == 0) ? -1.0 : 1.0;
}

std::vector<std::pair<double, double>> BleachShape::occupied_intervals() const {
    std::vector<std::pair<double, double>> out;
    for (int m = jump_count() - 1; m >= 0; m -= 2) {
        const double hi = radii_[m];
        const double lo = (m >= 1) ? radii_[m - 1] : 0.0;
        out.emplace_back(lo, hi);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

bool BleachShape::contains(double r) const {
    for (const auto& [lo, hi] : occupied_intervals())
        if (r >= lo && r < hi) return true;
    return false;
}

SpaceTimeGrid SpaceTimeGrid::tensor_gauss(int n_radial, int n_time) {
    if (n_radial < 1 || n_time < 1)
        throw std::invalid_argument("SpaceTimeGrid: node counts must be positive");
    const QuadratureRule rq = gauss_legendre(n_radial, 0.0, 1.0);
    const QuadratureRule rt = gauss_legendre(n_time, 0.0, 1.0);
    SpaceTimeGrid grid;
    grid.radial_nodes = rq.nodes;
    grid.time_nodes = rt.nodes;
    grid.weights.resize(static_cast<std::size_t>(n_radial) * n_time);
    for (int i = 0; i < n_radial; ++i)
        for (int j = 0; j < n_time; ++j)
            grid.weights[i * n_time + j] = 2.0 * M_PI * rq.nodes[i] * rq.weights[i] * rt.weights[j];
    return grid;
}

double solve_radial(const BleachShape& shape, double beta, double q, double tau) {
    if (!(tau > 0.0)) throw std::domain_error("solve_radial: tau must be positive");
    if (!(beta > 0.0)) throw std::invalid_argument("solve_radial: beta must be positive");
    // v(q,tau) = int s/var * exp(-(q-s)^2/(2 var)) * i0_scaled(q s / var) g(s) ds,
    // var = tau/(2 beta). The integrand is negligible outside |q-s| <~ 12 sigma.
    const double var = tau / (2.0 * beta);
    const double sig = std::sqrt(var);
    const double window = 12.0 * sig;
    double total = 0.0;
    for (const auto& [lo, hi] : shape.occupied_intervals()) {
        const double a = std::max(lo, q - window);
        const double b = std::min(hi, q + window);
        if (!(a < b)) continue;
        const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / (2.0 * sig))));
        const double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const QuadratureRule rule = gauss_legendre(24, a + p * h, a + (p + 1) * h);
            total += rule.integrate([&](double s) {
                const double d = q - s;
                return s / var * std::exp(-d * d / (2.0 * var)) * bessel_i0_scaled(q * s / var);
            });
        }
    }
    return total;
}

namespace {

// Laplacian of the scaled solution at (q, tau), from the propagator applied
// to the jump distribution: each jump r_j with sign s_j contributes
// s_j * 4 rho^2 r_j e^{-rho (q-r_j)^2} [ r_j i0s(2 q r_j rho) - q i1s(2 q r_j rho) ],
// rho = beta/tau.
double laplacian_v(const BleachShape& shape, double beta, double q, double tau) {
    const double rho = beta / tau;
    const auto& radii = shape.radii();
    double acc = 0.0;
    for (int j = 0; j < shape.jump_count(); ++j) {
        const double r = radii[j];
        const double d = q - r;
        const double e = std::exp(-rho * d * d);
        if (e == 0.0) continue;
        const double arg = 2.0 * q * r * rho;
        acc += shape.jump_sign(j) * r * e *
               (r * bessel_i0_scaled(arg) - q * bessel_i1_scaled(arg));
    }
    return 4.0 * rho * rho * acc;
}

}  // namespace

double sensitivity_field(const BleachShape& shape, const ExperimentGeometry& geometry, double q,
                         double tau) {
    if (!(tau > 0.0)) throw std::domain_error("sensitivity_field: tau must be positive");
    const double beta = geometry.beta();
    return geometry.T / (geometry.R * geometry.R) * tau * laplacian_v(shape, beta, q, tau);
}

namespace {

double cylinder_quadrature(const BleachShape& shape, const ExperimentGeometry& geometry,
                           const SpaceTimeGrid& grid) {
    const std::size_t nq = grid.radial_nodes.size();
    const std::size_t nt = grid.time_nodes.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < nq; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            const double f = sensitivity_field(shape, geometry, grid.radial_nodes[i], grid.time_nodes[j]);
            acc += grid.weights[i * nt + j] * f * f;
        }
    }
    return geometry.R * geometry.R * geometry.T * acc;
}

}  // namespace

SensitivityValue oracle_sensitivity(const BleachShape& shape, const ExperimentGeometry& geometry,
                                    const SpaceTimeGrid& grid, double accuracy_request) {
    const double s = cylinder_quadrature(shape, geometry, grid);

    // self-estimate against an embedded coarser grid
    const int nq2 = std::max(2, static_cast<int>(grid.radial_nodes.size()) / 2);
    const int nt2 = std::max(2, static_cast<int>(grid.time_nodes.size()) / 2);
    const double s_coarse = cylinder_quadrature(shape, geometry, SpaceTimeGrid::tensor_gauss(nq2, nt2));
    const double est = std::abs(s - s_coarse) / std::max(std::abs(s), 1e-300);

    SensitivityValue value;
    value.beta = geometry.beta();
    value.prefactor = 32.0 * M_PI * std::pow(value.beta, 3) * std::pow(geometry.T, 3) /
                      (geometry.R * geometry.R);
    value.s_int = s;
    value.kernel_sum = s / value.prefactor;
    if (est > accuracy_request)
        value.warning = "quadrature self-estimate " + std::to_string(est) +
                        " exceeds requested accuracy " + std::to_string(accuracy_request);
    return value;
}

PixelMask PixelMask::rotated_quarter_turn() const {
    if (nx != ny) throw std::invalid_argument("PixelMask: quarter turn needs a square raster");
    PixelMask out = *this;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            out.values[iy * nx + ix] = values[ix * nx + (nx - 1 - iy)];
    return out;
}

PixelMask PixelMask::disk(int n, double pixel_size, double cx, double cy, double radius,
                          int subsamples) {
    PixelMask mask;
    mask.nx = mask.ny = n;
    mask.pixel_size = pixel_size;
    mask.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    const double r2 = radius * radius;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            int inside = 0;
            for (int sy = 0; sy < subsamples; ++sy) {
                for (int sx = 0; sx < subsamples; ++sx) {
                    const double x = mask.center_x(ix) + ((sx + 0.5) / subsamples - 0.5) * pixel_size;
                    const double y = mask.center_y(iy) + ((sy + 0.5) / subsamples - 0.5) * pixel_size;
                    const double dx = x - cx, dy = y - cy;
                    if (dx * dx + dy * dy <= r2) ++inside;
                }
            }
            mask.values[iy * n + ix] = static_cast<double>(inside) / (subsamples * subsamples);
        }
    }
    return mask;
}

SensitivityValue oracle_sensitivity_2d(const PixelMask& mask, const ExperimentGeometry& geometry,
                                       const SpaceTimeGrid& grid, int n_angles) {
    if (mask.nx < 1 || mask.ny < 1 || !(mask.pixel_size > 0.0))
        throw std::invalid_argument("oracle_sensitivity_2d: invalid mask raster");
    const double beta = geometry.beta();

    // gather contributing pixels once
    struct Source {
        double x, y, amplitude;
    };
    std::vector<Source> sources;
    const double pixel_area = mask.pixel_size * mask.pixel_size;
    for (int iy = 0; iy < mask.ny; ++iy) {
        for (int ix = 0; ix < mask.nx; ++ix) {
            const double v = mask.value(ix, iy);
            if (v < 0.0 || v > 1.0)
                throw std::invalid_argument("oracle_sensitivity_2d: mask values must lie in [0,1]");
            if (v > 0.0) sources.push_back({mask.center_x(ix), mask.center_y(iy), v * pixel_area});
        }
    }

    SensitivityValue value;
    value.beta = beta;
    value.prefactor = 32.0 * M_PI * std::pow(beta, 3) * std::pow(geometry.T, 3) /
                      (geometry.R * geometry.R);
    if (sources.empty()) {
        value.warning = "empty mask: zero initial condition";
        return value;
    }

    const std::size_t nq = grid.radial_nodes.size();
    const std::size_t nt = grid.time_nodes.size();
    std::vector<double> cphi(n_angles), sphi(n_angles);
    for (int k = 0; k < n_angles; ++k) {
        cphi[k] = std::cos(2.0 * M_PI * k / n_angles);
        sphi[k] = std::sin(2.0 * M_PI * k / n_angles);
    }

    double acc = 0.0;
    for (std::size_t j = 0; j < nt; ++j) {
        const double tau = grid.time_nodes[j];
        const double tg = tau / (4.0 * beta);  // heat-kernel time for the scaled problem
        const double scale = geometry.T / (geometry.R * geometry.R) * tau;
        for (std::size_t i = 0; i < nq; ++i) {
            const double q = grid.radial_nodes[i];
            double angle_mean = 0.0;
            for (int k = 0; k < n_angles; ++k) {
                const double zx = q * cphi[k], zy = q * sphi[k];
                double dv = 0.0;
                for (const Source& src : sources) {
                    const double dx = zx - src.x, dy = zy - src.y;
                    const double d2 = dx * dx + dy * dy;
                    const double g = std::exp(-d2 / (4.0 * tg)) / (4.0 * M_PI * tg);
                    dv += src.amplitude * g * (d2 / (4.0 * tg * tg) - 1.0 / tg);
                }
                const double f = scale * dv;
                angle_mean += f * f;
            }
            acc += grid.weight(static_cast<int>(i), static_cast<int>(j)) * angle_mean / n_angles;
        }
    }
    value.s_int = geometry.R * geometry.R * geometry.T * acc;
    value.kernel_sum = value.s_int / value.prefactor;
    return value;
}

}  // namespace frapdesign

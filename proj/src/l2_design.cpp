#include <cmath>
#include <stdexcept>

#include "frapdesign/optimizer.hpp"
#include "frapdesign/special_functions.hpp"

namespace frapdesign {

namespace {

// Sensitivity-field contribution of a unit upward jump of the radial initial
// condition at radius r (Laplacian of the propagated step), rho = beta/tau.
double jump_field(double q, double r, double rho) {
    if (r == 0.0) return 0.0;
    const double d = q - r;
    const double e = std::exp(-rho * d * d);
    if (e == 0.0) return 0.0;
    const double arg = 2.0 * q * r * rho;
    return 4.0 * rho * rho * r * e *
           (r * bessel_i0_scaled(arg) - q * bessel_i1_scaled(arg));
}

}  // namespace

L2DesignResult l2_optimal_design(const ExperimentGeometry& geometry, const L2DesignOptions& options,
                                 double c2) {
    if (options.n_cells < 2) throw std::invalid_argument("l2_optimal_design: need >= 2 cells");
    if (!(options.support_radius > 0.0))
        throw std::invalid_argument("l2_optimal_design: support radius must be positive");
    if (!(c2 > 0.0)) throw std::invalid_argument("l2_optimal_design: c2 must be positive");

    const double beta = geometry.beta();
    const double R = geometry.R, T = geometry.T;
    const int nc = options.n_cells;

    L2DesignResult result;
    result.cell_edges.resize(nc + 1);
    for (int j = 0; j <= nc; ++j)
        result.cell_edges[j] = options.support_radius * j / nc;

    // Targets over the observation cylinder; W carries the unscaled measure.
    const QuadratureRule rq = gauss_legendre(options.n_q, 0.0, 1.0);
    const QuadratureRule rt = gauss_legendre(options.n_t, 0.0, 1.0);
    const int nt_targets = options.n_q * options.n_t;
    std::vector<double> W(nt_targets);

    // A[target][cell]: field of the cell indicator, piecewise-constant basis.
    // An indicator [a, b] carries jumps +1 at a and -1 at b.
    std::vector<double> A(static_cast<std::size_t>(nt_targets) * nc);
    for (int it = 0; it < options.n_t; ++it) {
        const double tau = rt.nodes[it];
        const double rho = beta / tau;
        const double field_scale = T / (R * R) * tau;
        for (int iq = 0; iq < options.n_q; ++iq) {
            const double q = rq.nodes[iq];
            const int row = iq * options.n_t + it;
            W[row] = R * R * T * 2.0 * M_PI * q * rq.weights[iq] * rt.weights[it];
            double* arow = &A[static_cast<std::size_t>(row) * nc];
            double upper = jump_field(q, result.cell_edges[0], rho);
            for (int j = 0; j < nc; ++j) {
                const double lower = upper;
                upper = jump_field(q, result.cell_edges[j + 1], rho);
                arow[j] = field_scale * (lower - upper);
            }
        }
    }

    // Cell masses of the L2(R^2) inner product.
    std::vector<double> sqrt_m(nc);
    for (int j = 0; j < nc; ++j) {
        const double a = result.cell_edges[j], b = result.cell_edges[j + 1];
        sqrt_m[j] = std::sqrt(M_PI * R * R * (b * b - a * a));
    }

    // Power iteration on S = M^-1/2 A^T W A M^-1/2 (symmetric PSD).
    std::vector<double> z(nc, 1.0 / std::sqrt(static_cast<double>(nc)));
    std::vector<double> fx(nt_targets), sz(nc);
    auto apply_s = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (int row = 0; row < nt_targets; ++row) {
            const double* arow = &A[static_cast<std::size_t>(row) * nc];
            double acc = 0.0;
            for (int j = 0; j < nc; ++j) acc += arow[j] * v[j] / sqrt_m[j];
            fx[row] = W[row] * acc;
        }
        for (int j = 0; j < nc; ++j) {
            double acc = 0.0;
            for (int row = 0; row < nt_targets; ++row)
                acc += A[static_cast<std::size_t>(row) * nc + j] * fx[row];
            out[j] = acc / sqrt_m[j];
        }
    };

    double rayleigh_prev = -1.0;
    bool converged = false;
    for (int iter = 0; iter < options.max_iter; ++iter) {
        apply_s(z, sz);
        double rayleigh = 0.0;
        for (int j = 0; j < nc; ++j) rayleigh += z[j] * sz[j];
        result.rayleigh_history.push_back(rayleigh);
        result.iterations = iter + 1;
        double norm = 0.0;
        for (double v : sz) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0)
            throw std::runtime_error("l2_optimal_design: operator annihilated the iterate");
        for (int j = 0; j < nc; ++j) z[j] = sz[j] / norm;
        if (rayleigh_prev >= 0.0 &&
            std::abs(rayleigh - rayleigh_prev) <= options.tol * std::abs(rayleigh)) {
            converged = true;
            break;
        }
        rayleigh_prev = rayleigh;
    }
    if (!converged)
        throw std::runtime_error(
            "l2_optimal_design: power iteration did not converge after " +
            std::to_string(options.max_iter) +
            " iterations (last Rayleigh quotient " +
            std::to_string(result.rayleigh_history.back()) + ")");

    result.sigma1 = std::sqrt(result.rayleigh_history.back());

    // de-whiten, fix the overall sign, scale to the requested L2 norm
    result.profile.resize(nc);
    double peak = 0.0;
    for (int j = 0; j < nc; ++j) {
        result.profile[j] = z[j] / sqrt_m[j];
        if (std::abs(result.profile[j]) > std::abs(peak)) peak = result.profile[j];
    }
    const double orient = (peak < 0.0) ? -1.0 : 1.0;
    for (double& v : result.profile) v *= orient * c2;
    return result;
}

}  // namespace frapdesign

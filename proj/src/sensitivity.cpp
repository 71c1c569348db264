#include "frapdesign/sensitivity.hpp"

#include <cmath>
#include <stdexcept>

#include "frapdesign/kernel.hpp"

namespace frapdesign {

double shape_energy(const BleachShape& shape) {
    double area = 0.0;
    for (const auto& [lo, hi] : shape.occupied_intervals()) area += hi * hi - lo * lo;
    return M_PI * area;
}

double kernel_alternating_sum(std::span<const double> radii, const KernelTable& table,
                              double beta) {
    double sum = 0.0;
    for (std::size_t j = 0; j < radii.size(); ++j) {
        for (std::size_t k = 0; k < radii.size(); ++k) {
            const double term = table.interpolate(radii[j], radii[k], beta);
            sum += ((j + k) % 2 == 0) ? term : -term;
        }
    }
    return sum;
}

namespace {

SensitivityValue assemble(const BleachShape& shape, const KernelTable& table, double beta,
                          double T, double R) {
    SensitivityValue value;
    value.beta = beta;
    value.kernel_sum = kernel_alternating_sum(shape.radii(), table, beta);

    double scale = 0.0;
    for (double r : shape.radii()) scale = std::max(scale, std::abs(table.interpolate(r, r, beta)));
    if (value.kernel_sum < 0.0) {
        if (value.kernel_sum < -1e-9 * std::max(scale, 1e-30))
            throw std::runtime_error("shape_sensitivity: kernel sum " +
                                     std::to_string(value.kernel_sum) +
                                     " is negative beyond rounding noise; table looks broken");
        value.warning = "kernel sum " + std::to_string(value.kernel_sum) +
                        " clamped to 0 (interpolation rounding)";
        value.kernel_sum = 0.0;
    }
    value.prefactor = 32.0 * M_PI * beta * beta * beta * T * T * T / (R * R);
    value.s_int = value.prefactor * value.kernel_sum;
    return value;
}

}  // namespace

SensitivityValue shape_sensitivity(const BleachShape& shape, const KernelTable& table,
                                   double beta) {
    return assemble(shape, table, beta, 1.0, 1.0);
}

SensitivityValue shape_sensitivity(const BleachShape& shape, const KernelTable& table,
                                   const ExperimentGeometry& geometry) {
    return assemble(shape, table, geometry.beta(), geometry.T, geometry.R);
}

}  // namespace frapdesign

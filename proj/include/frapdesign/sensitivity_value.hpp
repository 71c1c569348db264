#pragma once

#include <optional>
#include <string>

namespace frapdesign {

/// Integral sensitivity of a design, split into the shape-independent
/// dimensional prefactor 32 pi beta^3 T^3 / R^2 and the dimensionless
/// kernel-sum part, with s_int = prefactor * kernel_sum.
struct SensitivityValue {
    double kernel_sum = 0.0;
    double prefactor = 0.0;
    double s_int = 0.0;
    double beta = 0.0;
    std::optional<std::string> warning;
};

}  // namespace frapdesign

#pragma once

#include <span>

#include "frapdesign/forward_model.hpp"
#include "frapdesign/sensitivity_value.hpp"

namespace frapdesign {

class KernelTable;

/// Scaled L1-norm of the initial condition: pi times the occupied area,
/// with occupancy alternating inward from the outermost interval.
double shape_energy(const BleachShape& shape);

/// The alternating double sum over table-interpolated kernel values at the
/// given radii; the shape sensitivity is this sum times the prefactor.
/// Radii and beta must lie inside the tabulated ranges.
double kernel_alternating_sum(std::span<const double> radii, const KernelTable& table, double beta);

/// Shape sensitivity assembled from the kernel table. The first overload
/// normalizes T = R = 1; the second applies the geometry's prefactor (its
/// beta is used for the lookup). Tiny negative sums from interpolation noise
/// are clamped to 0 with a warning; larger negatives indicate a broken table
/// and throw.
SensitivityValue shape_sensitivity(const BleachShape& shape, const KernelTable& table, double beta);
SensitivityValue shape_sensitivity(const BleachShape& shape, const KernelTable& table,
                                   const ExperimentGeometry& geometry);

}  // namespace frapdesign

#pragma once

#include <cstddef>
#include <vector>

namespace frapdesign {

/// Nodes and weights approximating an integral over [lo, hi].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double lo = 0.0;
    double hi = 0.0;

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

// Exponentially scaled modified Bessel functions of the first kind,
// e^-x I0(x) and e^-x I1(x). Bounded on [0, inf), so products with
// Gaussian factors can be formed without overflow at any argument.
// Throws std::domain_error for x < 0.
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);

// n-point Gauss-Legendre rule on [lo, hi]; exact for polynomials of degree
// <= 2n-1. Nodes are found by Newton iteration and cached per order.
// Throws std::invalid_argument for n < 1 or lo >= hi.
QuadratureRule gauss_legendre(int n, double lo, double hi);

}  // namespace frapdesign

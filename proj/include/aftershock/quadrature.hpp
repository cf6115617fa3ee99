#pragma once

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace aftershock {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-13;
    unsigned max_depth = 40;
};

/// Adaptive 15-point Gauss-Kronrod integral of `f` over [a, b]; either bound
/// may be infinite. Refinement continues until the error estimate is below
/// both the absolute tolerance and the relative tolerance.
template <class F>
double integrate(F f, double a, double b, const QuadratureOptions& opts = {},
                 double* error_out = nullptr) {
    using boost::math::quadrature::gauss_kronrod;
    if (a == b) return 0.0;
    double l1 = 0.0;
    double err = 0.0;
    // One non-adaptive pass sizes the integrand so the absolute tolerance can
    // be expressed as the relative tolerance Boost expects.
    gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err, &l1);
    double tol = opts.rel_tol;
    if (l1 > 0.0) tol = std::min(tol, opts.abs_tol / l1);
    tol = std::max(tol, 4.0 * std::numeric_limits<double>::epsilon());
    const double value = gauss_kronrod<double, 15>::integrate(f, a, b, opts.max_depth, tol, &err, &l1);
    if (error_out != nullptr) *error_out = err;
    return value;
}

}  // namespace aftershock

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace aftershock {

/// Fills `residuals` for the parameter vector `x`. Residuals are expected to
/// be already weighted, so the objective is their plain sum of squares.
using ResidualFn = std::function<void(std::span<const double> x, std::span<double> residuals)>;

struct LeastSquaresOptions {
    std::size_t max_iterations = 500;
    /// Converged once every component of an accepted step is below this.
    double step_tol = 1e-8;
    double initial_damping = 1e-3;
    /// Optional box bounds; empty means unbounded. Components sitting on a
    /// bound with the descent direction pointing outwards are held fixed.
    std::vector<double> lower;
    std::vector<double> upper;
};

struct LeastSquaresResult {
    std::vector<double> x;
    std::vector<double> residuals;
    /// (J^T J)^-1 at the solution, row-major.
    std::vector<double> covariance;
    double chi2 = 0.0;
    std::size_t iterations = 0;
    /// Components that finished on a bound.
    std::vector<bool> at_bound;
};

/// Levenberg-Marquardt with a central-difference Jacobian and Marquardt
/// diagonal scaling. Throws FitError on a singular Jacobian or when the step
/// criterion is not met within max_iterations; the error carries a trace of
/// the objective per iteration.
LeastSquaresResult levenberg_marquardt(const ResidualFn& fn, std::vector<double> x0,
                                       std::size_t residual_count,
                                       const LeastSquaresOptions& opts = {});

}  // namespace aftershock

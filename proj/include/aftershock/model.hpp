#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aftershock/market_data.hpp"

namespace aftershock {

/// Calibrated model triple plus window length.
///
/// `alpha` is the tail exponent of the inverse-gamma mixing law, `beta` its
/// scale (same units as returns) and `D` the anomalous scaling exponent.
struct ModelParams {
    double alpha = 3.5;
    double beta = 2.9e-3;
    double D = 0.35;
    std::size_t n = 20;

    /// Throws DomainError unless alpha > 0, beta > 0, D >= 0, n >= 1.
    void validate() const;
};

/// a[i] = sqrt((i+1)^(2D) - i^(2D)), i = 0..n-1.
std::vector<double> scale_coefficients(const ModelParams& params);

/// Density of the latent volatility scale sigma (sigma^2 inverse-gamma with
/// shape alpha/2 and scale beta^2/2).
double mixing_density(double sigma, const ModelParams& params);
double log_mixing_density(double sigma, const ModelParams& params);

/// Log of the multivariate Student density of (R_0, ..., R_t), t+1 = returns.size().
/// Includes the prod_i 1/a_i normalisation factor.
double joint_logpdf(std::span<const double> returns, const ModelParams& params);

/// Log density of the sub-vector (R_{k_0}, R_{k_1}, ...) for distinct indices.
/// The Student family is closed under marginalisation, so this is the
/// same form restricted to the chosen coefficients.
double marginal_logpdf(std::span<const std::size_t> indices, std::span<const double> values,
                       const ModelParams& params);

/// Scaling function g(r): the t = 0 Student density.
double scaling_function_g(double r, const ModelParams& params);

/// Density of the aggregate return R_0 + ... + R_t: (t+1)^-D g(r (t+1)^-D).
double aggregate_pdf(double r, std::size_t t, const ModelParams& params);

/// CDF of the scaling function g.
double scaling_function_cdf(double r, double alpha, double beta);

/// Simulated ensemble of `count` daily histories with indices first..first+count-1.
/// History k draws from the substream (seed, k), so chunks of a large
/// ensemble can be generated independently and in any order. History k is
/// dated 1900-01-01 plus k days.
Ensemble sample_ensemble(const ModelParams& params, std::size_t count, std::uint64_t seed,
                         std::size_t first = 0);

/// One history from an explicit stream.
std::vector<double> sample_history(const ModelParams& params, std::span<const double> coefficients,
                                   class Stream& stream);

}  // namespace aftershock

#include "aftershock/model.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "aftershock/errors.hpp"
#include "aftershock/rng.hpp"

namespace aftershock {

namespace {

double coefficient(std::size_t i, double D) {
    if (i == 0) return 1.0;
    const double x = static_cast<double>(i);
    // (i+1)^{2D} - i^{2D} without cancellation for large i
    return std::sqrt(std::pow(x, 2.0 * D) * std::expm1(2.0 * D * std::log1p(1.0 / x)));
}

}  // namespace

void ModelParams::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
    if (!(D >= 0.0) || !std::isfinite(D)) throw DomainError("D must be non-negative");
    if (n < 1) throw DomainError("window length n must be at least 1");
}

std::vector<double> scale_coefficients(const ModelParams& params) {
    params.validate();
    std::vector<double> a(params.n);
    for (std::size_t i = 0; i < params.n; ++i) a[i] = coefficient(i, params.D);
    return a;
}

double log_mixing_density(double sigma, const ModelParams& params) {
    if (!(sigma > 0.0)) throw DomainError("mixing density requires sigma > 0");
    const double a = params.alpha;
    const double b = params.beta;
    const double z = b / sigma;
    return (1.0 - 0.5 * a) * std::numbers::ln2 + a * std::log(b) - std::lgamma(0.5 * a) -
           (a + 1.0) * std::log(sigma) - 0.5 * z * z;
}

double mixing_density(double sigma, const ModelParams& params) {
    return std::exp(log_mixing_density(sigma, params));
}

double marginal_logpdf(std::span<const std::size_t> indices, std::span<const double> values,
                       const ModelParams& params) {
    params.validate();
    if (values.empty()) throw DomainError("density of an empty return vector");
    if (indices.size() != values.size()) throw DomainError("indices and values differ in length");

    const double a = params.alpha;
    const double b = params.beta;
    const auto k = static_cast<double>(values.size());
    double quad = 0.0;  // sum of (r_i / (beta a_i))^2
    double log_coeffs = 0.0;
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const std::size_t i = indices[j];
        if (i >= params.n) {
            throw DomainError("return index " + std::to_string(i) + " outside window of length " +
                              std::to_string(params.n));
        }
        for (std::size_t m = 0; m < j; ++m) {
            if (indices[m] == i) throw DomainError("repeated return index");
        }
        const double ai = coefficient(i, params.D);
        if (!(ai > 0.0)) throw DomainError("scale coefficient vanishes for D = 0");
        const double z = values[j] / (b * ai);
        quad += z * z;
        log_coeffs += std::log(ai);
    }
    const double shape = 0.5 * (a + k);
    // beta^a (beta^2 + Q)^{-(a+k)/2} = beta^{-k} (1 + Q/beta^2)^{-(a+k)/2}
    return std::lgamma(shape) - std::lgamma(0.5 * a) - 0.5 * k * std::log(std::numbers::pi) -
           k * std::log(b) - log_coeffs - shape * std::log1p(quad);
}

double joint_logpdf(std::span<const double> returns, const ModelParams& params) {
    if (returns.empty()) throw DomainError("density of an empty return vector");
    if (returns.size() > params.n) throw DomainError("more returns than the window length");
    std::vector<std::size_t> idx(returns.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return marginal_logpdf(idx, returns, params);
}

double scaling_function_g(double r, const ModelParams& params) {
    const std::size_t zero = 0;
    return std::exp(marginal_logpdf(std::span(&zero, 1), std::span(&r, 1), params));
}

double aggregate_pdf(double r, std::size_t t, const ModelParams& params) {
    if (t >= params.n) {
        throw DomainError("time index " + std::to_string(t) + " outside window of length " +
                          std::to_string(params.n));
    }
    const double width = std::pow(static_cast<double>(t + 1), params.D);
    return scaling_function_g(r / width, params) / width;
}

double scaling_function_cdf(double r, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("alpha and beta must be positive");
    // g is a Student t with alpha degrees of freedom and scale beta / sqrt(alpha).
    const boost::math::students_t_distribution<double> dist(alpha);
    const double x = r * std::sqrt(alpha) / beta;
    if (x > 0.0) return 1.0 - boost::math::cdf(boost::math::complement(dist, x));
    return boost::math::cdf(dist, x);
}

std::vector<double> sample_history(const ModelParams& params, std::span<const double> coefficients,
                                   Stream& stream) {
    const double variance = 0.5 * params.beta * params.beta / stream.gamma(0.5 * params.alpha);
    const double sigma = std::sqrt(variance);
    std::vector<double> r(coefficients.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = sigma * coefficients[i] * stream.normal();
    return r;
}

Ensemble sample_ensemble(const ModelParams& params, std::size_t count, std::uint64_t seed,
                         std::size_t first) {
    if (count < 1) throw DomainError("sample count must be at least 1");
    const auto a = scale_coefficients(params);
    Ensemble ensemble(params.n);
    const std::chrono::sys_days origin{std::chrono::year{1900} / 1 / 1};
    for (std::size_t k = first; k < first + count; ++k) {
        Stream stream(seed, k);
        ensemble.add({Date{origin + std::chrono::days{static_cast<long>(k)}},
                      sample_history(params, a, stream)});
    }
    return ensemble;
}

}  // namespace aftershock

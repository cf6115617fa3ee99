#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aftershock/market_data.hpp"
#include "aftershock/model.hpp"

namespace aftershock {

/// Which abscissa the moment-growth regression uses: ln(t+1) (consistent with
/// the aggregate scaling form) or ln t.
enum class Regressor { log_t_plus_one, log_t };

/// Histories entering an estimate. A history is eligible when every one of
/// its returns satisfies |r_i| <= sigma_max; an empty cap keeps everything.
std::vector<std::size_t> eligible_histories(const Ensemble& ensemble, std::optional<double> sigma_max);

struct MomentOptions {
    std::optional<double> sigma_max = 0.02;
    std::size_t bootstrap = 200;
    std::uint64_t seed = 1;
};

/// m[qi][ti] = mean over eligible histories of |R_0 + ... + R_t|^q, with
/// bootstrap standard errors from resampling whole histories.
struct MomentTable {
    std::vector<double> q;
    std::vector<std::size_t> t;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> se;
    std::size_t histories = 0;
};

MomentTable empirical_moments(const Ensemble& ensemble, std::span<const double> q_grid,
                              std::span<const std::size_t> t_grid, const MomentOptions& opts = {});

struct ScalingFit {
    double D = 0.0;
    double D_se = 0.0;
    std::vector<double> q;  // orders that entered the fit (0 < q <= q_max)
    std::vector<double> gamma;
    std::vector<double> gamma_se;
};

/// gamma(q) is the weighted slope of ln m[q][t] against the regressor; D is
/// the weighted slope of gamma(q) on q through the origin. When any standard
/// error is zero the corresponding stage falls back to unit weights.
ScalingFit fit_scaling_exponent(const MomentTable& table,
                                Regressor regressor = Regressor::log_t_plus_one,
                                double q_max = 2.0);

struct CollapseOptions {
    std::vector<std::size_t> t_set{0, 4, 9, 19};
    std::optional<double> sigma_max = 0.02;
    /// Bins with fewer counts are left out of the tail fit.
    double min_count = 5.0;
    /// Uniform bin width; Scott's rule on the pooled sample when unset.
    std::optional<double> bin_width;
};

/// Histograms of r / (t+1)^D on a shared grid of bins centred at k * width.
struct CollapsedHistogram {
    double bin_width = 0.0;
    std::vector<double> centers;
    std::vector<std::size_t> t_values;
    std::vector<std::vector<double>> counts;   // [t][bin]
    std::vector<std::vector<double>> density;  // [t][bin]
    std::vector<double> totals;                // samples per t
    std::vector<double> pooled_counts;
    std::vector<double> pooled_density;
    double pooled_total = 0.0;
};

CollapsedHistogram collapse_histogram(const Ensemble& ensemble, double D, const CollapseOptions& opts = {});

struct TailFit {
    double alpha = 0.0;
    double beta = 0.0;
    /// Covariance of (alpha, beta), row-major 2x2.
    std::array<double, 4> covariance{};
    double chi2 = 0.0;
    std::size_t bins_used = 0;
    std::size_t iterations = 0;
    std::vector<double> residuals;
};

/// Weighted least squares of the log bin density against the bin-averaged
/// Student scaling function; weight per bin is its count.
TailFit fit_tail(const CollapsedHistogram& histogram, double min_count = 5.0,
                 double alpha_init = 3.0, std::optional<double> beta_init = std::nullopt);

struct TailCalibration {
    TailFit fit;
    CollapsedHistogram histogram;
    /// Maximum-likelihood (alpha, beta) on eligible raw R_0, as a cross-check.
    double mle_alpha = 0.0;
    double mle_beta = 0.0;
};

TailCalibration collapse_and_fit_tail(const Ensemble& ensemble, double D, const CollapseOptions& opts = {});

struct StudentEstimate {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Maximum-likelihood Student scaling-function parameters for a sample.
StudentEstimate student_mle(std::span<const double> sample);

struct HomogeneityTest {
    double chi2 = 0.0;
    std::size_t dof = 0;
    double p_value = 1.0;
};

/// Two-sample chi-square homogeneity test between the histograms of two t
/// values, over bins where both counts reach min_count.
HomogeneityTest collapse_homogeneity(const CollapsedHistogram& histogram, std::size_t ti, std::size_t tj,
                                     double min_count = 5.0);

struct CalibrationOptions {
    std::vector<double> q_grid{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    /// Defaults to 1..n-1 when empty.
    std::vector<std::size_t> t_grid;
    Regressor regressor = Regressor::log_t_plus_one;
    bool cap_moments = true;
    MomentOptions moments;
    CollapseOptions collapse;
};

struct Calibration {
    ModelParams params;
    MomentTable moments;
    ScalingFit scaling;
    TailCalibration tail;
    /// D fitted with the cap toggled the other way, for the sensitivity report.
    double D_other_cap = 0.0;
};

/// Full pipeline: moments, D, data collapse, (alpha, beta).
Calibration calibrate(const Ensemble& ensemble, const CalibrationOptions& opts = {});

}  // namespace aftershock

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aftershock/market_data.hpp"
#include "aftershock/model.hpp"
#include "aftershock/quadrature.hpp"

namespace aftershock {

/// Omori law n(t) = K (t + tau)^-p.
struct OmoriParams {
    double K = 1.0;
    double p = 1.0;
    double tau = 1.0;
};

/// Search box of fit_omori.
struct OmoriBounds {
    double K_min = 1e-8, K_max = 1e4;
    double p_min = 1e-3, p_max = 20.0;
    double tau_min = 1e-3, tau_max = 1e3;
};
inline constexpr OmoriBounds kOmoriBounds{};

/// Below this |1 - p| the logarithmic branch is used.
inline constexpr double kOmoriLogBranch = 1e-6;

/// Cumulative aftershock count N(t) = int_0^t K (s + tau)^-p ds.
double omori_cumulative(const OmoriParams& params, double t);

enum class CurveKind { empirical, predicted };

/// Cumulative mean aftershock counts on t = 1..t_max.
struct AftershockCurve {
    std::vector<std::size_t> t;
    std::vector<double> N;
    std::vector<double> se;
    CurveKind kind = CurveKind::empirical;
    double sigma_a = 0.0;
    std::size_t shocks = 0;
};

/// Mean over main shocks of the per-history cumulative count of bars i >= 1
/// with sigma_a <= |r_i| <= |r_0|; se is the standard error of those counts.
AftershockCurve empirical_counts(std::span<const MainShock> selected, double sigma_a);

struct OmoriFit {
    OmoriParams params;
    /// Covariance of (K, p, tau), row-major 3x3.
    std::array<double, 9> covariance{};
    double chi2 = 0.0;
    std::size_t dof = 0;
    std::size_t iterations = 0;
    std::vector<double> residuals;
    /// (K, p, tau) that finished on the search box.
    std::array<bool, 3> at_bound{};
};

/// Weighted least squares of omori_cumulative against the points of `curve`
/// with positive se (weights 1/se^2). Starts from `init` when given and from
/// (N_last / ln(t_last + 1), p, 1) for p in {1, 0.3, 0.7, 1.3}; the lowest
/// chi-square wins. The search is confined to kOmoriBounds.
OmoriFit fit_omori(const AftershockCurve& curve, std::optional<OmoriParams> init = std::nullopt,
                   std::size_t max_iterations = 500);

/// Probability that bar i is an aftershock given |R_0| = r0_abs, by quadrature.
double aftershock_probability(std::size_t i, double r0_abs, double sigma_a, const ModelParams& params,
                              const QuadratureOptions& quad = {});

/// Same probability through the regularised incomplete beta function.
double aftershock_probability_closed_form(std::size_t i, double r0_abs, double sigma_a,
                                          const ModelParams& params);

/// Expected cumulative aftershock count given the main-shock magnitude.
AftershockCurve predict_single(double r0_abs, double sigma_a, const ModelParams& params, std::size_t t_max,
                               const QuadratureOptions& quad = {});

/// Pointwise mean of predict_single over the supplied magnitudes.
AftershockCurve predict_average(std::span<const double> r0_list, double sigma_a, const ModelParams& params,
                                std::size_t t_max, const QuadratureOptions& quad = {});

/// Monte Carlo estimate of the conditional count: sigma^2 is drawn from its
/// posterior given R_0 = r0_abs (inverse-gamma, shape (alpha+1)/2, scale
/// (beta^2 + r0^2)/2) and each R_i ~ N(0, sigma^2 a_i^2). One curve per
/// threshold, all from the same draws; se is the Monte Carlo standard error.
std::vector<AftershockCurve> simulate_conditional_counts(double r0_abs, std::span<const double> sigma_a,
                                                         const ModelParams& params, std::size_t t_max,
                                                         std::size_t draws, std::uint64_t seed);

}  // namespace aftershock

#include "aftershock/omori.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "aftershock/errors.hpp"
#include "aftershock/least_squares.hpp"
#include "aftershock/rng.hpp"

namespace aftershock {

double omori_cumulative(const OmoriParams& params, double t) {
    if (!(params.tau > 0.0)) throw DomainError("Omori tau must be positive");
    if (!(t >= 0.0)) throw DomainError("Omori time must be non-negative");
    const double shape = 1.0 - params.p;
    const double log_ratio = std::log1p(t / params.tau);
    if (std::fabs(shape) <= kOmoriLogBranch) return params.K * log_ratio;
    // K/(1-p) [(t+tau)^{1-p} - tau^{1-p}] written to avoid cancellation near p = 1
    return params.K * std::pow(params.tau, shape) * std::expm1(shape * log_ratio) / shape;
}

AftershockCurve empirical_counts(std::span<const MainShock> selected, double sigma_a) {
    if (!(sigma_a > 0.0)) throw DomainError("aftershock threshold must be positive");
    if (selected.empty()) throw DataError("no main shocks to count aftershocks for");
    const std::size_t n = selected.front().history.returns.size();
    if (n < 2) throw DataError("window too short for aftershocks");
    const std::size_t t_max = n - 1;

    std::vector<double> sum(t_max + 1, 0.0);
    std::vector<double> sum_sq(t_max + 1, 0.0);
    for (const auto& shock : selected) {
        const auto& r = shock.history.returns;
        if (r.size() != n) throw DataError("main-shock histories differ in length");
        const double r0 = std::fabs(r[0]);
        double count = 0.0;
        for (std::size_t i = 1; i <= t_max; ++i) {
            const double ri = std::fabs(r[i]);
            if (sigma_a <= ri && ri <= r0) count += 1.0;
            sum[i] += count;
            sum_sq[i] += count * count;
        }
    }

    const auto m = static_cast<double>(selected.size());
    AftershockCurve curve;
    curve.kind = CurveKind::empirical;
    curve.sigma_a = sigma_a;
    curve.shocks = selected.size();
    for (std::size_t t = 1; t <= t_max; ++t) {
        const double mean = sum[t] / m;
        double se = 0.0;
        if (selected.size() > 1) {
            const double var = std::max(0.0, (sum_sq[t] - m * mean * mean) / (m - 1.0));
            se = std::sqrt(var / m);
        }
        curve.t.push_back(t);
        curve.N.push_back(mean);
        curve.se.push_back(se);
    }
    return curve;
}

OmoriFit fit_omori(const AftershockCurve& curve, std::optional<OmoriParams> init, std::size_t max_iterations) {
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> w;
    for (std::size_t k = 0; k < curve.t.size(); ++k) {
        if (curve.se[k] > 0.0) {
            t.push_back(static_cast<double>(curve.t[k]));
            y.push_back(curve.N[k]);
            w.push_back(1.0 / curve.se[k]);
        }
    }
    if (t.size() < 4) throw FitError("Omori fit needs at least 4 points with positive se");

    const ResidualFn residual = [&](std::span<const double> x, std::span<double> out) {
        const OmoriParams p{std::exp(x[0]), std::exp(x[1]), std::exp(x[2])};
        for (std::size_t k = 0; k < t.size(); ++k) out[k] = w[k] * (omori_cumulative(p, t[k]) - y[k]);
    };

    std::vector<OmoriParams> starts;
    if (init) starts.push_back(*init);
    const double k0 = std::max(y.back(), 1e-6) / std::log(t.back() + 1.0);
    for (double p0 : {1.0, 0.3, 0.7, 1.3}) starts.push_back({k0, p0, 1.0});

    LeastSquaresOptions opts;
    opts.max_iterations = max_iterations;
    opts.lower = {std::log(kOmoriBounds.K_min), std::log(kOmoriBounds.p_min), std::log(kOmoriBounds.tau_min)};
    opts.upper = {std::log(kOmoriBounds.K_max), std::log(kOmoriBounds.p_max), std::log(kOmoriBounds.tau_max)};
    std::optional<LeastSquaresResult> best;
    std::string failures;
    for (const auto& s : starts) {
        if (!(s.K > 0.0) || !(s.p > 0.0) || !(s.tau > 0.0)) continue;
        try {
            auto res = levenberg_marquardt(residual, {std::log(s.K), std::log(s.p), std::log(s.tau)}, t.size(), opts);
            if (!best || res.chi2 < best->chi2) best = std::move(res);
        } catch (const FitError& e) {
            failures += std::string(e.what()) + "\n" + e.trace();
        }
    }
    if (!best) throw FitError("Omori fit failed from every start", failures);

    OmoriFit fit;
    fit.params = {std::exp(best->x[0]), std::exp(best->x[1]), std::exp(best->x[2])};
    const double jac[3] = {fit.params.K, fit.params.p, fit.params.tau};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) fit.covariance[i * 3 + j] = jac[i] * jac[j] * best->covariance[i * 3 + j];
    }
    fit.chi2 = best->chi2;
    fit.dof = t.size() - 3;
    fit.iterations = best->iterations;
    fit.residuals = best->residuals;
    for (std::size_t j = 0; j < 3; ++j) fit.at_bound[j] = best->at_bound[j];
    return fit;
}

namespace {

struct Limits {
    double lo = 0.0;
    double hi = 0.0;
};

Limits integration_limits(std::size_t i, double r0_abs, double sigma_a, const ModelParams& params) {
    if (!(sigma_a > 0.0)) throw DomainError("aftershock threshold must be positive");
    if (sigma_a > r0_abs) throw DomainError("aftershock threshold exceeds the main-shock magnitude");
    if (i == 0 || i >= params.n) throw DomainError("aftershock index must lie in 1..n-1");
    const double ai = scale_coefficients(params)[i];
    const double scale = ai * std::hypot(params.beta, r0_abs);
    return {sigma_a / scale, r0_abs / scale};
}

}  // namespace

double aftershock_probability(std::size_t i, double r0_abs, double sigma_a, const ModelParams& params,
                              const QuadratureOptions& quad) {
    const Limits lim = integration_limits(i, r0_abs, sigma_a, params);
    const double a = params.alpha;
    const double log_norm = std::log(2.0 / std::sqrt(std::numbers::pi)) + std::lgamma(0.5 * (a + 2.0)) -
                            std::lgamma(0.5 * (a + 1.0));
    const double power = -0.5 * (a + 2.0);
    const auto integrand = [power](double x) { return std::pow(1.0 + x * x, power); };
    return std::exp(log_norm) * integrate(integrand, lim.lo, lim.hi, quad);
}

double aftershock_probability_closed_form(std::size_t i, double r0_abs, double sigma_a,
                                          const ModelParams& params) {
    const Limits lim = integration_limits(i, r0_abs, sigma_a, params);
    // With s = x^2/(1+x^2) the normalised integral from 0 to X is I_s(1/2, (alpha+1)/2).
    const double b = 0.5 * (params.alpha + 1.0);
    const auto s = [](double x) { return x * x / (1.0 + x * x); };
    // ibetac keeps precision when both limits sit in the far tail.
    return boost::math::ibetac(0.5, b, s(lim.lo)) - boost::math::ibetac(0.5, b, s(lim.hi));
}

AftershockCurve predict_single(double r0_abs, double sigma_a, const ModelParams& params, std::size_t t_max,
                               const QuadratureOptions& quad) {
    if (sigma_a > r0_abs) throw DomainError("aftershock threshold exceeds the main-shock magnitude");
    if (t_max >= params.n) throw DomainError("t_max must be below the window length");
    AftershockCurve curve;
    curve.kind = CurveKind::predicted;
    curve.sigma_a = sigma_a;
    curve.shocks = 1;
    double cumulative = 0.0;
    for (std::size_t t = 1; t <= t_max; ++t) {
        cumulative += aftershock_probability(t, r0_abs, sigma_a, params, quad);
        curve.t.push_back(t);
        curve.N.push_back(cumulative);
        curve.se.push_back(0.0);
    }
    return curve;
}

AftershockCurve predict_average(std::span<const double> r0_list, double sigma_a, const ModelParams& params,
                                std::size_t t_max, const QuadratureOptions& quad) {
    if (r0_list.empty()) throw DomainError("no main-shock magnitudes to average over");
    AftershockCurve mean;
    for (double r0 : r0_list) {
        const auto curve = predict_single(r0, sigma_a, params, t_max, quad);
        if (mean.t.empty()) {
            mean = curve;
        } else {
            for (std::size_t k = 0; k < curve.N.size(); ++k) mean.N[k] += curve.N[k];
        }
    }
    for (double& v : mean.N) v /= static_cast<double>(r0_list.size());
    mean.shocks = r0_list.size();
    return mean;
}

std::vector<AftershockCurve> simulate_conditional_counts(double r0_abs, std::span<const double> sigma_a,
                                                         const ModelParams& params, std::size_t t_max,
                                                         std::size_t draws, std::uint64_t seed) {
    if (t_max >= params.n) throw DomainError("t_max must be below the window length");
    if (draws < 2) throw DomainError("need at least two conditional draws");
    for (double s : sigma_a) {
        if (!(s > 0.0) || s > r0_abs) throw DomainError("aftershock threshold outside (0, |r_0|]");
    }
    const auto a = scale_coefficients(params);
    const double shape = 0.5 * (params.alpha + 1.0);
    const double scale = 0.5 * (params.beta * params.beta + r0_abs * r0_abs);
    const std::size_t nt = sigma_a.size();

    std::vector<double> sum(nt * (t_max + 1), 0.0);
    std::vector<double> sum_sq(nt * (t_max + 1), 0.0);
    std::vector<double> counts(nt);
    constexpr std::size_t kBlock = 4096;
    for (std::size_t first = 0; first < draws; first += kBlock) {
        Stream stream(seed, first / kBlock);
        const std::size_t last = std::min(draws, first + kBlock);
        for (std::size_t d = first; d < last; ++d) {
            const double sigma = std::sqrt(scale / stream.gamma(shape));
            std::fill(counts.begin(), counts.end(), 0.0);
            for (std::size_t i = 1; i <= t_max; ++i) {
                const double r = std::fabs(sigma * a[i] * stream.normal());
                for (std::size_t k = 0; k < nt; ++k) {
                    if (sigma_a[k] <= r && r <= r0_abs) counts[k] += 1.0;
                    sum[k * (t_max + 1) + i] += counts[k];
                    sum_sq[k * (t_max + 1) + i] += counts[k] * counts[k];
                }
            }
        }
    }

    const auto m = static_cast<double>(draws);
    std::vector<AftershockCurve> out(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        auto& c = out[k];
        c.kind = CurveKind::empirical;
        c.sigma_a = sigma_a[k];
        c.shocks = draws;
        for (std::size_t t = 1; t <= t_max; ++t) {
            const double mean = sum[k * (t_max + 1) + t] / m;
            const double var = std::max(0.0, (sum_sq[k * (t_max + 1) + t] - m * mean * mean) / (m - 1.0));
            c.t.push_back(t);
            c.N.push_back(mean);
            c.se.push_back(std::sqrt(var / m));
        }
    }
    return out;
}

}  // namespace aftershock

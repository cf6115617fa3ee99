#include "aftershock/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "aftershock/errors.hpp"
#include "aftershock/least_squares.hpp"
#include "aftershock/rng.hpp"

namespace aftershock {

namespace {

struct Line {
    double slope = 0.0;
    double slope_se = 0.0;
    double intercept = 0.0;
};

// Weighted straight-line fit. Empty weights means unit weights, in which case
// the slope error comes from the residual scatter.
Line fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
    const bool weighted = !w.empty();
    double sw = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = weighted ? w[i] : 1.0;
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
    }
    const double xm = sx / sw;
    const double ym = sy / sw;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = weighted ? w[i] : 1.0;
        sxx += wi * (x[i] - xm) * (x[i] - xm);
        sxy += wi * (x[i] - xm) * (y[i] - ym);
    }
    if (!(sxx > 0.0)) throw FitError("singular regression: all abscissae are equal");
    Line line;
    line.slope = sxy / sxx;
    line.intercept = ym - line.slope * xm;
    if (weighted) {
        line.slope_se = std::sqrt(1.0 / sxx);
    } else if (x.size() > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - line.intercept - line.slope * x[i];
            rss += e * e;
        }
        line.slope_se = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
    }
    return line;
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    // Welford: exactly zero for constant input.
    double mean = 0.0;
    double ss = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double d = v[k] - mean;
        mean += d / static_cast<double>(k + 1);
        ss += d * (v[k] - mean);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Probability mass of g on [c - h/2, c + h/2], evaluated on the side of the
// origin where the survival function keeps full relative precision.
double bin_mass(double center, double width, double alpha, double beta) {
    const boost::math::students_t_distribution<double> dist(alpha);
    const double scale = std::sqrt(alpha) / beta;
    const double c = std::fabs(center);
    const double lo = (c - 0.5 * width) * scale;
    const double hi = (c + 0.5 * width) * scale;
    if (lo >= 0.0) {
        return boost::math::cdf(boost::math::complement(dist, lo)) -
               boost::math::cdf(boost::math::complement(dist, hi));
    }
    return boost::math::cdf(dist, hi) - boost::math::cdf(dist, lo);
}

double student_loglik(std::span<const double> sample, double alpha, double beta) {
    const double norm = std::lgamma(0.5 * (alpha + 1.0)) - std::lgamma(0.5 * alpha) -
                        0.5 * std::log(std::numbers::pi) - std::log(beta);
    double ll = 0.0;
    for (double x : sample) {
        const double z = x / beta;
        ll += norm - 0.5 * (alpha + 1.0) * std::log1p(z * z);
    }
    return ll;
}

// Scale of a Student t with known degrees of freedom by EM.
double student_scale_em(std::span<const double> sample, double dof, double start) {
    double s2 = start * start;
    for (int iter = 0; iter < 10000; ++iter) {
        double acc = 0.0;
        for (double x : sample) acc += (dof + 1.0) / (dof + x * x / s2) * x * x;
        const double next = acc / static_cast<double>(sample.size());
        if (std::fabs(next - s2) <= 1e-12 * s2) return std::sqrt(next);
        s2 = next;
    }
    return std::sqrt(s2);
}

}  // namespace

std::vector<std::size_t> eligible_histories(const Ensemble& ensemble, std::optional<double> sigma_max) {
    std::vector<std::size_t> out;
    out.reserve(ensemble.size());
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
        const auto& r = ensemble[k].returns;
        const bool ok = !sigma_max || std::all_of(r.begin(), r.end(), [&](double x) {
            return std::fabs(x) <= *sigma_max;
        });
        if (ok) out.push_back(k);
    }
    return out;
}

MomentTable empirical_moments(const Ensemble& ensemble, std::span<const double> q_grid,
                              std::span<const std::size_t> t_grid, const MomentOptions& opts) {
    if (ensemble.empty()) throw DataError("moments of an empty ensemble");
    for (double q : q_grid) {
        if (!(q >= 0.0)) throw ConfigError("q_grid", "moment orders must be non-negative");
    }
    for (std::size_t t : t_grid) {
        if (t >= ensemble.n()) throw ConfigError("t_grid", "time index beyond the window");
    }
    const auto rows = eligible_histories(ensemble, opts.sigma_max);
    if (rows.empty()) throw DataError("no history survives the sigma_max cap");

    const bool degenerate = std::all_of(rows.begin(), rows.end(), [&](std::size_t k) {
        const auto& r = ensemble[k].returns;
        return std::all_of(r.begin(), r.end(), [](double x) { return x == 0.0; });
    });
    if (degenerate) throw DataError("degenerate moments: every return is zero");

    const std::size_t nq = q_grid.size();
    const std::size_t nt = t_grid.size();
    const std::size_t cells = nq * nt;

    // values[h * cells + qi * nt + ti] = |S_t|^q for history h
    std::vector<double> values(rows.size() * cells);
    for (std::size_t h = 0; h < rows.size(); ++h) {
        const auto& r = ensemble[rows[h]].returns;
        std::vector<double> partial(ensemble.n());
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) partial[i] = (s += r[i]);
        for (std::size_t qi = 0; qi < nq; ++qi) {
            for (std::size_t ti = 0; ti < nt; ++ti) {
                values[h * cells + qi * nt + ti] = std::pow(std::fabs(partial[t_grid[ti]]), q_grid[qi]);
            }
        }
    }

    auto mean_over = [&](auto index_of) {
        std::vector<double> acc(cells, 0.0);
        for (std::size_t j = 0; j < rows.size(); ++j) {
            const double* v = &values[index_of(j) * cells];
            for (std::size_t c = 0; c < cells; ++c) acc[c] += v[c];
        }
        for (double& a : acc) a /= static_cast<double>(rows.size());
        return acc;
    };

    const auto full = mean_over([](std::size_t j) { return j; });

    std::vector<std::vector<double>> resampled(cells, std::vector<double>(opts.bootstrap));
    for (std::size_t b = 0; b < opts.bootstrap; ++b) {
        Stream stream(opts.seed, b);
        std::vector<std::size_t> pick(rows.size());
        for (auto& p : pick) {
            p = std::min(rows.size() - 1,
                         static_cast<std::size_t>(stream.uniform() * static_cast<double>(rows.size())));
        }
        const auto m = mean_over([&](std::size_t j) { return pick[j]; });
        for (std::size_t c = 0; c < cells; ++c) resampled[c][b] = m[c];
    }

    MomentTable table;
    table.q.assign(q_grid.begin(), q_grid.end());
    table.t.assign(t_grid.begin(), t_grid.end());
    table.histories = rows.size();
    table.m.assign(nq, std::vector<double>(nt));
    table.se.assign(nq, std::vector<double>(nt));
    for (std::size_t qi = 0; qi < nq; ++qi) {
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const std::size_t c = qi * nt + ti;
            table.m[qi][ti] = full[c];
            table.se[qi][ti] = sample_sd(resampled[c]);
        }
    }
    return table;
}

ScalingFit fit_scaling_exponent(const MomentTable& table, Regressor regressor, double q_max) {
    if (table.t.size() < 3) throw FitError("need at least 3 time indices");
    std::vector<double> x(table.t.size());
    for (std::size_t ti = 0; ti < table.t.size(); ++ti) {
        const auto t = static_cast<double>(table.t[ti]);
        if (regressor == Regressor::log_t) {
            if (table.t[ti] == 0) throw FitError("ln t regressor is undefined at t = 0");
            x[ti] = std::log(t);
        } else {
            x[ti] = std::log(t + 1.0);
        }
    }

    ScalingFit fit;
    for (std::size_t qi = 0; qi < table.q.size(); ++qi) {
        const double q = table.q[qi];
        if (!(q > 0.0) || q > q_max) continue;
        std::vector<double> y(x.size());
        std::vector<double> w(x.size());
        bool weighted = true;
        for (std::size_t ti = 0; ti < x.size(); ++ti) {
            const double m = table.m[qi][ti];
            if (!(m > 0.0)) throw FitError("non-positive moment at q = " + std::to_string(q));
            y[ti] = std::log(m);
            const double rel = table.se[qi][ti] / m;
            if (!(rel > 0.0)) weighted = false;
            w[ti] = weighted ? 1.0 / (rel * rel) : 1.0;
        }
        const Line line = fit_line(x, y, weighted ? std::span<const double>(w) : std::span<const double>{});
        fit.q.push_back(q);
        fit.gamma.push_back(line.slope);
        fit.gamma_se.push_back(line.slope_se);
    }
    if (fit.q.size() < 3) throw FitError("need at least 3 moment orders in (0, q_max]");

    const bool weighted = std::all_of(fit.gamma_se.begin(), fit.gamma_se.end(), [](double s) { return s > 0.0; });
    double sqq = 0.0;
    double sqg = 0.0;
    for (std::size_t i = 0; i < fit.q.size(); ++i) {
        const double w = weighted ? 1.0 / (fit.gamma_se[i] * fit.gamma_se[i]) : 1.0;
        sqq += w * fit.q[i] * fit.q[i];
        sqg += w * fit.q[i] * fit.gamma[i];
    }
    fit.D = sqg / sqq;
    if (weighted) {
        fit.D_se = std::sqrt(1.0 / sqq);
    } else {
        double rss = 0.0;
        for (std::size_t i = 0; i < fit.q.size(); ++i) {
            const double e = fit.gamma[i] - fit.D * fit.q[i];
            rss += e * e;
        }
        fit.D_se = std::sqrt(rss / static_cast<double>(fit.q.size() - 1) / sqq);
    }
    return fit;
}

CollapsedHistogram collapse_histogram(const Ensemble& ensemble, double D, const CollapseOptions& opts) {
    if (opts.t_set.empty()) throw ConfigError("collapse_t", "no time indices to collapse");
    for (std::size_t t : opts.t_set) {
        if (t >= ensemble.n()) throw ConfigError("collapse_t", "time index beyond the window");
    }
    const auto rows = eligible_histories(ensemble, opts.sigma_max);
    if (rows.empty()) throw DataError("no history survives the sigma_max cap");

    const std::size_t nt = opts.t_set.size();
    std::vector<std::vector<double>> scaled(nt);
    for (std::size_t k : rows) {
        const auto& r = ensemble[k].returns;
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const std::size_t t = opts.t_set[ti];
            double s = 0.0;
            for (std::size_t i = 0; i <= t; ++i) s += r[i];
            scaled[ti].push_back(s / std::pow(static_cast<double>(t + 1), D));
        }
    }

    double width = 0.0;
    if (opts.bin_width) {
        width = *opts.bin_width;
    } else {
        std::vector<double> pooled;
        for (const auto& v : scaled) pooled.insert(pooled.end(), v.begin(), v.end());
        width = 3.49 * sample_sd(pooled) * std::cbrt(1.0 / static_cast<double>(pooled.size()));
    }
    if (!(width > 0.0)) throw DataError("zero-width histogram: the rescaled sample has no spread");

    long lo = 0;
    long hi = 0;
    for (const auto& v : scaled) {
        for (double x : v) {
            const long k = std::lround(x / width);
            lo = std::min(lo, k);
            hi = std::max(hi, k);
        }
    }
    const auto bins = static_cast<std::size_t>(hi - lo + 1);

    CollapsedHistogram h;
    h.bin_width = width;
    h.t_values = opts.t_set;
    h.centers.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) h.centers[b] = static_cast<double>(lo + static_cast<long>(b)) * width;
    h.counts.assign(nt, std::vector<double>(bins, 0.0));
    h.pooled_counts.assign(bins, 0.0);
    for (std::size_t ti = 0; ti < nt; ++ti) {
        for (double x : scaled[ti]) {
            const auto b = static_cast<std::size_t>(std::lround(x / width) - lo);
            h.counts[ti][b] += 1.0;
            h.pooled_counts[b] += 1.0;
        }
        h.totals.push_back(static_cast<double>(scaled[ti].size()));
        h.pooled_total += static_cast<double>(scaled[ti].size());
    }
    h.density.assign(nt, std::vector<double>(bins));
    h.pooled_density.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        for (std::size_t ti = 0; ti < nt; ++ti) h.density[ti][b] = h.counts[ti][b] / (h.totals[ti] * width);
        h.pooled_density[b] = h.pooled_counts[b] / (h.pooled_total * width);
    }
    return h;
}

TailFit fit_tail(const CollapsedHistogram& histogram, double min_count, double alpha_init,
                 std::optional<double> beta_init) {
    std::vector<double> centers;
    std::vector<double> counts;
    for (std::size_t b = 0; b < histogram.centers.size(); ++b) {
        if (histogram.pooled_counts[b] >= min_count) {
            centers.push_back(histogram.centers[b]);
            counts.push_back(histogram.pooled_counts[b]);
        }
    }
    if (centers.size() < 6) {
        throw FitError("only " + std::to_string(centers.size()) + " bins with at least " +
                       std::to_string(min_count) + " counts; need 6");
    }
    const double total = histogram.pooled_total;
    const double width = histogram.bin_width;

    double beta0 = 0.0;
    if (beta_init) {
        beta0 = *beta_init;
    } else {
        double m2 = 0.0;
        for (std::size_t b = 0; b < histogram.centers.size(); ++b) {
            m2 += histogram.pooled_counts[b] * histogram.centers[b] * histogram.centers[b];
        }
        beta0 = std::sqrt(m2 / total);
    }

    const ResidualFn residual = [&](std::span<const double> x, std::span<double> out) {
        const double alpha = std::exp(x[0]);
        const double beta = std::exp(x[1]);
        for (std::size_t k = 0; k < centers.size(); ++k) {
            const double mass = bin_mass(centers[k], width, alpha, beta);
            out[k] = std::sqrt(total * mass) * (std::log(counts[k] / total) - std::log(mass));
        }
    };

    std::optional<LeastSquaresResult> best;
    std::string failures;
    for (double a0 : {alpha_init, 2.0, 6.0}) {
        try {
            auto res = levenberg_marquardt(residual, {std::log(a0), std::log(beta0)}, centers.size());
            if (!best || res.chi2 < best->chi2) best = std::move(res);
        } catch (const FitError& e) {
            failures += std::string(e.what()) + "\n" + e.trace();
        }
    }
    if (!best) throw FitError("tail fit did not converge from any start", failures);

    TailFit fit;
    fit.alpha = std::exp(best->x[0]);
    fit.beta = std::exp(best->x[1]);
    const double jac[2] = {fit.alpha, fit.beta};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) fit.covariance[i * 2 + j] = jac[i] * jac[j] * best->covariance[i * 2 + j];
    }
    fit.chi2 = best->chi2;
    fit.bins_used = centers.size();
    fit.iterations = best->iterations;
    fit.residuals = best->residuals;
    return fit;
}

StudentEstimate student_mle(std::span<const double> sample) {
    if (sample.size() < 3) throw FitError("maximum likelihood needs at least 3 observations");
    const double sd = sample_sd(sample);
    if (!(sd > 0.0)) throw FitError("maximum likelihood on a sample without spread");

    // Profile likelihood over alpha by golden section on ln(alpha); the scale
    // at fixed alpha comes from EM.
    auto profile = [&](double log_alpha, double& beta_out) {
        const double alpha = std::exp(log_alpha);
        const double s = student_scale_em(sample, alpha, sd);
        beta_out = s * std::sqrt(alpha);
        return student_loglik(sample, alpha, beta_out);
    };
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(0.2);
    double b = std::log(200.0);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double beta_c = 0.0;
    double beta_d = 0.0;
    double fc = profile(c, beta_c);
    double fd = profile(d, beta_d);
    while (b - a > 1e-7) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            beta_d = beta_c;
            c = b - phi * (b - a);
            fc = profile(c, beta_c);
        } else {
            a = c;
            c = d;
            fc = fd;
            beta_c = beta_d;
            d = a + phi * (b - a);
            fd = profile(d, beta_d);
        }
    }
    StudentEstimate est;
    est.alpha = std::exp(0.5 * (a + b));
    profile(std::log(est.alpha), est.beta);
    return est;
}

TailCalibration collapse_and_fit_tail(const Ensemble& ensemble, double D, const CollapseOptions& opts) {
    TailCalibration out;
    out.histogram = collapse_histogram(ensemble, D, opts);
    out.fit = fit_tail(out.histogram, opts.min_count);

    std::vector<double> r0;
    for (std::size_t k : eligible_histories(ensemble, opts.sigma_max)) r0.push_back(ensemble[k].returns[0]);
    try {
        const auto mle = student_mle(r0);
        out.mle_alpha = mle.alpha;
        out.mle_beta = mle.beta;
    } catch (const FitError&) {
        out.mle_alpha = out.mle_beta = std::nan("");
    }
    return out;
}

HomogeneityTest collapse_homogeneity(const CollapsedHistogram& histogram, std::size_t ti, std::size_t tj,
                                     double min_count) {
    const auto& a = histogram.counts.at(ti);
    const auto& b = histogram.counts.at(tj);
    double na = 0.0;
    double nb = 0.0;
    std::vector<std::size_t> used;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] >= min_count && b[k] >= min_count) {
            used.push_back(k);
            na += a[k];
            nb += b[k];
        }
    }
    HomogeneityTest test;
    if (used.size() < 2) return test;
    const double ka = std::sqrt(nb / na);
    const double kb = std::sqrt(na / nb);
    for (std::size_t k : used) {
        const double diff = ka * a[k] - kb * b[k];
        test.chi2 += diff * diff / (a[k] + b[k]);
    }
    test.dof = used.size() - 1;
    const boost::math::chi_squared_distribution<double> dist(static_cast<double>(test.dof));
    test.p_value = boost::math::cdf(boost::math::complement(dist, test.chi2));
    return test;
}

Calibration calibrate(const Ensemble& ensemble, const CalibrationOptions& opts) {
    std::vector<std::size_t> t_grid = opts.t_grid;
    if (t_grid.empty()) {
        for (std::size_t t = 1; t < ensemble.n(); ++t) t_grid.push_back(t);
    }
    MomentOptions capped = opts.moments;
    MomentOptions other = opts.moments;
    if (opts.cap_moments) {
        other.sigma_max.reset();
    } else {
        capped.sigma_max.reset();
    }

    Calibration cal;
    cal.moments = empirical_moments(ensemble, opts.q_grid, t_grid, capped);
    cal.scaling = fit_scaling_exponent(cal.moments, opts.regressor);
    cal.D_other_cap = fit_scaling_exponent(empirical_moments(ensemble, opts.q_grid, t_grid, other),
                                           opts.regressor).D;
    cal.tail = collapse_and_fit_tail(ensemble, cal.scaling.D, opts.collapse);
    cal.params = ModelParams{cal.tail.fit.alpha, cal.tail.fit.beta, cal.scaling.D, ensemble.n()};
    return cal;
}

}  // namespace aftershock

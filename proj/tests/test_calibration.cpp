#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "aftershock/calibration.hpp"
#include "aftershock/errors.hpp"
#include "aftershock/model.hpp"

using namespace aftershock;

namespace {

const ModelParams kPaper{3.5, 2.9e-3, 0.35, 20};

const Ensemble& paper_ensemble() {
    static const Ensemble e = sample_ensemble(kPaper, 6283, 101);
    return e;
}

std::vector<std::size_t> all_t() {
    std::vector<std::size_t> t;
    for (std::size_t k = 1; k < 20; ++k) t.push_back(k);
    return t;
}

MomentTable exact_power_law(double D) {
    MomentTable table;
    table.q = {0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
    table.t = {1, 2, 4, 8, 16};
    for (double q : table.q) {
        std::vector<double> row, se;
        for (std::size_t t : table.t) {
            row.push_back((1.0 + q) * std::pow(static_cast<double>(t) + 1.0, D * q));
            se.push_back(0.01 * row.back());
        }
        table.m.push_back(row);
        table.se.push_back(se);
    }
    table.histories = 1;
    return table;
}

// Bin counts proportional to the exact bin masses of g.
CollapsedHistogram exact_histogram(double alpha, double beta, double width, double total) {
    CollapsedHistogram h;
    h.bin_width = width;
    h.t_values = {0};
    h.counts.resize(1);
    h.density.resize(1);
    for (int k = -60; k <= 60; ++k) {
        const double c = k * width;
        const double mass = scaling_function_cdf(c + width / 2, alpha, beta) - scaling_function_cdf(c - width / 2, alpha, beta);
        h.centers.push_back(c);
        h.counts[0].push_back(total * mass);
        h.density[0].push_back(mass / width);
        h.pooled_counts.push_back(total * mass);
        h.pooled_density.push_back(mass / width);
    }
    h.totals = {total};
    h.pooled_total = total;
    return h;
}

}  // namespace

TEST(EmpiricalMoments, IdenticalHistoriesHaveNoBootstrapError) {
    Ensemble e(4);
    for (int k = 0; k < 30; ++k) {
        e.add({std::chrono::sys_days{std::chrono::year{2001} / 1 / 1} + std::chrono::days{k}, {0.001, -0.002, 0.003, 0.0}});
    }
    const double q[] = {0.5, 1.0, 2.0};
    const std::size_t t[] = {0, 1, 2, 3};
    const auto table = empirical_moments(e, q, t);
    for (const auto& row : table.se) {
        for (double s : row) EXPECT_EQ(s, 0.0);
    }
    EXPECT_NEAR(table.m[1][2], 0.002, 1e-15);
}

TEST(EmpiricalMoments, ZerothMomentIsOne) {
    const double q[] = {0.0};
    const std::size_t t[] = {0, 5, 19};
    const auto table = empirical_moments(paper_ensemble(), q, t);
    for (double m : table.m[0]) EXPECT_DOUBLE_EQ(m, 1.0);
}

TEST(EmpiricalMoments, SecondMomentSlope) {
    const double q[] = {2.0};
    const auto t = all_t();
    MomentOptions opts;
    opts.sigma_max = std::nullopt;
    const auto table = empirical_moments(sample_ensemble(kPaper, 20000, 31), q, t, opts);
    // Weighted slope of ln m against ln(t+1).
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double x = std::log(t[k] + 1.0);
        const double y = std::log(table.m[0][k]);
        const double w = 1.0;
        sw += w; sx += w * x; sy += w * y; sxx += w * x * x; sxy += w * x * y;
    }
    const double slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    EXPECT_NEAR(slope, 0.70, 0.05);
}

TEST(EmpiricalMoments, DegenerateEnsembleRejected) {
    Ensemble e(3);
    e.add({std::chrono::sys_days{std::chrono::year{2001} / 1 / 1}, {0.0, 0.0, 0.0}});
    const double q[] = {1.0};
    const std::size_t t[] = {0, 1};
    EXPECT_THROW(empirical_moments(e, q, t), DataError);
    EXPECT_THROW(empirical_moments(Ensemble(3), q, t), DataError);
}

TEST(EmpiricalMoments, BootstrapIsSeeded) {
    const double q[] = {1.0};
    const std::size_t t[] = {3};
    const auto a = empirical_moments(paper_ensemble(), q, t);
    const auto b = empirical_moments(paper_ensemble(), q, t);
    EXPECT_EQ(a.se, b.se);
    EXPECT_GT(a.se[0][0], 0.0);
}

TEST(FitScalingExponent, ExactPowerLaw) {
    const auto fit = fit_scaling_exponent(exact_power_law(0.35));
    EXPECT_NEAR(fit.D, 0.35, 1e-12);
    ASSERT_EQ(fit.q.size(), 5u);  // q = 3 is left out of the fit
    for (std::size_t k = 0; k < fit.q.size(); ++k) EXPECT_NEAR(fit.gamma[k], 0.35 * fit.q[k], 1e-12);
}

TEST(FitScalingExponent, NeedsEnoughPoints) {
    auto table = exact_power_law(0.35);
    table.t = {1, 2};
    for (auto& row : table.m) row.resize(2);
    for (auto& row : table.se) row.resize(2);
    EXPECT_THROW(fit_scaling_exponent(table), FitError);

    auto same_t = exact_power_law(0.35);
    same_t.t = {4, 4, 4, 4, 4};
    EXPECT_THROW(fit_scaling_exponent(same_t), FitError);
}

TEST(FitScalingExponent, LogTRegressorDiffers) {
    const auto table = exact_power_law(0.35);
    const auto shifted = fit_scaling_exponent(table, Regressor::log_t_plus_one);
    const auto plain = fit_scaling_exponent(table, Regressor::log_t);
    EXPECT_GT(std::abs(plain.D - shifted.D), 1e-3);
}

TEST(FitScalingExponent, SimulatedEnsemble) {
    const double q[] = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    const auto t = all_t();
    const auto table = empirical_moments(paper_ensemble(), q, t);
    const auto fit = fit_scaling_exponent(table);
    EXPECT_NEAR(fit.D, 0.35, 0.03);
    EXPECT_GT(fit.D_se, 0.0);
    for (std::size_t k = 1; k < fit.gamma.size(); ++k) EXPECT_GE(fit.gamma[k], fit.gamma[k - 1]);
}

TEST(CollapseHistogram, PerIndexHistogramsIntegrateToOne) {
    const auto h = collapse_histogram(paper_ensemble(), 0.35);
    ASSERT_EQ(h.t_values, (std::vector<std::size_t>{0, 4, 9, 19}));
    for (std::size_t ti = 0; ti < h.t_values.size(); ++ti) {
        double integral = 0.0;
        for (double d : h.density[ti]) integral += d * h.bin_width;
        EXPECT_NEAR(integral, 1.0, 1e-12);
    }
    EXPECT_GT(h.bin_width, 0.0);
}

TEST(CollapseHistogram, AgreesAcrossIndices) {
    const auto h = collapse_histogram(sample_ensemble(kPaper, 20000, 77), 0.35);
    for (std::size_t i = 0; i < h.t_values.size(); ++i) {
        for (std::size_t j = i + 1; j < h.t_values.size(); ++j) {
            EXPECT_GT(collapse_homogeneity(h, i, j).p_value, 1e-3) << h.t_values[i] << " vs " << h.t_values[j];
        }
    }
}

TEST(CollapseHistogram, WrongExponentBreaksCollapse) {
    const auto h = collapse_histogram(sample_ensemble(kPaper, 20000, 77), 0.0);
    EXPECT_LT(collapse_homogeneity(h, 0, 3).p_value, 1e-6);
}

TEST(FitTail, NoiselessHistogramRecovered) {
    const auto h = exact_histogram(3.5, 2.9e-3, 4e-4, 1e6);
    const auto fit = fit_tail(h);
    EXPECT_NEAR(fit.alpha / 3.5, 1.0, 1e-6);
    EXPECT_NEAR(fit.beta / 2.9e-3, 1.0, 1e-6);
    EXPECT_LT(fit.chi2, 1e-12);
}

TEST(FitTail, TooFewBins) {
    auto h = exact_histogram(3.5, 2.9e-3, 0.05, 100);
    EXPECT_THROW(fit_tail(h), FitError);
}

TEST(CollapseAndFitTail, SimulatedEnsemble) {
    const auto tail = collapse_and_fit_tail(paper_ensemble(), 0.35);
    EXPECT_NEAR(tail.fit.alpha, 3.5, 0.4);
    EXPECT_NEAR(tail.fit.beta / 2.9e-3, 1.0, 0.15);
    EXPECT_GE(tail.fit.bins_used, 6u);
    EXPECT_GT(tail.fit.covariance[0], 0.0);
    EXPECT_GT(tail.fit.covariance[3], 0.0);
    EXPECT_EQ(tail.fit.residuals.size(), tail.fit.bins_used);
    EXPECT_NEAR(tail.mle_alpha, 3.5, 0.6);
    EXPECT_NEAR(tail.mle_beta / 2.9e-3, 1.0, 0.2);
}

TEST(StudentMle, RecoversParameters) {
    const Ensemble e = sample_ensemble(kPaper, 40000, 55);
    std::vector<double> r0;
    for (const auto& h : e) r0.push_back(h.returns[0]);
    const auto est = student_mle(r0);
    EXPECT_NEAR(est.alpha, 3.5, 0.25);
    EXPECT_NEAR(est.beta / 2.9e-3, 1.0, 0.05);
}

TEST(Calibrate, RecoversPaperParameters) {
    const auto cal = calibrate(paper_ensemble());
    EXPECT_NEAR(cal.params.D, 0.35, 0.03);
    EXPECT_NEAR(cal.params.alpha, 3.5, 0.4);
    EXPECT_NEAR(cal.params.beta / 2.9e-3, 1.0, 0.15);
    EXPECT_EQ(cal.params.n, 20u);
    EXPECT_TRUE(std::isfinite(cal.D_other_cap));
    EXPECT_EQ(cal.moments.t.size(), 19u);
}

TEST(Calibrate, EligibilityUsesWholeWindow) {
    Ensemble e(3);
    const auto day = [](int k) { return std::chrono::sys_days{std::chrono::year{2001} / 1 / 1} + std::chrono::days{k}; };
    e.add({day(0), {0.001, 0.0, 0.0}});
    e.add({day(1), {0.001, 0.03, 0.0}});
    e.add({day(2), {0.001, 0.0, -0.021}});
    EXPECT_EQ(eligible_histories(e, 0.02), (std::vector<std::size_t>{0}));
    EXPECT_EQ(eligible_histories(e, std::nullopt).size(), 3u);
}

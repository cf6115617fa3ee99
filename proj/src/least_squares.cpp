#include "aftershock/least_squares.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "aftershock/errors.hpp"

namespace aftershock {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

double sum_squares(const Vector& r) { return r.squaredNorm(); }

Vector evaluate(const ResidualFn& fn, const Vector& x, std::size_t m) {
    Vector r(static_cast<Eigen::Index>(m));
    fn(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
       std::span<double>(r.data(), m));
    return r;
}

Matrix jacobian(const ResidualFn& fn, const Vector& x, std::size_t m) {
    Matrix jac(static_cast<Eigen::Index>(m), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = 1e-6 * std::max(1.0, std::fabs(x[j]));
        Vector xp = x;
        Vector xm = x;
        xp[j] += h;
        xm[j] -= h;
        jac.col(j) = (evaluate(fn, xp, m) - evaluate(fn, xm, m)) / (2.0 * h);
    }
    return jac;
}

bool finite(const Vector& v) { return v.allFinite(); }

}  // namespace

LeastSquaresResult levenberg_marquardt(const ResidualFn& fn, std::vector<double> x0,
                                       std::size_t residual_count,
                                       const LeastSquaresOptions& opts) {
    const auto p = static_cast<Eigen::Index>(x0.size());
    if (residual_count < x0.size()) throw FitError("fewer residuals than parameters");

    Vector lower = Vector::Constant(p, -INFINITY);
    Vector upper = Vector::Constant(p, INFINITY);
    if (!opts.lower.empty()) lower = Eigen::Map<const Vector>(opts.lower.data(), p);
    if (!opts.upper.empty()) upper = Eigen::Map<const Vector>(opts.upper.data(), p);

    Vector x = Eigen::Map<Vector>(x0.data(), p).cwiseMax(lower).cwiseMin(upper);
    Vector r = evaluate(fn, x, residual_count);
    if (!finite(r)) throw FitError("non-finite residuals at the starting point");
    double cost = sum_squares(r);
    double lambda = opts.initial_damping;

    std::ostringstream trace;
    trace.precision(10);

    auto finish = [&](std::size_t iter, const std::vector<bool>& fixed) {
        LeastSquaresResult out;
        out.x.assign(x.data(), x.data() + p);
        out.residuals.assign(r.data(), r.data() + r.size());
        out.chi2 = cost;
        out.iterations = iter;
        out.at_bound = fixed;
        const Matrix jac_final = jacobian(fn, x, residual_count);
        const Matrix cov = (jac_final.transpose() * jac_final).completeOrthogonalDecomposition().pseudoInverse();
        out.covariance.resize(static_cast<std::size_t>(p * p));
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) out.covariance[static_cast<std::size_t>(i * p + j)] = cov(i, j);
        }
        return out;
    };

    for (std::size_t iter = 1; iter <= opts.max_iterations; ++iter) {
        const Matrix jac = jacobian(fn, x, residual_count);
        const Vector grad = jac.transpose() * r;

        // Active set: bounded components the descent direction would push out.
        std::vector<bool> fixed(static_cast<std::size_t>(p), false);
        std::vector<Eigen::Index> free;
        for (Eigen::Index j = 0; j < p; ++j) {
            const bool on_lower = x[j] <= lower[j] && grad[j] > 0.0;
            const bool on_upper = x[j] >= upper[j] && grad[j] < 0.0;
            fixed[static_cast<std::size_t>(j)] = on_lower || on_upper;
            if (!fixed[static_cast<std::size_t>(j)]) free.push_back(j);
        }
        if (free.empty()) return finish(iter, fixed);

        const auto nf = static_cast<Eigen::Index>(free.size());
        Matrix jf(jac.rows(), nf);
        Vector gf(nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            jf.col(k) = jac.col(free[static_cast<std::size_t>(k)]);
            gf[k] = grad[free[static_cast<std::size_t>(k)]];
        }
        Eigen::ColPivHouseholderQR<Matrix> qr(jf);
        qr.setThreshold(1e-12);
        if (qr.rank() < nf) {
            throw FitError("singular Jacobian at iteration " + std::to_string(iter), trace.str());
        }
        const Matrix jtj = jf.transpose() * jf;

        bool accepted = false;
        Vector step = Vector::Zero(p);
        while (!accepted) {
            Matrix damped = jtj;
            for (Eigen::Index k = 0; k < nf; ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-300);
            const Vector df = damped.ldlt().solve(-gf);
            Vector trial = x;
            for (Eigen::Index k = 0; k < nf; ++k) trial[free[static_cast<std::size_t>(k)]] += df[k];
            trial = trial.cwiseMax(lower).cwiseMin(upper);
            const Vector rt = evaluate(fn, trial, residual_count);
            const double trial_cost = finite(rt) ? sum_squares(rt) : INFINITY;
            if (trial_cost <= cost) {
                step = trial - x;
                x = trial;
                r = rt;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
            } else {
                lambda *= 10.0;
                if (lambda > 1e16) break;
            }
        }
        trace << "iter " << iter << " chi2 " << cost << " lambda " << lambda << '\n';

        // A step that cannot lower the objective even when fully damped means
        // x is a minimum to working precision.
        if (!accepted || step.cwiseAbs().maxCoeff() < opts.step_tol) return finish(iter, fixed);
    }
    throw FitError("no convergence within " + std::to_string(opts.max_iterations) + " iterations",
                   trace.str());
}

}  // namespace aftershock

#include "ioncavity/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "ioncavity/errors.hpp"

namespace ioncavity::experiments {

namespace {

struct LmResult {
    Eigen::VectorXd params;
    Eigen::VectorXd errors;
    double rms = 0.0;
    int iterations = 0;
};

// Standard Levenberg-Marquardt with multiplicative damping on diag(J^T J).
// `model` fills residuals r_i = y_i - f(x_i; params) and the Jacobian
// d f / d params.  Parameter errors from the unscaled covariance
// (J^T J)^{-1} * s^2 at the solution.
LmResult levenberg_marquardt(
    const Eigen::VectorXd& start,
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>&
        model,
    std::size_t n_points, const char* what) {
    const int n_par = static_cast<int>(start.size());
    const int n = static_cast<int>(n_points);
    if (n <= n_par)
        throw AnalysisError(std::string(what) + ": not enough points for the fit");

    Eigen::VectorXd params = start;
    Eigen::VectorXd resid(n), resid_try(n);
    Eigen::MatrixXd jac(n, n_par), jac_try(n, n_par);

    model(params, resid, jac);
    double ssr = resid.squaredNorm();
    double lambda = 1e-3;
    int iter = 0;
    const int max_iter = 200;

    for (; iter < max_iter; ++iter) {
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd jtr = jac.transpose() * resid;
        Eigen::MatrixXd damped = jtj;
        for (int k = 0; k < n_par; ++k)
            damped(k, k) += lambda * std::max(jtj(k, k), 1e-30);

        Eigen::VectorXd step = damped.ldlt().solve(jtr);
        if (!step.allFinite())
            throw AnalysisError(std::string(what) + ": singular normal equations");

        Eigen::VectorXd trial = params + step;
        model(trial, resid_try, jac_try);
        const double ssr_try = resid_try.squaredNorm();

        // Step below parameter resolution: already at the optimum.
        bool step_tiny = true;
        for (int k = 0; k < n_par; ++k)
            if (std::abs(step(k)) > 1e-12 * (std::abs(params(k)) + 1e-300))
                step_tiny = false;

        if (std::isfinite(ssr_try) && ssr_try < ssr) {
            const double improvement = (ssr - ssr_try) / std::max(ssr, 1e-300);
            params = trial;
            resid.swap(resid_try);
            jac.swap(jac_try);
            ssr = ssr_try;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (improvement < 1e-12 || step_tiny) break;
        } else {
            if (step_tiny) break;
            lambda *= 8.0;
            if (lambda > 1e12)
                throw AnalysisError(std::string(what) +
                                    ": did not converge (damping exhausted)");
        }
    }
    if (iter == max_iter)
        throw AnalysisError(std::string(what) + ": did not converge in " +
                            std::to_string(max_iter) + " iterations");

    LmResult out;
    out.params = params;
    out.iterations = iter + 1;
    const double dof = std::max(1, n - n_par);
    const double s2 = ssr / dof;
    out.rms = std::sqrt(ssr / n);

    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse() * s2;
    out.errors.resize(n_par);
    for (int k = 0; k < n_par; ++k)
        out.errors(k) = cov(k, k) > 0.0 ? std::sqrt(cov(k, k)) : 0.0;
    return out;
}

void require_sane_series(const std::vector<double>& xs, const std::vector<double>& ys,
                         std::size_t min_points, const char* what) {
    if (xs.size() != ys.size())
        throw AnalysisError(std::string(what) + ": x/y length mismatch");
    if (xs.size() < min_points)
        throw AnalysisError(std::string(what) + ": needs at least " +
                            std::to_string(min_points) + " points");
    const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
    const double span = *hi - *lo;
    const double scale = std::max({std::abs(*hi), std::abs(*lo), 1e-300});
    if (span <= 1e-12 * scale)
        throw AnalysisError(std::string(what) + ": input is constant");
}

} // namespace

double initial_tau_estimate(const std::vector<double>& times,
                            const std::vector<double>& values, double fraction) {
    if (times.size() != values.size() || times.size() < 4) return 0.0;
    const std::size_t n = times.size();

    // Offset guess: mean of the last 10% (at least 3 points).
    std::size_t tail = std::max<std::size_t>(3, n / 10);
    double offset = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) offset += values[i];
    offset /= double(tail);

    // Log-linear regression over the first `fraction` where y - offset > 0.
    const std::size_t head = std::max<std::size_t>(4, std::size_t(double(n) * fraction));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    const double y0 = values[0] - offset;
    for (std::size_t i = 0; i < std::min(head, n); ++i) {
        const double y = values[i] - offset;
        if (!(y > 0.0) || !(y > 1e-12 * std::abs(y0))) continue;
        const double ly = std::log(y);
        sx += times[i];
        sy += ly;
        sxx += times[i] * times[i];
        sxy += times[i] * ly;
        ++m;
    }
    if (m < 3) return 0.0;
    const double denom = double(m) * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) return 0.0;
    const double slope = (double(m) * sxy - sx * sy) / denom;
    if (!(slope < 0.0)) return 0.0;
    return -1.0 / slope;
}

ExponentialFit fit_exponential(const std::vector<double>& times,
                               const std::vector<double>& values) {
    require_sane_series(times, values, 8, "fit_exponential");
    const std::size_t n = times.size();

    std::size_t tail = std::max<std::size_t>(3, n / 10);
    double b0 = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) b0 += values[i];
    b0 /= double(tail);
    double a0 = values.front() - b0;
    if (std::abs(a0) < 1e-12 * std::max(std::abs(values.front()), std::abs(b0)))
        throw AnalysisError("fit_exponential: no decaying component (head equals tail)");

    double tau0 = initial_tau_estimate(times, values);
    if (!(tau0 > 0.0)) tau0 = std::max((times.back() - times.front()) / 3.0, 1e-30);

    auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& resid,
                     Eigen::MatrixXd& jac) {
        const double a = p(0), tau = p(1), b = p(2);
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(-times[i] / tau);
            resid(static_cast<int>(i)) = values[i] - (a * e + b);
            jac(static_cast<int>(i), 0) = e;
            jac(static_cast<int>(i), 1) = a * e * times[i] / (tau * tau);
            jac(static_cast<int>(i), 2) = 1.0;
        }
    };

    Eigen::VectorXd start(3);
    start << a0, tau0, b0;
    const LmResult lm = levenberg_marquardt(start, model, n, "fit_exponential");

    ExponentialFit fit;
    fit.amplitude = lm.params(0);
    fit.tau = lm.params(1);
    fit.offset = lm.params(2);
    fit.amplitude_err = lm.errors(0);
    fit.tau_err = lm.errors(1);
    fit.offset_err = lm.errors(2);
    fit.rms_residual = lm.rms;
    fit.iterations = lm.iterations;
    if (!(fit.tau > 0.0))
        throw AnalysisError("fit_exponential: converged to a non-decaying solution");
    return fit;
}

LorentzianFit fit_lorentzian(const std::vector<double>& xs,
                             const std::vector<double>& values) {
    require_sane_series(xs, values, 8, "fit_lorentzian");
    const std::size_t n = xs.size();

    // Offset from the edges, peak (or dip) from the largest deviation.
    std::size_t edge = std::max<std::size_t>(2, n / 10);
    double b0 = 0.0;
    for (std::size_t i = 0; i < edge; ++i) b0 += values[i] + values[n - 1 - i];
    b0 /= double(2 * edge);

    std::size_t peak = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(values[i] - b0) > best) {
            best = std::abs(values[i] - b0);
            peak = i;
        }
    const double a0 = values[peak] - b0;
    const double c0 = xs[peak];
    if (peak == 0 || peak + 1 == n)
        throw AnalysisError("fit_lorentzian: extremum sits on the grid edge (monotone data?)");

    // Half-width guess: first crossing of half max on either side.
    double h0 = 0.0;
    for (std::size_t i = peak + 1; i < n; ++i)
        if (std::abs(values[i] - b0) < 0.5 * std::abs(a0)) {
            h0 = std::abs(xs[i] - c0);
            break;
        }
    if (h0 == 0.0)
        for (std::size_t i = peak; i-- > 0;)
            if (std::abs(values[i] - b0) < 0.5 * std::abs(a0)) {
                h0 = std::abs(xs[i] - c0);
                break;
            }
    if (h0 == 0.0) h0 = (xs.back() - xs.front()) / 6.0;

    auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& resid,
                     Eigen::MatrixXd& jac) {
        const double c = p(0), h = p(1), a = p(2), b = p(3);
        const double h2 = h * h;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = xs[i] - c;
            const double u = dx * dx + h2;
            const double f = a * h2 / u;
            resid(static_cast<int>(i)) = values[i] - (b + f);
            jac(static_cast<int>(i), 0) = 2.0 * a * h2 * dx / (u * u);
            jac(static_cast<int>(i), 1) = 2.0 * a * h * dx * dx / (u * u);
            jac(static_cast<int>(i), 2) = h2 / u;
            jac(static_cast<int>(i), 3) = 1.0;
        }
    };

    Eigen::VectorXd start(4);
    start << c0, h0, a0, b0;
    const LmResult lm = levenberg_marquardt(start, model, n, "fit_lorentzian");

    LorentzianFit fit;
    fit.center = lm.params(0);
    fit.hwhm = std::abs(lm.params(1));
    fit.amplitude = lm.params(2);
    fit.offset = lm.params(3);
    fit.center_err = lm.errors(0);
    fit.hwhm_err = lm.errors(1);
    fit.amplitude_err = lm.errors(2);
    fit.offset_err = lm.errors(3);
    fit.rms_residual = lm.rms;
    fit.iterations = lm.iterations;
    if (!(fit.hwhm > 0.0))
        throw AnalysisError("fit_lorentzian: converged to zero width");
    return fit;
}

} // namespace ioncavity::experiments

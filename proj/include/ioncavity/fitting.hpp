#pragma once

#include <vector>

namespace ioncavity::experiments {

// A * exp(-t / tau) + B, least squares with analytic Jacobian.
struct ExponentialFit {
    double amplitude = 0.0;
    double tau = 0.0;
    double offset = 0.0;
    double amplitude_err = 0.0;
    double tau_err = 0.0;
    double offset_err = 0.0;
    double rms_residual = 0.0;
    int iterations = 0;
};

// Deterministic initialization: offset from the tail mean, amplitude from
// head minus tail, tau from the log-slope of the first third.  Throws
// AnalysisError on fewer than 8 points, constant data, or non-convergence.
ExponentialFit fit_exponential(const std::vector<double>& times,
                               const std::vector<double>& values);

// offset + amplitude * hwhm^2 / ((x - center)^2 + hwhm^2); amplitude may be
// negative (dips).
struct LorentzianFit {
    double center = 0.0;
    double hwhm = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double center_err = 0.0;
    double hwhm_err = 0.0;
    double amplitude_err = 0.0;
    double offset_err = 0.0;
    double rms_residual = 0.0;
    int iterations = 0;
};

LorentzianFit fit_lorentzian(const std::vector<double>& xs,
                             const std::vector<double>& values);

// Log-slope estimate of a decay constant over the first `fraction` of the
// samples (after offset removal); used for fit seeding and window selection.
// Returns 0 when no usable estimate exists.
double initial_tau_estimate(const std::vector<double>& times,
                            const std::vector<double>& values, double fraction = 1.0 / 3.0);

} // namespace ioncavity::experiments

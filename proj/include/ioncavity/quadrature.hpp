#pragma once

#include <functional>
#include <vector>

namespace ioncavity::experiments {

// Gauss-Hermite rule for the weight exp(-x^2), weights normalized so they
// sum to 1 (i.e. divided by sqrt(pi)).  A Gaussian average of f with mean mu
// and std sigma is then sum_k weights[k] * f(mu + sqrt(2) * sigma * nodes[k]).
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch construction from the Jacobi matrix of the Hermite recurrence.
GaussHermite gauss_hermite(int n);

// Average of a vector-valued model over a Gaussian offset of std sigma.
// `eval(shift)` must re-evaluate the model with its detuning displaced by
// `shift` (rad/s); all calls must return vectors of equal length.  sigma = 0
// collapses to a single unshifted evaluation.
std::vector<double> gaussian_average(const std::function<std::vector<double>(double)>& eval,
                                     double sigma, int nodes);

} // namespace ioncavity::experiments

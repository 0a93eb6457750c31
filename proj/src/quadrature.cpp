#include "ioncavity/quadrature.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ioncavity/errors.hpp"

namespace ioncavity::experiments {

GaussHermite gauss_hermite(int n) {
    if (n < 1) throw InputError("gauss_hermite: need at least one node");

    // Jacobi matrix of the (physicists') Hermite polynomials: zero diagonal,
    // off-diagonal beta_k = sqrt(k / 2).
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double beta = std::sqrt(0.5 * k);
        jac(k, k - 1) = beta;
        jac(k - 1, k) = beta;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    if (es.info() != Eigen::Success)
        throw SolverError("gauss_hermite: eigenvalue decomposition failed");

    GaussHermite gh;
    gh.nodes.resize(static_cast<std::size_t>(n));
    gh.weights.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        gh.nodes[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
        // Physicists' weight: sqrt(pi) * v0^2; normalized by the total mass
        // sqrt(pi), so just v0^2.
        const double v0 = es.eigenvectors()(0, k);
        gh.weights[static_cast<std::size_t>(k)] = v0 * v0;
    }
    return gh;
}

std::vector<double> gaussian_average(const std::function<std::vector<double>(double)>& eval,
                                     double sigma, int nodes) {
    if (sigma < 0.0) throw InputError("gaussian_average: sigma must be >= 0");
    if (sigma == 0.0) return eval(0.0);

    const GaussHermite gh = gauss_hermite(nodes);
    std::vector<double> acc;
    for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
        const double shift = std::sqrt(2.0) * sigma * gh.nodes[k];
        const std::vector<double> sample = eval(shift);
        if (acc.empty()) acc.assign(sample.size(), 0.0);
        if (sample.size() != acc.size())
            throw AnalysisError("gaussian_average: callback returned inconsistent lengths");
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += gh.weights[k] * sample[i];
    }
    return acc;
}

} // namespace ioncavity::experiments

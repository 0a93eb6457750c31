#pragma once

// Independent reference implementations used only by the test suite.  Each
// oracle recomputes a quantity by a different method than the library so the
// two cannot share a bug.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracles {

using Complex = std::complex<double>;
using DenseCd = Eigen::MatrixXcd;

// Elementwise Kronecker product by four nested loops.
inline DenseCd kron_naive(const DenseCd& a, const DenseCd& b) {
    DenseCd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i1 = 0; i1 < a.rows(); ++i1)
        for (Eigen::Index j1 = 0; j1 < a.cols(); ++j1)
            for (Eigen::Index i2 = 0; i2 < b.rows(); ++i2)
                for (Eigen::Index j2 = 0; j2 < b.cols(); ++j2)
                    out(i1 * b.rows() + i2, j1 * b.cols() + j2) = a(i1, j1) * b(i2, j2);
    return out;
}

// Conjugate transpose by explicit element copies.
inline DenseCd dagger_naive(const DenseCd& a) {
    DenseCd out(a.cols(), a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
    return out;
}

// Clebsch-Gordan coefficients built from the algebra itself: start from the
// stretched state |J=j1+j2, M=J>, ladder down with J- = J1- + J2-, and open
// each lower-J multiplet by Gram-Schmidt against the higher ones at its top
// M, fixing the Condon-Shortley sign (<j1, m1=j1 | J, M=J> > 0).  No Racah
// formula anywhere.
class CgLadder {
public:
    CgLadder(double j1, double j2) : j1_(j1), j2_(j2) {
        const int d1 = static_cast<int>(std::lround(2 * j1)) + 1;
        const int d2 = static_cast<int>(std::lround(2 * j2)) + 1;
        dim_ = d1 * d2;
        // Column basis: |m1, m2> flattened with m1 slowest, both descending.
        const int n_j = static_cast<int>(std::lround(j1 + j2 - std::abs(j1 - j2))) + 1;
        for (int k = 0; k < n_j; ++k) {
            const double J = j1 + j2 - k;
            std::vector<Eigen::VectorXd> ladder;
            Eigen::VectorXd top = top_state(J);
            ladder.push_back(top);
            const int steps = static_cast<int>(std::lround(2 * J));
            for (int s = 0; s < steps; ++s) {
                const double M = J - s;
                Eigen::VectorXd next = apply_jminus(ladder.back());
                next /= std::sqrt(J * (J + 1) - M * (M - 1));
                ladder.push_back(next);
            }
            multiplets_.push_back(std::move(ladder));
        }
    }

    // <j1 m1 j2 m2 | J M>
    double coeff(double m1, double m2, double J, double M) const {
        if (std::abs(m1 + m2 - M) > 1e-9) return 0.0;
        const int k = static_cast<int>(std::lround(j1_ + j2_ - J));
        if (k < 0 || k >= static_cast<int>(multiplets_.size())) return 0.0;
        const int s = static_cast<int>(std::lround(J - M));
        if (s < 0 || s >= static_cast<int>(multiplets_[k].size())) return 0.0;
        return multiplets_[k][s](index(m1, m2));
    }

private:
    int index(double m1, double m2) const {
        const int i1 = static_cast<int>(std::lround(j1_ - m1));
        const int i2 = static_cast<int>(std::lround(j2_ - m2));
        const int d2 = static_cast<int>(std::lround(2 * j2_)) + 1;
        return i1 * d2 + i2;
    }

    Eigen::VectorXd apply_jminus(const Eigen::VectorXd& v) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
        for (double m1 = -j1_; m1 <= j1_ + 1e-9; m1 += 1.0)
            for (double m2 = -j2_; m2 <= j2_ + 1e-9; m2 += 1.0) {
                const double amp = v(index(m1, m2));
                if (amp == 0.0) continue;
                if (m1 > -j1_ + 1e-9)
                    out(index(m1 - 1, m2)) +=
                        amp * std::sqrt(j1_ * (j1_ + 1) - m1 * (m1 - 1));
                if (m2 > -j2_ + 1e-9)
                    out(index(m1, m2 - 1)) +=
                        amp * std::sqrt(j2_ * (j2_ + 1) - m2 * (m2 - 1));
            }
        return out;
    }

    // Highest-M state of the J multiplet: for J = j1+j2 it is |j1, j2>; below
    // that, the unique unit vector in the M = J subspace orthogonal to all
    // higher multiplets, signed per Condon-Shortley.
    Eigen::VectorXd top_state(double J) const {
        if (std::abs(J - (j1_ + j2_)) < 1e-9) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
            v(index(j1_, j2_)) = 1.0;
            return v;
        }
        // Basis of the M = J subspace.
        std::vector<int> cols;
        std::vector<std::pair<double, double>> ms;
        for (double m1 = -j1_; m1 <= j1_ + 1e-9; m1 += 1.0) {
            const double m2 = J - m1;
            if (m2 < -j2_ - 1e-9 || m2 > j2_ + 1e-9) continue;
            cols.push_back(index(m1, m2));
            ms.emplace_back(m1, m2);
        }
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
        // Seed with the highest-m1 component, Gram-Schmidt against higher Js.
        v(cols.front()) = 1.0;
        for (double Jh = j1_ + j2_; Jh > J + 1e-9; Jh -= 1.0) {
            const int k = static_cast<int>(std::lround(j1_ + j2_ - Jh));
            const int s = static_cast<int>(std::lround(Jh - J));
            const Eigen::VectorXd& u = multiplets_[k][s];
            v -= u.dot(v) * u;
        }
        v.normalize();
        // Condon-Shortley: coefficient at maximal m1 positive.
        double lead = 0.0;
        double best_m1 = -j1_ - 1;
        for (std::size_t i = 0; i < ms.size(); ++i)
            if (ms[i].first > best_m1 + 1e-9) {
                best_m1 = ms[i].first;
                lead = v(cols[i]);
            }
        if (lead < 0) v = -v;
        return v;
    }

    double j1_, j2_;
    int dim_ = 0;
    std::vector<std::vector<Eigen::VectorXd>> multiplets_;
};

// Lindblad right-hand side evaluated directly on the matrix, no
// vectorization:  -i[H, rho] + sum_k (C rho C^dag - {C^dag C, rho}/2).
inline DenseCd lindblad_rhs_direct(const DenseCd& h, const std::vector<DenseCd>& cs,
                                   const DenseCd& rho) {
    const Complex i_unit(0.0, 1.0);
    DenseCd out = -i_unit * (h * rho - rho * h);
    for (const auto& c : cs) {
        const DenseCd cdc = c.adjoint() * c;
        out += c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
    }
    return out;
}

// Dense matrix exponential propagation of a vectorized density matrix.
inline Eigen::VectorXcd expm_propagate(const DenseCd& liouvillian,
                                       const Eigen::VectorXcd& vec_rho0, double t) {
    const DenseCd propagator = (liouvillian * Complex(t, 0.0)).exp();
    return propagator * vec_rho0;
}

// Fixed-step RK4 for a small real ODE system dy/dt = f(y).
inline std::vector<double> rk4_integrate(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    std::vector<double> y, double t_end, int steps) {
    const double h = t_end / steps;
    const auto axpy = [](std::vector<double> a, const std::vector<double>& b, double s) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
        return a;
    };
    for (int n = 0; n < steps; ++n) {
        const auto k1 = f(y);
        const auto k2 = f(axpy(y, k1, h / 2));
        const auto k3 = f(axpy(y, k2, h / 2));
        const auto k4 = f(axpy(y, k3, h));
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return y;
}

// Gaussian average by dense trapezoid quadrature over +/- span sigmas.
inline double gauss_average_trapezoid(const std::function<double(double)>& f,
                                      double sigma, int points = 2001,
                                      double span = 5.0) {
    if (sigma == 0.0) return f(0.0);
    const double a = -span * sigma, b = span * sigma;
    const double h = (b - a) / (points - 1);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < points; ++i) {
        const double x = a + i * h;
        const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
        const double g = std::exp(-x * x / (2 * sigma * sigma));
        num += w * g * f(x);
        den += w * g;
    }
    return num / den;
}

// Deterministic complex random matrix.
inline DenseCd random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DenseCd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = Complex(dist(rng), dist(rng));
    return out;
}

inline DenseCd random_hermitian(Eigen::Index dim, unsigned seed) {
    const DenseCd a = random_matrix(dim, dim, seed);
    return 0.5 * (a + a.adjoint());
}

inline DenseCd random_density(Eigen::Index dim, unsigned seed) {
    const DenseCd a = random_matrix(dim, dim, seed);
    DenseCd rho = a * a.adjoint();
    return rho / rho.trace();
}

} // namespace oracles

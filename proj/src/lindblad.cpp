#include "ioncavity/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

namespace ioncavity::lindblad {

DensityMatrix::DensityMatrix(DenseCd rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols())
        throw InputError("DensityMatrix requires a square matrix");
}

DensityMatrix DensityMatrix::pure(Eigen::Index dim, Eigen::Index ket) {
    if (ket < 0 || ket >= dim) throw InputError("DensityMatrix::pure: ket out of range");
    DenseCd rho = DenseCd::Zero(dim, dim);
    rho(ket, ket) = 1.0;
    return DensityMatrix(std::move(rho));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
    if (dim <= 0) throw InputError("DensityMatrix::maximally_mixed: bad dimension");
    DenseCd rho = DenseCd::Identity(dim, dim) / double(dim);
    return DensityMatrix(std::move(rho));
}

double DensityMatrix::trace_defect() const {
    return std::abs(rho_.trace() - Complex(1.0, 0.0));
}

double DensityMatrix::hermiticity_defect() const {
    return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    DenseCd herm = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseCd> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void DensityMatrix::check(double trace_tol, double herm_tol, double pos_tol) const {
    if (trace_defect() > trace_tol)
        throw SolverError("density matrix trace defect " + std::to_string(trace_defect()));
    if (hermiticity_defect() > herm_tol)
        throw SolverError("density matrix Hermiticity defect " +
                          std::to_string(hermiticity_defect()));
    const double min_ev = min_eigenvalue();
    if (min_ev < -pos_tol)
        throw SolverError("density matrix negative eigenvalue " + std::to_string(min_ev));
}

void DensityMatrix::project_physical() {
    rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
    const double tr = rho_.trace().real();
    if (std::abs(tr) < 1e-300) throw SolverError("density matrix has zero trace");
    rho_ /= tr;
}

Liouvillian::Liouvillian(SparseCd super, Eigen::Index dim)
    : super_(std::move(super)), dim_(dim) {
    if (super_.rows() != super_.cols() || super_.rows() != dim_ * dim_)
        throw InputError("Liouvillian: superoperator must be dim^2 x dim^2");
}

double Liouvillian::trace_defect() const {
    // Row vector t with t_j = 1 on vectorized diagonal positions; defect is
    // max_col |(t L)_col|.
    VectorCd acc = VectorCd::Zero(super_.cols());
    for (int outer = 0; outer < super_.outerSize(); ++outer)
        for (SparseCd::InnerIterator it(super_, outer); it; ++it) {
            const Eigen::Index r = it.row();
            if (r % (dim_ + 1) == 0) acc(it.col()) += it.value();
        }
    return acc.size() == 0 ? 0.0 : acc.cwiseAbs().maxCoeff();
}

Liouvillian assemble(const QOperator& hamiltonian,
                     const std::vector<QOperator>& collapse_ops, double herm_tol) {
    const Eigen::Index dim = hamiltonian.dim();
    const double herm_defect = hamiltonian.hermiticity_defect();
    if (herm_defect > herm_tol)
        throw InputError("assemble: Hamiltonian Hermiticity defect " +
                         std::to_string(herm_defect));

    const SparseCd ident = QOperator::identity(dim).sparse();
    const SparseCd& h = hamiltonian.sparse();
    const Complex im(0.0, 1.0);
    const Eigen::Index n = dim * dim;

    SparseCd left(n, n), right(n, n), tmp(n, n);
    SparseCd h_trans = h.transpose();
    left = Eigen::kroneckerProduct(ident, h);
    right = Eigen::kroneckerProduct(h_trans, ident);
    SparseCd super = (-im) * (left - right);

    for (const QOperator& c : collapse_ops) {
        if (c.dim() != dim)
            throw InputError("assemble: collapse operator dimension mismatch");
        const SparseCd& cm = c.sparse();
        SparseCd c_conj = cm.conjugate();
        SparseCd c_adj = cm.adjoint();
        SparseCd cdc = c_adj * cm;
        SparseCd cdc_trans = cdc.transpose();
        tmp = Eigen::kroneckerProduct(c_conj, cm);
        super += tmp;
        tmp = Eigen::kroneckerProduct(ident, cdc);
        super -= SparseCd(0.5 * tmp);
        tmp = Eigen::kroneckerProduct(cdc_trans, ident);
        super -= SparseCd(0.5 * tmp);
    }
    super.makeCompressed();

    Liouvillian liou(std::move(super), dim);
    const double trace_defect = liou.trace_defect();
    const double max_abs = liou.matrix().nonZeros() > 0
                               ? liou.matrix().coeffs().abs().maxCoeff()
                               : 0.0; // maxCoeff on an empty array is UB
    const double scale = std::max(1.0, max_abs);
    if (trace_defect > 1e-10 * scale)
        throw SolverError("assemble: generator does not annihilate the trace, defect " +
                          std::to_string(trace_defect));
    return liou;
}

namespace {

double inf_norm(const SparseCd& mat) {
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(mat.rows());
    for (int outer = 0; outer < mat.outerSize(); ++outer)
        for (SparseCd::InnerIterator it(mat, outer); it; ++it)
            row_sums(it.row()) += std::abs(it.value());
    return mat.rows() == 0 ? 0.0 : row_sums.maxCoeff();
}

// Solve L x = 0, Tr x = 1 by overwriting the pinned row with the trace
// functional.
VectorCd pinned_solve(const SparseCd& liou, Eigen::Index dim, Eigen::Index pin_row,
                      double row_scale) {
    const Eigen::Index n = liou.rows();
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(liou.nonZeros()) + static_cast<std::size_t>(dim));
    for (int outer = 0; outer < liou.outerSize(); ++outer)
        for (SparseCd::InnerIterator it(liou, outer); it; ++it)
            if (it.row() != pin_row) trips.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index k = 0; k < dim; ++k)
        trips.emplace_back(pin_row, k * (dim + 1), Complex(row_scale, 0.0));

    SparseCd bordered(n, n);
    bordered.setFromTriplets(trips.begin(), trips.end());
    bordered.makeCompressed();

    Eigen::SparseLU<SparseCd> lu;
    lu.compute(bordered);
    if (lu.info() != Eigen::Success)
        throw SolverError("steady_state: sparse LU factorization failed (generator singular "
                          "after trace pinning; the null space may be degenerate)");

    VectorCd rhs = VectorCd::Zero(n);
    rhs(pin_row) = Complex(row_scale, 0.0);
    VectorCd x = lu.solve(rhs);

    // One step of iterative refinement against the bordered system.
    VectorCd resid = rhs - bordered * x;
    x += lu.solve(resid);
    return x;
}

DensityMatrix unvec(const VectorCd& x, Eigen::Index dim) {
    DenseCd rho = Eigen::Map<const DenseCd>(x.data(), dim, dim);
    return DensityMatrix(std::move(rho));
}

} // namespace

DensityMatrix steady_state(const Liouvillian& liou, const SteadyStateOptions& opts) {
    const Eigen::Index dim = liou.dim();
    const Eigen::Index n = liou.super_dim();
    if (n == 0) throw InputError("steady_state: empty Liouvillian");

    const double norm_l = inf_norm(liou.matrix());
    const double row_scale = std::max(norm_l / std::max<double>(1, dim), 1.0);

    VectorCd x = pinned_solve(liou.matrix(), dim, 0, row_scale);

    const double resid = (liou.matrix() * x).cwiseAbs().maxCoeff();
    if (!(resid <= opts.residual_tol * std::max(norm_l, 1.0)))
        throw SolverError("steady_state: residual " + std::to_string(resid) +
                          " exceeds tolerance " +
                          std::to_string(opts.residual_tol * std::max(norm_l, 1.0)));

    if (opts.check_unique) {
        const Eigen::Index other_row = n / 2 + dim / 2;
        VectorCd x2 = pinned_solve(liou.matrix(), dim, other_row == 0 ? n - 1 : other_row,
                                   row_scale);
        const double diff = (x - x2).cwiseAbs().maxCoeff();
        const double scale = std::max(x.cwiseAbs().maxCoeff(), 1e-30);
        if (diff > opts.unique_tol * std::max(1.0, scale) && diff > opts.unique_tol)
            throw SolverError("steady_state: two trace-pinned solves disagree by " +
                              std::to_string(diff) + "; the steady state is not unique");
    }

    DensityMatrix rho = unvec(x, dim);
    rho.project_physical();
    return rho;
}

namespace {

// Dormand-Prince 5(4) coefficients.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                            c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
};

double error_norm(const VectorCd& err, const VectorCd& y0, const VectorCd& y1,
                  double abs_tol, double rel_tol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale =
            abs_tol + rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double e = std::abs(err(i)) / scale;
        acc += e * e;
    }
    return std::sqrt(acc / double(err.size()));
}

} // namespace

void evolve_observe(const DensityMatrix& rho0, const Liouvillian& liou,
                    const std::vector<double>& times, const EvolveOptions& opts,
                    const std::function<void(std::size_t, double, const DensityMatrix&)>&
                        observe) {
    const Eigen::Index dim = liou.dim();
    if (rho0.dim() != dim) throw InputError("evolve: state dimension mismatch");
    if (times.empty()) return;
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (times[i + 1] < times[i]) throw InputError("evolve: times must be non-decreasing");
    if (times.front() < 0.0) throw InputError("evolve: times must be non-negative");

    // Row-major copy: gather-style matvec is measurably faster in the stage loop.
    const Eigen::SparseMatrix<Complex, Eigen::RowMajor> l_mat = liou.matrix();
    VectorCd y = Eigen::Map<const VectorCd>(rho0.matrix().data(), dim * dim);

    double t = 0.0;
    VectorCd k1 = l_mat * y;

    // Initial step size: Hairer-style estimate from the first derivative.
    const double d0 = y.norm() / std::sqrt(double(y.size()));
    const double d1 = k1.norm() / std::sqrt(double(y.size()));
    double h = (d1 > 1e-30) ? 0.01 * d0 / d1 : 1e-12;
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);

    double err_prev = 1.0;
    VectorCd k2(y.size()), k3(y.size()), k4(y.size()), k5(y.size()), k6(y.size()),
        k7(y.size()), y_next(y.size()), err(y.size());

    auto emit = [&](std::size_t idx, double t_emit) {
        DensityMatrix rho = unvec(y, dim);
        const double tr_defect = rho.trace_defect();
        if (tr_defect > opts.trace_tol)
            throw SolverError("evolve: trace drift " + std::to_string(tr_defect) + " at t = " +
                              std::to_string(t_emit));
        observe(idx, t_emit, rho);
    };

    std::size_t next_out = 0;
    while (next_out < times.size() && times[next_out] <= t) {
        emit(next_out, times[next_out]);
        ++next_out;
    }

    using D = Dopri5;
    while (next_out < times.size()) {
        const double t_target = times[next_out];
        bool hit_output = false;
        double h_try = h;
        if (t + h_try >= t_target) {
            h_try = t_target - t;
            hit_output = true;
        }
        if (h_try < opts.min_step) {
            if (hit_output) {
                // Output point within roundoff of current time.
                emit(next_out, t_target);
                ++next_out;
                continue;
            }
            throw SolverError("evolve: step size underflow at t = " + std::to_string(t) +
                              " (system too stiff for the explicit integrator)");
        }

        k2 = l_mat * (y + h_try * (D::a21 * k1));
        k3 = l_mat * (y + h_try * (D::a31 * k1 + D::a32 * k2));
        k4 = l_mat * (y + h_try * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
        k5 = l_mat * (y + h_try * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4));
        k6 = l_mat *
             (y + h_try * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 +
                           D::a65 * k5));
        y_next = y + h_try * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
        k7 = l_mat * y_next;
        err = h_try * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 + D::e6 * k6 +
                       D::e7 * k7);

        const double err_n = error_norm(err, y, y_next, opts.abs_tol, opts.rel_tol);
        if (err_n <= 1.0) {
            t += h_try;
            y.swap(y_next);
            k1.swap(k7); // FSAL
            if (hit_output) {
                while (next_out < times.size() && times[next_out] <= t) {
                    emit(next_out, times[next_out]);
                    ++next_out;
                }
            }
            // PI controller (Gustafsson).
            const double fac = 0.9 * std::pow(std::max(err_n, 1e-10), -0.7 / 5.0) *
                               std::pow(err_prev, 0.4 / 5.0);
            h = h_try * std::clamp(fac, 0.2, 5.0);
            err_prev = std::max(err_n, 1e-10);
        } else {
            h = h_try * std::clamp(0.9 * std::pow(err_n, -0.2), 0.1, 1.0);
        }
        if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
        if (h < opts.min_step)
            throw SolverError("evolve: step size underflow at t = " + std::to_string(t) +
                              " (system too stiff for the explicit integrator)");
    }
}

std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const Liouvillian& liou,
                                  const std::vector<double>& times,
                                  const EvolveOptions& opts) {
    std::vector<DensityMatrix> out(times.size());
    evolve_observe(rho0, liou, times, opts,
                   [&](std::size_t idx, double, const DensityMatrix& rho) { out[idx] = rho; });
    return out;
}

Complex expect(const QOperator& op, const DensityMatrix& rho) {
    if (op.dim() != rho.dim()) throw InputError("expect: dimension mismatch");
    const SparseCd& a = op.sparse();
    const DenseCd& r = rho.matrix();
    Complex acc(0.0, 0.0);
    for (int outer = 0; outer < a.outerSize(); ++outer)
        for (SparseCd::InnerIterator it(a, outer); it; ++it)
            acc += it.value() * r(it.col(), it.row());
    return acc;
}

double expect_real(const QOperator& op, const DensityMatrix& rho) {
    return expect(op, rho).real();
}

} // namespace ioncavity::lindblad

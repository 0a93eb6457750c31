#pragma once

#include <functional>
#include <vector>

#include "ioncavity/qops.hpp"

namespace ioncavity::lindblad {

using qops::Complex;
using qops::DenseCd;
using qops::QOperator;
using qops::SparseCd;
using qops::VectorCd;

// Density matrix with invariant checks.  Stored dense; dimensions here stay
// below a few hundred.
class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(DenseCd rho);

    static DensityMatrix pure(Eigen::Index dim, Eigen::Index ket);
    static DensityMatrix maximally_mixed(Eigen::Index dim);

    Eigen::Index dim() const { return rho_.rows(); }
    const DenseCd& matrix() const { return rho_; }
    DenseCd& matrix() { return rho_; }

    double trace_defect() const;      // |Tr(rho) - 1|
    double hermiticity_defect() const;
    double min_eigenvalue() const;    // smallest eigenvalue of (rho + rho^dag)/2

    // Throws SolverError when Tr defect > trace_tol, Hermiticity defect >
    // herm_tol, or min eigenvalue < -pos_tol.
    void check(double trace_tol = 1e-10, double herm_tol = 1e-10,
               double pos_tol = 1e-8) const;

    // Restore exact Hermiticity and unit trace (cleanup after linear solves).
    void project_physical();

private:
    DenseCd rho_;
};

// Vectorized generator of the master equation
//   d rho/dt = -i[H, rho] + sum_k (C_k rho C_k^dag - {C_k^dag C_k, rho}/2)
// using column stacking, vec(A rho B) = (B^T ⊗ A) vec(rho).
class Liouvillian {
public:
    Liouvillian() = default;
    explicit Liouvillian(SparseCd super, Eigen::Index dim);

    Eigen::Index dim() const { return dim_; }                 // Hilbert dimension
    Eigen::Index super_dim() const { return super_.rows(); }  // dim^2
    const SparseCd& matrix() const { return super_; }

    // max_col |sum_over_trace_rows L| -- the trace functional must be a left
    // null vector of any Lindblad generator.
    double trace_defect() const;

    VectorCd apply(const VectorCd& vec_rho) const { return super_ * vec_rho; }

private:
    SparseCd super_;
    Eigen::Index dim_ = 0;
};

// Build the superoperator from a Hamiltonian and collapse operators.  The
// Hamiltonian must be Hermitian within herm_tol (throws InputError otherwise);
// the assembled generator is checked to annihilate the trace to 1e-10.
Liouvillian assemble(const QOperator& hamiltonian,
                     const std::vector<QOperator>& collapse_ops,
                     double herm_tol = 1e-9);

struct SteadyStateOptions {
    double residual_tol = 1e-9;   // relative to ||L||_inf
    bool check_unique = false;    // second solve with a different pinned row
    double unique_tol = 1e-7;     // max element difference between the two solves
};

// Unique steady state of L via a trace-pinned sparse LU solve.  Throws
// SolverError when the factorization fails, the residual stays above
// tolerance, or (with check_unique) two pinned-row choices disagree.
DensityMatrix steady_state(const Liouvillian& liou,
                           const SteadyStateOptions& opts = {});

struct EvolveOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-10; // error floor for components far below the trace scale
    double max_step = 0.0;        // 0: no cap
    double min_step = 1e-18;      // below this, throw SolverError (stiffness)
    double trace_tol = 1e-8;      // drift guard on Tr(rho)
};

// Adaptive Dormand-Prince RK45 propagation of vec(rho).  `times` must be
// non-decreasing and start at t >= 0; the state at each entry is handed to
// `observe`.  The first entry may be 0 (initial state is reported as-is).
void evolve_observe(const DensityMatrix& rho0, const Liouvillian& liou,
                    const std::vector<double>& times, const EvolveOptions& opts,
                    const std::function<void(std::size_t idx, double t,
                                             const DensityMatrix& rho)>& observe);

// Convenience wrapper collecting the full state at each sample time.
std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const Liouvillian& liou,
                                  const std::vector<double>& times,
                                  const EvolveOptions& opts = {});

// Tr(op * rho); real part with the imaginary part checked when the operator
// is Hermitian is left to callers.
Complex expect(const QOperator& op, const DensityMatrix& rho);
double expect_real(const QOperator& op, const DensityMatrix& rho);

} // namespace ioncavity::lindblad

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "ioncavity/errors.hpp"

namespace ioncavity::qops {

using Complex = std::complex<double>;
using SparseCd = Eigen::SparseMatrix<Complex>;
using DenseCd = Eigen::MatrixXcd;
using VectorCd = Eigen::VectorXcd;

// Square operator on a finite Hilbert space, stored sparse, convertible to
// dense on demand.  All algebra preserves squareness; dimension mismatches
// throw InputError.
class QOperator {
public:
    QOperator() = default;
    explicit QOperator(SparseCd mat);
    explicit QOperator(const DenseCd& mat);

    static QOperator zero(Eigen::Index dim);
    static QOperator identity(Eigen::Index dim);
    // Fock-space annihilation operator on {|0>, ..., |cutoff>}.
    static QOperator annihilator(int cutoff);
    // amp * |i><j|
    static QOperator ket_bra(Eigen::Index dim, Eigen::Index i, Eigen::Index j,
                             Complex amp = Complex(1.0, 0.0));

    Eigen::Index dim() const { return mat_.rows(); }
    Eigen::Index non_zeros() const { return mat_.nonZeros(); }
    const SparseCd& sparse() const { return mat_; }
    DenseCd dense() const { return DenseCd(mat_); }
    Complex coeff(Eigen::Index i, Eigen::Index j) const { return mat_.coeff(i, j); }

    QOperator dagger() const;
    // max_ij |A_ij - conj(A_ji)|
    double hermiticity_defect() const;
    bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }

    QOperator& operator+=(const QOperator& rhs);
    QOperator& operator-=(const QOperator& rhs);
    QOperator& operator*=(Complex scale);

    friend QOperator operator+(QOperator lhs, const QOperator& rhs) { return lhs += rhs; }
    friend QOperator operator-(QOperator lhs, const QOperator& rhs) { return lhs -= rhs; }
    friend QOperator operator*(Complex scale, QOperator op) { return op *= scale; }
    friend QOperator operator*(QOperator op, Complex scale) { return op *= scale; }
    friend QOperator operator*(double scale, QOperator op) { return op *= Complex(scale, 0.0); }
    // Matrix product.
    friend QOperator operator*(const QOperator& lhs, const QOperator& rhs);

private:
    SparseCd mat_;
};

// Tensor product; index of (a ⊗ b) is i_a * dim(b) + i_b (a is the slower factor).
QOperator kron(const QOperator& a, const QOperator& b);

// Clebsch-Gordan coefficient <j1 m1 j2 m2 | J M> in the Condon-Shortley
// convention.  Quantum numbers must be (half-)integers with j >= 0, |m| <= j
// and m + j integral; violations throw InputError.  Returns 0 when the
// triangle rule or M = m1 + m2 fails.
double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M);

// Basis label for the composite space: atom index, then one Fock occupation
// per cavity mode.
struct KetIndex {
    int atom = 0;
    std::vector<int> fock;
};

// Flattening of atom ⊗ mode_1 ⊗ ... ⊗ mode_k with the atom as the slowest
// index and the last mode as the fastest.
class HilbertLayout {
public:
    HilbertLayout(int atom_dim, std::vector<int> mode_dims);

    Eigen::Index dim() const { return dim_; }
    int atom_dim() const { return atom_dim_; }
    const std::vector<int>& mode_dims() const { return mode_dims_; }

    Eigen::Index flatten(const KetIndex& ket) const;
    KetIndex unflatten(Eigen::Index idx) const;

    // op_atom ⊗ I ⊗ ... ⊗ I
    QOperator lift_atom(const QOperator& op_atom) const;
    // I_atom ⊗ ... ⊗ op_mode (at slot `mode`) ⊗ ... ⊗ I
    QOperator lift_mode(std::size_t mode, const QOperator& op_mode) const;

private:
    int atom_dim_ = 0;
    std::vector<int> mode_dims_;
    Eigen::Index dim_ = 0;
};

} // namespace ioncavity::qops

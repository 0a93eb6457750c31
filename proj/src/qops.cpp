#include "ioncavity/qops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace ioncavity::qops {

namespace {

void require_square(const SparseCd& mat) {
    if (mat.rows() != mat.cols())
        throw InputError("QOperator requires a square matrix, got " +
                         std::to_string(mat.rows()) + "x" + std::to_string(mat.cols()));
}

void require_same_dim(const QOperator& a, const QOperator& b, const char* what) {
    if (a.dim() != b.dim())
        throw InputError(std::string(what) + ": dimension mismatch " +
                         std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}

} // namespace

QOperator::QOperator(SparseCd mat) : mat_(std::move(mat)) {
    require_square(mat_);
    mat_.makeCompressed();
}

QOperator::QOperator(const DenseCd& mat) {
    if (mat.rows() != mat.cols())
        throw InputError("QOperator requires a square matrix, got " +
                         std::to_string(mat.rows()) + "x" + std::to_string(mat.cols()));
    mat_ = mat.sparseView(1.0, 0.0); // keep every stored nonzero exactly
    mat_.makeCompressed();
}

QOperator QOperator::zero(Eigen::Index dim) {
    if (dim < 0) throw InputError("zero: negative dimension");
    return QOperator(SparseCd(dim, dim));
}

QOperator QOperator::identity(Eigen::Index dim) {
    if (dim < 0) throw InputError("identity: negative dimension");
    SparseCd mat(dim, dim);
    mat.setIdentity();
    return QOperator(std::move(mat));
}

QOperator QOperator::annihilator(int cutoff) {
    if (cutoff < 0) throw InputError("annihilator: cutoff must be >= 0");
    const Eigen::Index dim = cutoff + 1;
    SparseCd mat(dim, dim);
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(cutoff));
    for (int n = 1; n <= cutoff; ++n)
        trips.emplace_back(n - 1, n, Complex(std::sqrt(double(n)), 0.0));
    mat.setFromTriplets(trips.begin(), trips.end());
    return QOperator(std::move(mat));
}

QOperator QOperator::ket_bra(Eigen::Index dim, Eigen::Index i, Eigen::Index j, Complex amp) {
    if (i < 0 || i >= dim || j < 0 || j >= dim)
        throw InputError("ket_bra: index out of range");
    SparseCd mat(dim, dim);
    mat.insert(i, j) = amp;
    mat.makeCompressed();
    return QOperator(std::move(mat));
}

QOperator QOperator::dagger() const {
    SparseCd adj = mat_.adjoint();
    return QOperator(std::move(adj));
}

double QOperator::hermiticity_defect() const {
    SparseCd diff = SparseCd(mat_ - SparseCd(mat_.adjoint()));
    double defect = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SparseCd::InnerIterator it(diff, k); it; ++it)
            defect = std::max(defect, std::abs(it.value()));
    return defect;
}

QOperator& QOperator::operator+=(const QOperator& rhs) {
    require_same_dim(*this, rhs, "operator+");
    mat_ = SparseCd(mat_ + rhs.mat_);
    return *this;
}

QOperator& QOperator::operator-=(const QOperator& rhs) {
    require_same_dim(*this, rhs, "operator-");
    mat_ = SparseCd(mat_ - rhs.mat_);
    return *this;
}

QOperator& QOperator::operator*=(Complex scale) {
    mat_ *= scale;
    return *this;
}

QOperator operator*(const QOperator& lhs, const QOperator& rhs) {
    require_same_dim(lhs, rhs, "operator*");
    SparseCd prod = lhs.mat_ * rhs.mat_;
    return QOperator(std::move(prod));
}

QOperator kron(const QOperator& a, const QOperator& b) {
    SparseCd prod(a.dim() * b.dim(), a.dim() * b.dim());
    prod = Eigen::kroneckerProduct(a.sparse(), b.sparse());
    return QOperator(std::move(prod));
}

namespace {

bool is_half_integral(double x) {
    return std::abs(2.0 * x - std::round(2.0 * x)) < 1e-9;
}

void validate_jm(double j, double m, const char* label) {
    if (j < 0.0 || !is_half_integral(j))
        throw InputError(std::string("clebsch_gordan: invalid ") + label +
                         " angular momentum " + std::to_string(j));
    if (!is_half_integral(m) || std::abs(m) > j + 1e-9)
        throw InputError(std::string("clebsch_gordan: invalid projection for ") + label);
    if (std::abs(std::remainder(j - m, 1.0)) > 1e-9)
        throw InputError(std::string("clebsch_gordan: j and m differ by a non-integer for ") +
                         label);
}

// ln(n!) for integer n; memoized, supports n up to a few hundred.
double ln_factorial(int n) {
    static std::vector<double> table = {0.0, 0.0};
    if (n < 0) throw InputError("clebsch_gordan: negative factorial argument");
    while (static_cast<int>(table.size()) <= n)
        table.push_back(table.back() + std::log(double(table.size())));
    return table[static_cast<std::size_t>(n)];
}

int as_int(double x) { return static_cast<int>(std::llround(x)); }

} // namespace

double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M) {
    validate_jm(j1, m1, "j1");
    validate_jm(j2, m2, "j2");
    validate_jm(J, M, "J");

    if (std::abs(m1 + m2 - M) > 1e-9) return 0.0;
    if (J > j1 + j2 + 1e-9 || J < std::abs(j1 - j2) - 1e-9) return 0.0;
    if (!is_half_integral(j1 + j2 - J) ||
        std::abs(std::remainder(j1 + j2 - J, 1.0)) > 1e-9)
        return 0.0; // j1 + j2 and J of incompatible integer/half-integer type

    // Racah's closed form as a single alternating sum over k.
    const int a = as_int(j1 + j2 - J);
    const int b = as_int(j1 - j2 + J);
    const int c = as_int(-j1 + j2 + J);
    const int d = as_int(j1 + j2 + J + 1.0);

    const double ln_prefac =
        std::log(2.0 * J + 1.0) + ln_factorial(a) + ln_factorial(b) + ln_factorial(c) -
        ln_factorial(d) + ln_factorial(as_int(J + M)) + ln_factorial(as_int(J - M)) +
        ln_factorial(as_int(j1 - m1)) + ln_factorial(as_int(j1 + m1)) +
        ln_factorial(as_int(j2 - m2)) + ln_factorial(as_int(j2 + m2));

    const int k_min = std::max({0, as_int(j2 - J - m1), as_int(j1 + m2 - J)});
    const int k_max = std::min({a, as_int(j1 - m1), as_int(j2 + m2)});

    double sum = 0.0;
    for (int k = k_min; k <= k_max; ++k) {
        const double ln_den = ln_factorial(k) + ln_factorial(a - k) +
                              ln_factorial(as_int(j1 - m1) - k) +
                              ln_factorial(as_int(j2 + m2) - k) +
                              ln_factorial(as_int(J - j2 + m1) + k) +
                              ln_factorial(as_int(J - j1 - m2) + k);
        const double term = std::exp(0.5 * ln_prefac - ln_den);
        sum += (k % 2 == 0) ? term : -term;
    }
    return sum;
}

HilbertLayout::HilbertLayout(int atom_dim, std::vector<int> mode_dims)
    : atom_dim_(atom_dim), mode_dims_(std::move(mode_dims)) {
    if (atom_dim_ <= 0) throw InputError("HilbertLayout: atom dimension must be positive");
    dim_ = atom_dim_;
    for (int md : mode_dims_) {
        if (md <= 0) throw InputError("HilbertLayout: mode dimension must be positive");
        dim_ *= md;
    }
}

Eigen::Index HilbertLayout::flatten(const KetIndex& ket) const {
    if (ket.atom < 0 || ket.atom >= atom_dim_)
        throw InputError("flatten: atom index out of range");
    if (ket.fock.size() != mode_dims_.size())
        throw InputError("flatten: wrong number of mode occupations");
    Eigen::Index idx = ket.atom;
    for (std::size_t k = 0; k < mode_dims_.size(); ++k) {
        if (ket.fock[k] < 0 || ket.fock[k] >= mode_dims_[k])
            throw InputError("flatten: Fock occupation out of range");
        idx = idx * mode_dims_[k] + ket.fock[k];
    }
    return idx;
}

KetIndex HilbertLayout::unflatten(Eigen::Index idx) const {
    if (idx < 0 || idx >= dim_) throw InputError("unflatten: index out of range");
    KetIndex ket;
    ket.fock.resize(mode_dims_.size());
    for (std::size_t k = mode_dims_.size(); k-- > 0;) {
        ket.fock[k] = static_cast<int>(idx % mode_dims_[k]);
        idx /= mode_dims_[k];
    }
    ket.atom = static_cast<int>(idx);
    return ket;
}

QOperator HilbertLayout::lift_atom(const QOperator& op_atom) const {
    if (op_atom.dim() != atom_dim_)
        throw InputError("lift_atom: operator dimension does not match atom space");
    QOperator out = op_atom;
    for (int md : mode_dims_) out = kron(out, QOperator::identity(md));
    return out;
}

QOperator HilbertLayout::lift_mode(std::size_t mode, const QOperator& op_mode) const {
    if (mode >= mode_dims_.size()) throw InputError("lift_mode: mode index out of range");
    if (op_mode.dim() != mode_dims_[mode])
        throw InputError("lift_mode: operator dimension does not match mode space");
    QOperator out = QOperator::identity(atom_dim_);
    for (std::size_t k = 0; k < mode_dims_.size(); ++k)
        out = kron(out, k == mode ? op_mode : QOperator::identity(mode_dims_[k]));
    return out;
}

} // namespace ioncavity::qops

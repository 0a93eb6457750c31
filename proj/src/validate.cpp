#include "ioncavity/validate.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>

#include "ioncavity/eff3.hpp"
#include "ioncavity/lindblad.hpp"
#include "ioncavity/qops.hpp"
#include "ioncavity/quadrature.hpp"

namespace ioncavity::validate {

namespace {

using lindblad::DensityMatrix;
using qops::QOperator;

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(3);
    out << v;
    return out.str();
}

void run_check(std::vector<CheckResult>& out, const std::string& name,
               const std::function<CheckResult()>& body) {
    try {
        CheckResult r = body();
        r.name = name;
        out.push_back(std::move(r));
    } catch (const std::exception& e) {
        out.push_back({name, false, std::string("exception: ") + e.what()});
    }
}

CheckResult cg_completeness() {
    double worst = 0.0;
    for (double j1 : {0.5, 1.5, 2.5}) {
        const double j2 = 1.0;
        // Column index over product states, row over coupled states.
        std::vector<std::pair<double, double>> product; // (m1, m2)
        for (double m1 = -j1; m1 <= j1 + 0.25; m1 += 1.0)
            for (double m2 = -j2; m2 <= j2 + 0.25; m2 += 1.0)
                product.emplace_back(m1, m2);
        std::vector<std::pair<double, double>> coupled; // (J, M)
        for (double J = std::abs(j1 - j2); J <= j1 + j2 + 0.25; J += 1.0)
            for (double M = -J; M <= J + 0.25; M += 1.0)
                coupled.emplace_back(J, M);
        const std::size_t n = product.size();
        Eigen::MatrixXd u(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    qops::clebsch_gordan(j1, product[c].first, j2, product[c].second,
                                         coupled[r].first, coupled[r].second);
        const double defect =
            (u * u.transpose() - Eigen::MatrixXd::Identity(u.rows(), u.cols()))
                .cwiseAbs()
                .maxCoeff();
        const double defect2 =
            (u.transpose() * u - Eigen::MatrixXd::Identity(u.rows(), u.cols()))
                .cwiseAbs()
                .maxCoeff();
        worst = std::max({worst, defect, defect2});
    }
    return {"", worst < 1e-12, "unitarity defect " + fmt(worst)};
}

CheckResult hamiltonian_hermitian(const model::SystemParams& p) {
    const QOperator h = model::build_hamiltonian(p);
    const double scale = std::max(1.0, h.dense().cwiseAbs().maxCoeff());
    const double defect = h.hermiticity_defect() / scale;
    return {"", defect < 1e-12, "relative hermiticity defect " + fmt(defect)};
}

CheckResult decay_conservation(const model::SystemParams& p) {
    const auto collapse = model::build_collapse_ops(p);
    const model::AtomicBasis basis;
    const auto layout = model::make_layout(p);
    const double expected = p.decay.p12_s12 + p.decay.p12_d32;
    double worst = 0.0;
    for (double mj : {-0.5, 0.5}) {
        const int atom = basis.index(model::Term::P12, mj);
        const Eigen::Index ket =
            layout.flatten({atom, std::vector<int>(layout.mode_dims().size(), 0)});
        double total = 0.0;
        for (const auto& c : collapse) {
            const auto col = c.dense().col(ket);
            total += col.squaredNorm();
        }
        worst = std::max(worst, std::abs(total - expected) / expected);
    }
    return {"", worst < 1e-12, "relative rate defect " + fmt(worst)};
}

CheckResult liouvillian_trace(const model::SystemParams& p) {
    const auto liou =
        lindblad::assemble(model::build_hamiltonian(p), model::build_collapse_ops(p));
    double scale = 0.0;
    for (int k = 0; k < liou.matrix().outerSize(); ++k)
        for (lindblad::SparseCd::InnerIterator it(liou.matrix(), k); it; ++it)
            scale = std::max(scale, std::abs(it.value()));
    const double defect = liou.trace_defect() / std::max(scale, 1.0);
    return {"", defect < 1e-10, "relative trace defect " + fmt(defect)};
}

CheckResult two_level_steady() {
    const double gamma = 2.0, omega = 1.3, delta = 0.7;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 2);
    h(1, 1) = -delta;
    h(0, 1) = omega / 2.0;
    h(1, 0) = omega / 2.0;
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2, 2);
    c(0, 1) = std::sqrt(gamma);
    const auto liou = lindblad::assemble(QOperator(h), {QOperator(c)});
    const auto rho = lindblad::steady_state(liou);
    const double pee = rho.matrix()(1, 1).real();
    const double expected = (omega * omega / 4.0) /
                            (delta * delta + omega * omega / 2.0 + gamma * gamma / 4.0);
    const double err = std::abs(pee - expected);
    return {"", err < 1e-9, "optical-Bloch mismatch " + fmt(err)};
}

CheckResult full_steady_physical(const model::SystemParams& p) {
    const auto liou =
        lindblad::assemble(model::build_hamiltonian(p), model::build_collapse_ops(p));
    const auto rho = lindblad::steady_state(liou);
    const double tr = rho.trace_defect();
    const double herm = rho.hermiticity_defect();
    const double mineig = rho.min_eigenvalue();
    const bool ok = tr < 1e-10 && herm < 1e-10 && mineig > -1e-8;
    return {"", ok,
            "trace defect " + fmt(tr) + ", hermiticity " + fmt(herm) + ", min eig " +
                fmt(mineig)};
}

CheckResult quadrature_moments() {
    double worst = 0.0;
    const double moments[] = {1.0, 1.0, 3.0}; // E[x^0], E[x^2], E[x^4], x ~ N(0,1)
    for (int k = 0; k < 3; ++k) {
        const auto val = experiments::gaussian_average(
            [k](double x) { return std::vector<double>{std::pow(x, 2 * k)}; }, 1.0, 15);
        worst = std::max(worst, std::abs(val[0] - moments[k]));
    }
    return {"", worst < 1e-12, "Gaussian moment defect " + fmt(worst)};
}

CheckResult eq1_against_rate_oracle() {
    const double gamma1 = 100.0, gamma2_prime = 1.0, v = 0.5, w = 0.5;
    const double pump = 25.0;
    eff3::RateParams r;
    r.gamma1 = gamma1;
    r.gamma2 = v * gamma2_prime;
    r.gamma2_prime = gamma2_prime;
    r.gamma3 = w * gamma2_prime;
    r.pump = pump;
    const double np = eff3::steady_populations(r, false)[1];
    const double np_prime = eff3::steady_populations(r, true)[1];
    const double exact = np_prime / np;
    const double approx = eff3::normalized_fluorescence_eq1(v, w, gamma1, pump);
    const double err = std::abs(approx - exact) / exact;
    return {"", err < 0.02, "relative deviation " + fmt(err)};
}

} // namespace

std::vector<CheckResult> run_invariant_suite(const model::SystemParams& p) {
    std::vector<CheckResult> out;
    run_check(out, "clebsch_gordan_completeness", cg_completeness);
    run_check(out, "hamiltonian_hermitian", [&] { return hamiltonian_hermitian(p); });
    run_check(out, "p12_decay_rate_conservation", [&] { return decay_conservation(p); });
    run_check(out, "liouvillian_preserves_trace", [&] { return liouvillian_trace(p); });
    run_check(out, "two_level_optical_bloch", two_level_steady);
    run_check(out, "full_steady_state_physical", [&] { return full_steady_physical(p); });
    run_check(out, "gauss_hermite_moments", quadrature_moments);
    run_check(out, "shelving_rate_formula_vs_rate_oracle", eq1_against_rate_oracle);
    return out;
}

bool all_passed(const std::vector<CheckResult>& checks) {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

} // namespace ioncavity::validate

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ioncavity/config.hpp"
#include "ioncavity/lindblad.hpp"
#include "ioncavity/model.hpp"
#include "oracles.hpp"

using namespace ioncavity;
using model::AtomicBasis;
using model::SystemParams;
using model::Term;
using qops::Complex;
using qops::DenseCd;
using qops::QOperator;

namespace {

SystemParams table_params() { return io::RunConfig::defaults().to_system_params(); }

// Atomic populations per sublevel, traced over the cavity modes.
std::vector<double> sublevel_populations(const SystemParams& p,
                                         const lindblad::DensityMatrix& rho) {
    const auto layout = model::make_layout(p);
    std::vector<double> pops(18, 0.0);
    for (int a = 0; a < 18; ++a) {
        const auto proj = layout.lift_atom(QOperator::ket_bra(18, a, a));
        pops[static_cast<std::size_t>(a)] = lindblad::expect_real(proj, rho);
    }
    return pops;
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("basis has the five manifolds with their multiplicities and g-factors") {
    const AtomicBasis basis;
    CHECK(basis.manifold_size(Term::S12) == 2);
    CHECK(basis.manifold_size(Term::P12) == 2);
    CHECK(basis.manifold_size(Term::D32) == 4);
    CHECK(basis.manifold_size(Term::P32) == 4);
    CHECK(basis.manifold_size(Term::D52) == 6);
    int total = 0;
    for (const auto t : {Term::S12, Term::P12, Term::D32, Term::P32, Term::D52})
        total += basis.manifold_size(t);
    CHECK(total == 18);

    CHECK(AtomicBasis::g_lande_of(Term::S12) == doctest::Approx(2.0));
    CHECK(AtomicBasis::g_lande_of(Term::P12) == doctest::Approx(2.0 / 3.0));
    CHECK(AtomicBasis::g_lande_of(Term::D32) == doctest::Approx(4.0 / 5.0));
    CHECK(AtomicBasis::g_lande_of(Term::P32) == doctest::Approx(4.0 / 3.0));
    CHECK(AtomicBasis::g_lande_of(Term::D52) == doctest::Approx(6.0 / 5.0));

    CHECK_THROWS_AS(basis.index(Term::S12, 1.5), InputError);
}

TEST_CASE("zeeman shift vanishes at zero field and is odd in mJ") {
    const AtomicBasis basis;
    const double unit = 8.79e10; // rad/s per Tesla, magnitude irrelevant here
    CHECK(model::zeeman_shift(basis.state(basis.index(Term::S12, 0.5)), 0.0, unit) == 0.0);
    for (const auto t : {Term::D32, Term::P32, Term::D52})
        for (double mj = 0.5; mj <= AtomicBasis::j_of(t); mj += 1.0) {
            const double up =
                model::zeeman_shift(basis.state(basis.index(t, mj)), 1e-4, unit);
            const double dn =
                model::zeeman_shift(basis.state(basis.index(t, -mj)), 1e-4, unit);
            CHECK(up == doctest::Approx(-dn).epsilon(1e-15));
        }
}

TEST_CASE("zeeman shift reproduces direct CODATA arithmetic at 0.78 G") {
    const double mu_b = 9.2740100783e-24; // J/T
    const double hbar = 1.054571817e-34;  // J s
    const double b = 0.78e-4;             // T
    const double want = 2.0 * 0.5 * (mu_b / hbar) * b;
    const AtomicBasis basis;
    const double got =
        model::zeeman_shift(basis.state(basis.index(Term::S12, 0.5)), b, mu_b / hbar);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    // The config's own unit constant agrees with CODATA to its quoted digits.
    const auto p = table_params();
    CHECK(p.zeeman_unit == doctest::Approx(mu_b / hbar).epsilon(1e-7));
}

TEST_CASE("hamiltonian vanishes when every drive, detuning and field is off") {
    SystemParams p = table_params();
    p.l397.rabi = p.l850.rabi = p.l854.rabi = 0.0;
    p.l397.detuning = p.l850.detuning = p.l854.detuning = 0.0;
    p.g_bar = 0.0;
    p.delta_cav = 0.0;
    p.b_field = 0.0;
    CHECK(model::build_hamiltonian(p).dense().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hamiltonian is hermitian at full operating parameters") {
    CHECK(model::build_hamiltonian(table_params()).hermiticity_defect() < 1e-12);
}

TEST_CASE("dressed splitting of the S-P block matches the two-level formula") {
    SystemParams p = table_params();
    p.l850.rabi = p.l854.rabi = 0.0;
    p.l850.detuning = p.l854.detuning = 0.0;
    p.g_bar = 0.0;
    p.delta_cav = 0.0;
    p.b_field = 0.0;
    p.cavity_modes = 1; // drive structure unaffected; smaller space
    const double omega = p.l397.rabi;

    const AtomicBasis basis;
    const auto layout = model::make_layout(p);
    const auto block_eigs = [&](const SystemParams& params) {
        const DenseCd h = model::build_hamiltonian(params).dense();
        std::vector<Eigen::Index> idx;
        for (const double mj : {-0.5, 0.5}) {
            idx.push_back(layout.flatten({basis.index(Term::S12, mj), {0}}));
            idx.push_back(layout.flatten({basis.index(Term::P12, mj), {0}}));
        }
        DenseCd sub(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) sub(i, j) = h(idx[i], idx[j]);
        Eigen::SelfAdjointEigenSolver<DenseCd> eig(sub);
        return eig.eigenvalues();
    };

    // For S1/2 -> P1/2 the sigma channels carry the largest CG, sqrt(2)
    // stronger than pi; the strongest-channel normalization is per transition,
    // so a pi drive couples at omega / sqrt(2).
    const double omega_pi = omega / std::numbers::sqrt2;
    SUBCASE("strongest-channel convention, pi drive, on resonance") {
        p.rabi_convention = model::RabiConvention::Strongest;
        p.l397.detuning = 0.0;
        const auto ev = block_eigs(p);
        CHECK(ev(3) - ev(0) == doctest::Approx(omega_pi).epsilon(1e-12));
    }
    SUBCASE("strongest-channel convention, strongest (sigma+) drive couples at omega") {
        p.rabi_convention = model::RabiConvention::Strongest;
        p.l397.detuning = 0.0;
        p.l397.pol = {};
        p.l397.pol.sigma_plus = 1.0;
        const auto ev = block_eigs(p);
        CHECK(ev(3) - ev(0) == doctest::Approx(omega).epsilon(1e-12));
    }
    SUBCASE("strongest-channel convention, pi drive, detuned") {
        p.rabi_convention = model::RabiConvention::Strongest;
        p.l397.detuning = -0.61 * omega;
        const double delta = p.l397.detuning;
        const auto ev = block_eigs(p);
        const double want = std::sqrt(delta * delta + omega_pi * omega_pi);
        // Two degenerate dressed pairs, each split by sqrt(delta^2 + omega_eff^2).
        CHECK(ev(2) - ev(0) == doctest::Approx(want).epsilon(1e-12));
        CHECK(ev(3) - ev(1) == doctest::Approx(want).epsilon(1e-12));
    }
    SUBCASE("reduced convention scales the pi channel by its CG coefficient") {
        p.rabi_convention = model::RabiConvention::Reduced;
        p.l397.detuning = 0.0;
        const auto ev = block_eigs(p);
        const double cg = std::abs(qops::clebsch_gordan(0.5, 0.5, 1, 0, 0.5, 0.5));
        CHECK(ev(3) - ev(0) == doctest::Approx(omega * cg).epsilon(1e-12));
    }
}

TEST_CASE("collapse operators are absent when every rate vanishes") {
    SystemParams p = table_params();
    p.decay = {};
    p.kappa = 0.0;
    p.g_bar = 0.0; // a coupled cavity with kappa = 0 is rejected
    CHECK(model::build_collapse_ops(p).empty());
}

TEST_CASE("total decay rate out of each P sublevel is conserved") {
    const SystemParams p = table_params();
    const AtomicBasis basis;
    const auto layout = model::make_layout(p);
    const auto ops = model::build_collapse_ops(p);

    const auto rate_out = [&](Term t, double mj) {
        const auto idx = layout.flatten(
            {basis.index(t, mj), std::vector<int>(layout.mode_dims().size(), 0)});
        double sum = 0.0;
        for (const auto& c : ops) {
            const auto cdc = c.dagger() * c;
            sum += cdc.coeff(idx, idx).real();
        }
        return sum;
    };

    const double p12_total = p.decay.p12_s12 + p.decay.p12_d32;
    const double p32_total = p.decay.p32_s12 + p.decay.p32_d32 + p.decay.p32_d52;
    for (const double mj : {-0.5, 0.5}) {
        CHECK(rate_out(Term::P12, mj) == doctest::Approx(p12_total).epsilon(1e-12));
        CHECK(rate_out(Term::P32, mj) == doctest::Approx(p32_total).epsilon(1e-12));
    }
    for (const double mj : {-1.5, 1.5})
        CHECK(rate_out(Term::P32, mj) == doctest::Approx(p32_total).epsilon(1e-12));
}

TEST_CASE("decay-only evolution reproduces the configured branching ratio") {
    SystemParams p = table_params();
    p.l397.rabi = p.l850.rabi = p.l854.rabi = 0.0;
    p.g_bar = 0.0;
    p.cavity_modes = 1;
    const AtomicBasis basis;
    const auto layout = model::make_layout(p);
    const auto liou =
        lindblad::assemble(model::build_hamiltonian(p), model::build_collapse_ops(p));

    const auto start = layout.flatten({basis.index(Term::P12, 0.5), {0}});
    const auto rho0 = lindblad::DensityMatrix::pure(layout.dim(), start);
    const double t_end = 20.0 / (p.decay.p12_s12 + p.decay.p12_d32);
    const auto traj = lindblad::evolve(rho0, liou, {t_end});

    const auto pops = model::manifold_populations(p, traj[0].matrix());
    const double want_d = p.decay.p12_d32 / (p.decay.p12_s12 + p.decay.p12_d32);
    CHECK(pops[2] == doctest::Approx(want_d).epsilon(1e-7));
    CHECK(pops[0] == doctest::Approx(1.0 - want_d).epsilon(1e-7));
}

TEST_CASE("uv observable ignores shelved population without the 393 channel") {
    const SystemParams p = table_params();
    const AtomicBasis basis;
    const auto layout = model::make_layout(p);
    const auto obs = model::uv_fluorescence_observable(p, false);
    const auto shelved = lindblad::DensityMatrix::pure(
        layout.dim(), layout.flatten({basis.index(Term::D32, 0.5), {0, 0}}));
    CHECK(lindblad::expect_real(obs, shelved) == 0.0);
}

TEST_CASE("uv observable on the maximally mixed state is pure trace arithmetic") {
    const SystemParams p = table_params();
    const auto layout = model::make_layout(p);
    const auto rho = lindblad::DensityMatrix::maximally_mixed(layout.dim());
    const double got = lindblad::expect_real(model::uv_fluorescence_observable(p, true), rho);
    const double want = p.decay.p12_s12 * (2.0 / 18.0) + p.decay.p32_s12 * (4.0 / 18.0);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("cavity emission observable counts photons at rate 2 kappa") {
    const SystemParams p = table_params();
    const auto layout = model::make_layout(p);
    const auto obs = model::cavity_emission_observable(p);

    const auto vacuum = lindblad::DensityMatrix::pure(layout.dim(), 0);
    CHECK(lindblad::expect_real(obs, vacuum) == 0.0);

    const auto one_photon =
        lindblad::DensityMatrix::pure(layout.dim(), layout.flatten({0, {1, 0}}));
    CHECK(lindblad::expect_real(obs, one_photon) ==
          doctest::Approx(2.0 * p.kappa).epsilon(1e-12));
}

TEST_CASE("decoupled cavity stays empty in steady state") {
    SystemParams p = table_params();
    p.g_bar = 0.0;
    const auto liou =
        lindblad::assemble(model::build_hamiltonian(p), model::build_collapse_ops(p));
    const auto rho = lindblad::steady_state(liou);
    CHECK(lindblad::expect_real(model::cavity_emission_observable(p), rho) < 1e-12 * 2 * p.kappa);
}

TEST_CASE("zero field with symmetric drives keeps +mJ and -mJ populations equal") {
    SystemParams p = table_params();
    p.b_field = 0.0;
    const auto layout = model::make_layout(p);
    const auto liou =
        lindblad::assemble(model::build_hamiltonian(p), model::build_collapse_ops(p));
    const auto rho0 = lindblad::DensityMatrix::maximally_mixed(layout.dim());
    const auto traj = lindblad::evolve(rho0, liou, {3e-7, 1.5e-6});

    const AtomicBasis basis;
    for (const auto& rho : traj) {
        const auto pops = sublevel_populations(p, rho);
        for (const auto t : {Term::S12, Term::P12, Term::D32, Term::P32, Term::D52})
            for (double mj = 0.5; mj <= AtomicBasis::j_of(t); mj += 1.0) {
                const auto up = pops[static_cast<std::size_t>(basis.index(t, mj))];
                const auto dn = pops[static_cast<std::size_t>(basis.index(t, -mj))];
                CHECK(std::abs(up - dn) < 1e-9);
            }
    }
}

TEST_CASE("single- and two-mode layouts give the same atomic state when decoupled") {
    SystemParams p1 = table_params();
    p1.g_bar = 0.0;
    SystemParams p2 = p1;
    p1.cavity_modes = 1;
    p2.cavity_modes = 2;

    const auto solve_manifolds = [](const SystemParams& p) {
        const auto liou =
            lindblad::assemble(model::build_hamiltonian(p), model::build_collapse_ops(p));
        const auto rho = lindblad::steady_state(liou);
        return model::manifold_populations(p, rho.matrix());
    };
    const auto a = solve_manifolds(p1);
    const auto b = solve_manifolds(p2);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("parameter validation rejects unphysical configurations") {
    SystemParams p = table_params();
    p.kappa = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = table_params();
    p.decay.p12_s12 = -5.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = table_params();
    p.fock_cutoff = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = table_params();
    p.cavity_modes = 3;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = table_params();
    p.l397.pol.pi = Complex(2.0, 0.0);
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("cooperativity implements g^2 over 2 kappa gamma") {
    SystemParams p = table_params();
    const double want =
        p.g_bar * p.g_bar / (2.0 * p.kappa * 0.5 * (p.decay.p12_s12 + p.decay.p12_d32));
    CHECK(p.cooperativity() == doctest::Approx(want).epsilon(1e-15));
}

} // TEST_SUITE

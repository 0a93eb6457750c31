#include "ioncavity/eff3.hpp"

#include <cmath>
#include <string>

#include "ioncavity/experiments.hpp"
#include "ioncavity/lindblad.hpp"

namespace ioncavity::eff3 {

std::array<double, 3> steady_populations(const RateParams& r, bool use_prime) {
    if (r.gamma1 < 0.0 || r.gamma2 < 0.0 || r.gamma2_prime < 0.0 || r.gamma3 < 0.0 ||
        r.pump < 0.0)
        throw InputError("steady_populations: rates must be >= 0");
    const double g2 = use_prime ? r.gamma2_prime : r.gamma2;
    if (r.pump == 0.0 && r.gamma1 == 0.0 && g2 == 0.0 && r.gamma3 == 0.0)
        throw AnalysisError("steady_populations: all rates zero, equilibrium degenerate");

    if (r.pump == 0.0) return {1.0, 0.0, 0.0};
    if (g2 > 0.0 && r.gamma3 == 0.0) return {0.0, 0.0, 1.0}; // D is absorbing

    // N_S = (G1+G2eff+V)/V N_P ; N_D = G2eff/G3 N_P ; normalized.
    const double ns_over_np = (r.gamma1 + g2 + r.pump) / r.pump;
    const double nd_over_np = g2 > 0.0 ? g2 / r.gamma3 : 0.0;
    const double total = ns_over_np + 1.0 + nd_over_np;
    return {ns_over_np / total, 1.0 / total, nd_over_np / total};
}

double normalized_fluorescence_eq1(double v, double w, double gamma1, double pump) {
    if (pump <= 0.0)
        throw InputError("normalized_fluorescence_eq1: pump rate V must be positive");
    if (!(v > 0.0) || v > 1.0)
        throw InputError("normalized_fluorescence_eq1: v must lie in (0, 1]");
    if (w < 0.0) throw InputError("normalized_fluorescence_eq1: w must be >= 0");
    if (gamma1 < 0.0) throw InputError("normalized_fluorescence_eq1: gamma1 must be >= 0");
    return 1.0 - (1.0 - v) / (1.0 + w * (gamma1 + 2.0 * pump) / pump);
}

namespace {

// P-population fraction of the {S, P} pair during the switched-off decay,
// measured at a fixed reference time after the fast initial settling.
double p_fraction_during_decay(const model::SystemParams& p) {
    model::SystemParams off = p;
    off.g_bar = 0.0;
    off.sigma_inhom = 0.0;

    const bool dark_steady = p.l850.rabi == 0.0 || p.l854.rabi == 0.0;
    const lindblad::DensityMatrix rho0 =
        dark_steady ? experiments::even_manifold_state(off, model::Term::S12)
                    : lindblad::steady_state(lindblad::assemble(
                          model::build_hamiltonian(off), model::build_collapse_ops(off)));

    model::SystemParams evo = off;
    evo.l850.rabi = 0.0;
    evo.l854.rabi = 0.0;
    const lindblad::Liouvillian liou = lindblad::assemble(model::build_hamiltonian(evo),
                                                          model::build_collapse_ops(evo));
    const std::vector<double> times = {0.0, 3e-7};
    const auto states = lindblad::evolve(rho0, liou, times);
    const auto pops = model::manifold_populations(evo, states.back().matrix());
    const double ns = pops[static_cast<std::size_t>(model::Term::S12)];
    const double np = pops[static_cast<std::size_t>(model::Term::P12)];
    if (!(ns + np > 1e-9))
        throw AnalysisError("effective_rates_from_full: S/P populations vanished during "
                            "decay; not in the rate-equation regime");
    return np / (ns + np);
}

} // namespace

RateParams effective_rates_from_full(const model::SystemParams& p) {
    p.validate();
    RateParams r;
    r.gamma1 = p.decay.p12_s12;
    r.gamma2 = p.decay.p12_d32;

    model::SystemParams p0 = p;
    p0.g_bar = 0.0;
    p0.sigma_inhom = 0.0;
    if (p.l850.rabi == 0.0 || p.l854.rabi == 0.0) {
        // No repumped steady state exists; use the quasi-steady balance of the
        // decay phase itself, f = V / (G1 + 2V).
        const double f = p_fraction_during_decay(p);
        if (!(f < 0.5))
            throw AnalysisError("effective_rates_from_full: P fraction " + std::to_string(f) +
                                " >= 1/2; the two-level pump balance has no solution");
        r.pump = r.gamma1 * f / (1.0 - 2.0 * f);
    } else {
        // Pump rate from the decoupled-cavity steady-state balance
        // V N_S = (G1+V) N_P.
        const lindblad::DensityMatrix rho_ss = lindblad::steady_state(
            lindblad::assemble(model::build_hamiltonian(p0), model::build_collapse_ops(p0)));
        const auto pops = model::manifold_populations(p0, rho_ss.matrix());
        const double ns = pops[static_cast<std::size_t>(model::Term::S12)];
        const double np = pops[static_cast<std::size_t>(model::Term::P12)];
        if (!(ns - np > 1e-9))
            throw AnalysisError("effective_rates_from_full: N_S <= N_P in the g=0 steady "
                                "state; the two-level pump balance has no solution");
        r.pump = r.gamma1 * np / (ns - np);
    }

    // Repump rate from D3/2 depletion with the cavity decoupled and the 397 nm
    // drive off, so S1/2 is absorbing and the decay is a clean exponential.
    if (p.l850.rabi == 0.0) {
        r.gamma3 = 0.0;
    } else {
        model::SystemParams pd = p0;
        pd.l397.rabi = 0.0;
        const lindblad::DensityMatrix rho_seed =
            experiments::even_manifold_state(pd, model::Term::D32);
        const lindblad::Liouvillian liou = lindblad::assemble(
            model::build_hamiltonian(pd), model::build_collapse_ops(pd));

        const int n_t = 80;
        std::vector<double> times(n_t), nd(n_t);
        for (int i = 0; i < n_t; ++i) times[static_cast<std::size_t>(i)] = 2e-6 * i / (n_t - 1);
        lindblad::evolve_observe(
            rho_seed, liou, times, {},
            [&](std::size_t idx, double, const lindblad::DensityMatrix& rho) {
                nd[idx] = model::manifold_populations(
                    pd, rho.matrix())[static_cast<std::size_t>(model::Term::D32)];
            });
        const experiments::ExponentialFit fit = experiments::fit_exponential(times, nd);
        r.gamma3 = 1.0 / fit.tau;
    }

    // Cavity-enhanced shelving rate from the broadened tau_on, scaled by the
    // P fraction of the {S, P} pair.
    experiments::TransientSettings ts;
    const experiments::Transient transient = experiments::shelving_transient(p, true, ts);
    const double f_p = p_fraction_during_decay(p);
    if (!(f_p > 1e-9) || f_p > 0.9)
        throw AnalysisError("effective_rates_from_full: P fraction " + std::to_string(f_p) +
                            " outside the rate-equation regime");
    r.gamma2_prime = 1.0 / (transient.tau_fit * f_p);
    return r;
}

} // namespace ioncavity::eff3

#pragma once

#include <array>

#include "ioncavity/model.hpp"

namespace ioncavity::eff3 {

// Effective Lambda-scheme rates (all s^-1):
//   S --V--> P, P --gamma1--> S, P --gamma2(')--> D, D --gamma3--> S.
struct RateParams {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma2_prime = 0.0; // cavity-enhanced shelving rate
    double gamma3 = 0.0;       // effective repump rate D -> S
    double pump = 0.0;         // V
};

// Equilibrium of
//   dN_S/dt = -V N_S + (G1 + V) N_P + G3 N_D
//   dN_P/dt =  V N_S - (G1 + G2eff + V) N_P
//   dN_D/dt =  G2eff N_P - G3 N_D
// with G2eff = use_prime ? gamma2_prime : gamma2, normalized to sum 1.
// Throws AnalysisError when every rate is zero.
std::array<double, 3> steady_populations(const RateParams& r, bool use_prime);

// Closed-form normalized fluorescence
//   N'_P / N_P = 1 - (1 - v) / (1 + w (gamma1 + 2 pump) / pump)
// with v = gamma2/gamma2' and w = gamma3/gamma2'.  pump = 0 throws
// InputError (the expression divides by V).
double normalized_fluorescence_eq1(double v, double w, double gamma1, double pump);

// Extraction of effective rates from the full master-equation model:
//   gamma1, gamma2 copied from the configured decay rates;
//   V from the g_bar = 0 steady-state balance V N_S = (gamma1 + V) N_P;
//   gamma3 from an exponential fit to the D3/2 depletion of a short g_bar = 0
//     evolve seeded in D3/2 (0 when the repumpers are off);
//   gamma2_prime from the cavity-on shelving rate 1/tau_on divided by the
//     P-population fraction of the {S, P} pair during the decay.
RateParams effective_rates_from_full(const model::SystemParams& p);

} // namespace ioncavity::eff3

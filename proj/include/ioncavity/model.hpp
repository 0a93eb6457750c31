#pragma once

#include <array>
#include <complex>
#include <vector>

#include "ioncavity/qops.hpp"

namespace ioncavity::model {

using qops::Complex;
using qops::HilbertLayout;
using qops::QOperator;

// Fine-structure manifolds of the single valence electron, ordered by the
// internal basis layout.
enum class Term { S12 = 0, P12 = 1, D32 = 2, P32 = 3, D52 = 4 };

struct AtomicState {
    Term term;
    double j;
    double mj;
    double g_lande; // pure LS-coupling value
};

// The 18 Zeeman sublevels: S1/2 (2), P1/2 (2), D3/2 (4), P3/2 (4), D5/2 (6),
// each manifold ordered by increasing mj.
class AtomicBasis {
public:
    AtomicBasis();

    static constexpr int dim = 18;

    const AtomicState& state(int idx) const { return states_.at(static_cast<std::size_t>(idx)); }
    const std::array<AtomicState, dim>& states() const { return states_; }

    int index(Term term, double mj) const;     // throws InputError when absent
    int manifold_offset(Term term) const;
    int manifold_size(Term term) const;
    static double j_of(Term term);
    static double g_lande_of(Term term);

    // Projector onto one manifold, as an 18x18 operator.
    QOperator manifold_projector(Term term) const;

private:
    std::array<AtomicState, dim> states_;
};

// Zeeman shift (rad/s) of one sublevel: mj * g_lande * zeeman_unit * b_field.
// zeeman_unit is muB/hbar in rad/s per Tesla, b_field in Tesla.
double zeeman_shift(const AtomicState& state, double b_field, double zeeman_unit);

// Drive polarization in the spherical basis (sigma-, pi, sigma+) relative to
// the quantization axis.  Must have unit norm.
struct Polarization {
    Complex sigma_minus{0.0, 0.0};
    Complex pi{0.0, 0.0};
    Complex sigma_plus{0.0, 0.0};

    double norm() const;
    static Polarization pure_pi();
    static Polarization sigma_pm(); // (sigma+ + sigma-)/sqrt(2), linear orthogonal to axis
};

struct LaserParams {
    double rabi = 0.0;       // rad/s
    double detuning = 0.0;   // rad/s, positive = blue of the transition
    Polarization pol;
};

// How the Rabi frequency maps onto individual Zeeman lines:
//  Reduced  -- rabi multiplies the raw Clebsch-Gordan coefficient of each line;
//  Strongest -- coefficients are rescaled so the strongest line of the
//               transition couples at exactly `rabi`.
enum class RabiConvention { Reduced, Strongest };

struct DecayRates {
    double p12_s12 = 0.0; // rad/s, each the total rate of that manifold pair
    double p12_d32 = 0.0;
    double p32_s12 = 0.0;
    double p32_d32 = 0.0;
    double p32_d52 = 0.0;
};

struct SystemParams {
    LaserParams l397; // S1/2 <-> P1/2
    LaserParams l850; // D3/2 <-> P3/2
    LaserParams l854; // D5/2 <-> P3/2

    double g_bar = 0.0;       // rad/s, cavity coupling on D3/2 <-> P1/2
    double kappa = 0.0;       // rad/s, cavity field decay (HWHM)
    double delta_cav = 0.0;   // rad/s, cavity detuning from D3/2 <-> P1/2
    double sigma_inhom = 0.0; // rad/s, std of the Gaussian cavity-detuning spread

    double b_field = 0.0;     // Tesla, along the quantization axis
    double zeeman_unit = 0.0; // rad/s per Tesla (muB/hbar)

    DecayRates decay;
    RabiConvention rabi_convention = RabiConvention::Reduced;

    int fock_cutoff = 1;      // photons per mode, >= 1
    int cavity_modes = 2;     // 1: sigma+ only; 2: sigma+ and sigma-

    // Half the total P1/2 linewidth.
    double gamma_p12() const { return 0.5 * (decay.p12_s12 + decay.p12_d32); }
    // Single-ion cooperativity g^2 / (2 kappa gamma).
    double cooperativity() const;

    void validate() const; // throws ConfigError on inconsistent parameters
};

// The composite Hilbert space: atom (18) ⊗ one Fock factor per cavity mode.
HilbertLayout make_layout(const SystemParams& p);

// Raising operator of one dipole transition for spherical component q in
// {-1, 0, +1}: sum_m w(m, q) |upper, m+q><lower, m|, with w the (possibly
// convention-rescaled) Clebsch-Gordan coefficient, as an 18x18 operator.
QOperator transition_raising(const AtomicBasis& basis, Term lower, Term upper, int q,
                             RabiConvention convention);

// Rotating-frame Hamiltonian on the composite space (rad/s).
QOperator build_hamiltonian(const SystemParams& p);

// Collapse operators: one per (decay channel, spherical component) with raw
// Clebsch-Gordan weights, plus sqrt(2 kappa) a_k per cavity mode.  Channels
// with zero rate are omitted.
std::vector<QOperator> build_collapse_ops(const SystemParams& p);

// Rate observable for the 397 nm fluorescence: Gamma(P1/2->S1/2) P_P1/2, plus
// Gamma(P3/2->S1/2) P_P3/2 when include_393 is set.
QOperator uv_fluorescence_observable(const SystemParams& p, bool include_393);

// Rate observable for light leaving the cavity: sum_k 2 kappa a_k^dag a_k.
QOperator cavity_emission_observable(const SystemParams& p);

// Manifold populations from a composite-space density matrix, ordered
// {S12, P12, D32, P32, D52}.
std::array<double, 5> manifold_populations(const SystemParams& p,
                                           const qops::DenseCd& rho);

} // namespace ioncavity::model

#include "ioncavity/model.hpp"

#include <cmath>
#include <string>

namespace ioncavity::model {

namespace {

struct ManifoldInfo {
    Term term;
    double j;
    double g_lande;
    int offset;
};

constexpr std::array<ManifoldInfo, 5> manifolds = {{
    {Term::S12, 0.5, 2.0, 0},
    {Term::P12, 0.5, 2.0 / 3.0, 2},
    {Term::D32, 1.5, 4.0 / 5.0, 4},
    {Term::P32, 1.5, 4.0 / 3.0, 8},
    {Term::D52, 2.5, 6.0 / 5.0, 12},
}};

const ManifoldInfo& info_of(Term term) {
    return manifolds[static_cast<std::size_t>(term)];
}

} // namespace

AtomicBasis::AtomicBasis() {
    int idx = 0;
    for (const auto& m : manifolds) {
        const int mult = static_cast<int>(2.0 * m.j) + 1;
        for (int k = 0; k < mult; ++k) {
            states_[static_cast<std::size_t>(idx)] =
                AtomicState{m.term, m.j, -m.j + k, m.g_lande};
            ++idx;
        }
    }
}

int AtomicBasis::index(Term term, double mj) const {
    const auto& m = info_of(term);
    const double pos = mj + m.j;
    const double rounded = std::round(pos);
    if (std::abs(pos - rounded) > 1e-9 || rounded < 0 || rounded > 2.0 * m.j)
        throw InputError("AtomicBasis::index: no sublevel mj = " + std::to_string(mj));
    return m.offset + static_cast<int>(rounded);
}

int AtomicBasis::manifold_offset(Term term) const { return info_of(term).offset; }

int AtomicBasis::manifold_size(Term term) const {
    return static_cast<int>(2.0 * info_of(term).j) + 1;
}

double AtomicBasis::j_of(Term term) { return info_of(term).j; }

double AtomicBasis::g_lande_of(Term term) { return info_of(term).g_lande; }

QOperator AtomicBasis::manifold_projector(Term term) const {
    QOperator proj = QOperator::zero(dim);
    const int off = manifold_offset(term);
    for (int k = 0; k < manifold_size(term); ++k)
        proj += QOperator::ket_bra(dim, off + k, off + k);
    return proj;
}

double zeeman_shift(const AtomicState& state, double b_field, double zeeman_unit) {
    return state.mj * state.g_lande * zeeman_unit * b_field;
}

double Polarization::norm() const {
    return std::sqrt(std::norm(sigma_minus) + std::norm(pi) + std::norm(sigma_plus));
}

Polarization Polarization::pure_pi() {
    Polarization p;
    p.pi = Complex(1.0, 0.0);
    return p;
}

Polarization Polarization::sigma_pm() {
    Polarization p;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    p.sigma_minus = Complex(inv_sqrt2, 0.0);
    p.sigma_plus = Complex(inv_sqrt2, 0.0);
    return p;
}

double SystemParams::cooperativity() const {
    const double gamma = gamma_p12();
    if (kappa <= 0.0 || gamma <= 0.0)
        throw InputError("cooperativity: requires kappa > 0 and a P1/2 linewidth > 0");
    return g_bar * g_bar / (2.0 * kappa * gamma);
}

void SystemParams::validate() const {
    if (fock_cutoff < 1) throw ConfigError("fock_cutoff must be >= 1");
    if (cavity_modes != 1 && cavity_modes != 2)
        throw ConfigError("cavity_modes must be 1 or 2");
    if (kappa < 0.0) throw ConfigError("kappa must be >= 0");
    if (g_bar < 0.0) throw ConfigError("g_bar must be >= 0");
    if (sigma_inhom < 0.0) throw ConfigError("sigma_inhom must be >= 0");
    if (decay.p12_s12 < 0.0 || decay.p12_d32 < 0.0 || decay.p32_s12 < 0.0 ||
        decay.p32_d32 < 0.0 || decay.p32_d52 < 0.0)
        throw ConfigError("decay rates must be >= 0");
    for (const LaserParams* l : {&l397, &l850, &l854}) {
        if (l->rabi < 0.0) throw ConfigError("Rabi frequencies must be >= 0");
        if (l->rabi > 0.0 && std::abs(l->pol.norm() - 1.0) > 1e-9)
            throw ConfigError("laser polarization must be a unit vector");
    }
    if (g_bar > 0.0 && kappa == 0.0)
        throw ConfigError("a coupled cavity (g_bar > 0) requires kappa > 0");
}

HilbertLayout make_layout(const SystemParams& p) {
    p.validate();
    std::vector<int> mode_dims(static_cast<std::size_t>(p.cavity_modes),
                               p.fock_cutoff + 1);
    return HilbertLayout(AtomicBasis::dim, std::move(mode_dims));
}

namespace {

// Largest |Clebsch-Gordan| over all lines of a dipole transition.
double strongest_line(const AtomicBasis& basis, Term lower, Term upper) {
    const double jl = AtomicBasis::j_of(lower);
    const double ju = AtomicBasis::j_of(upper);
    double best = 0.0;
    for (int q = -1; q <= 1; ++q)
        for (int k = 0; k < basis.manifold_size(lower); ++k) {
            const double ml = -jl + k;
            const double mu = ml + q;
            if (std::abs(mu) > ju + 1e-9) continue;
            best = std::max(best, std::abs(qops::clebsch_gordan(jl, ml, 1.0, q, ju, mu)));
        }
    return best;
}

} // namespace

QOperator transition_raising(const AtomicBasis& basis, Term lower, Term upper, int q,
                             RabiConvention convention) {
    if (q < -1 || q > 1) throw InputError("transition_raising: q must be -1, 0 or +1");
    const double jl = AtomicBasis::j_of(lower);
    const double ju = AtomicBasis::j_of(upper);
    double scale = 1.0;
    if (convention == RabiConvention::Strongest) {
        const double strongest = strongest_line(basis, lower, upper);
        if (strongest > 0.0) scale = 1.0 / strongest;
    }

    QOperator op = QOperator::zero(AtomicBasis::dim);
    for (int k = 0; k < basis.manifold_size(lower); ++k) {
        const double ml = -jl + k;
        const double mu = ml + q;
        if (std::abs(mu) > ju + 1e-9) continue;
        const double cg = qops::clebsch_gordan(jl, ml, 1.0, q, ju, mu);
        if (cg == 0.0) continue;
        op += QOperator::ket_bra(AtomicBasis::dim, basis.index(upper, mu),
                                 basis.index(lower, ml), Complex(scale * cg, 0.0));
    }
    return op;
}

namespace {

// Rotating-frame manifold offsets: the frame co-rotates with each drive, so
// every driven upper manifold carries -delta of its drive, chained along the
// 397 -> 850 -> 854 ladder.  D3/2 shares the P1/2 offset, which puts the
// cavity detuning entirely on the photon number term.
double frame_offset(Term term, const SystemParams& p) {
    switch (term) {
        case Term::S12: return 0.0;
        case Term::P12: return -p.l397.detuning;
        case Term::D32: return -p.l397.detuning;
        case Term::P32: return -p.l397.detuning - p.l850.detuning;
        case Term::D52: return -p.l397.detuning - p.l850.detuning + p.l854.detuning;
    }
    throw InputError("frame_offset: unknown manifold");
}

// (Omega/2) sum_q eps_q A_q + h.c. on the atomic space.
QOperator drive_term(const AtomicBasis& basis, Term lower, Term upper,
                     const LaserParams& laser, RabiConvention convention) {
    QOperator drive = QOperator::zero(AtomicBasis::dim);
    if (laser.rabi == 0.0) return drive;
    const std::array<Complex, 3> eps = {laser.pol.sigma_minus, laser.pol.pi,
                                        laser.pol.sigma_plus};
    for (int q = -1; q <= 1; ++q) {
        const Complex amp = 0.5 * laser.rabi * eps[static_cast<std::size_t>(q + 1)];
        if (amp == Complex(0.0, 0.0)) continue;
        QOperator raise = transition_raising(basis, lower, upper, q, convention);
        drive += amp * raise + std::conj(amp) * raise.dagger();
    }
    return drive;
}

// Mode 0 couples on sigma+, mode 1 (when present) on sigma-.
int mode_polarization(std::size_t mode) { return mode == 0 ? +1 : -1; }

} // namespace

QOperator build_hamiltonian(const SystemParams& p) {
    const HilbertLayout layout = make_layout(p);
    const AtomicBasis basis;

    QOperator h_atom = QOperator::zero(AtomicBasis::dim);
    for (int idx = 0; idx < AtomicBasis::dim; ++idx) {
        const AtomicState& st = basis.state(idx);
        const double diag = frame_offset(st.term, p) +
                            zeeman_shift(st, p.b_field, p.zeeman_unit);
        if (diag != 0.0)
            h_atom += QOperator::ket_bra(AtomicBasis::dim, idx, idx, Complex(diag, 0.0));
    }
    h_atom += drive_term(basis, Term::S12, Term::P12, p.l397, p.rabi_convention);
    h_atom += drive_term(basis, Term::D32, Term::P32, p.l850, p.rabi_convention);
    h_atom += drive_term(basis, Term::D52, Term::P32, p.l854, p.rabi_convention);

    QOperator h = layout.lift_atom(h_atom);

    const QOperator a_single = QOperator::annihilator(p.fock_cutoff);
    const QOperator num_single = a_single.dagger() * a_single;
    for (std::size_t mode = 0; mode < static_cast<std::size_t>(p.cavity_modes); ++mode) {
        if (p.delta_cav != 0.0)
            h += Complex(p.delta_cav, 0.0) * layout.lift_mode(mode, num_single);
        if (p.g_bar > 0.0) {
            // Cavity always couples with raw Clebsch-Gordan weights; g_bar is
            // a line-averaged coupling, not a per-line drive strength.
            QOperator raise = transition_raising(basis, Term::D32, Term::P12,
                                                 mode_polarization(mode),
                                                 RabiConvention::Reduced);
            QOperator term = layout.lift_atom(raise) * layout.lift_mode(mode, a_single);
            h += Complex(p.g_bar, 0.0) * (term + term.dagger());
        }
    }
    return h;
}

std::vector<QOperator> build_collapse_ops(const SystemParams& p) {
    const HilbertLayout layout = make_layout(p);
    const AtomicBasis basis;
    std::vector<QOperator> ops;

    struct Channel {
        Term upper;
        Term lower;
        double rate;
    };
    const std::array<Channel, 5> channels = {{
        {Term::P12, Term::S12, p.decay.p12_s12},
        {Term::P12, Term::D32, p.decay.p12_d32},
        {Term::P32, Term::S12, p.decay.p32_s12},
        {Term::P32, Term::D32, p.decay.p32_d32},
        {Term::P32, Term::D52, p.decay.p32_d52},
    }};

    for (const Channel& ch : channels) {
        if (ch.rate <= 0.0) continue;
        for (int q = -1; q <= 1; ++q) {
            // Lowering with raw weights: sum_m cg |lower, m><upper, m+q|.
            QOperator raise =
                transition_raising(basis, ch.lower, ch.upper, q, RabiConvention::Reduced);
            QOperator lower_op = raise.dagger();
            if (lower_op.non_zeros() == 0) continue;
            ops.push_back(std::sqrt(ch.rate) * layout.lift_atom(lower_op));
        }
    }

    if (p.kappa > 0.0) {
        const QOperator a_single = QOperator::annihilator(p.fock_cutoff);
        for (std::size_t mode = 0; mode < static_cast<std::size_t>(p.cavity_modes); ++mode)
            ops.push_back(std::sqrt(2.0 * p.kappa) * layout.lift_mode(mode, a_single));
    }
    return ops;
}

QOperator uv_fluorescence_observable(const SystemParams& p, bool include_393) {
    const HilbertLayout layout = make_layout(p);
    const AtomicBasis basis;
    QOperator obs = Complex(p.decay.p12_s12, 0.0) * basis.manifold_projector(Term::P12);
    if (include_393)
        obs += Complex(p.decay.p32_s12, 0.0) * basis.manifold_projector(Term::P32);
    return layout.lift_atom(obs);
}

QOperator cavity_emission_observable(const SystemParams& p) {
    const HilbertLayout layout = make_layout(p);
    const QOperator a_single = QOperator::annihilator(p.fock_cutoff);
    const QOperator num_single = a_single.dagger() * a_single;
    QOperator obs = QOperator::zero(layout.dim());
    for (std::size_t mode = 0; mode < static_cast<std::size_t>(p.cavity_modes); ++mode)
        obs += Complex(2.0 * p.kappa, 0.0) * layout.lift_mode(mode, num_single);
    return obs;
}

std::array<double, 5> manifold_populations(const SystemParams& p, const qops::DenseCd& rho) {
    const HilbertLayout layout = make_layout(p);
    if (rho.rows() != layout.dim() || rho.cols() != layout.dim())
        throw InputError("manifold_populations: density matrix dimension mismatch");
    const AtomicBasis basis;
    Eigen::Index mode_dim = 1;
    for (int md : layout.mode_dims()) mode_dim *= md;

    std::array<double, 5> pops{};
    for (int idx = 0; idx < AtomicBasis::dim; ++idx) {
        const auto term_idx = static_cast<std::size_t>(basis.state(idx).term);
        for (Eigen::Index ph = 0; ph < mode_dim; ++ph) {
            const Eigen::Index flat = static_cast<Eigen::Index>(idx) * mode_dim + ph;
            pops[term_idx] += rho(flat, flat).real();
        }
    }
    return pops;
}

} // namespace ioncavity::model

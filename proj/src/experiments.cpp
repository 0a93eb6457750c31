#include "ioncavity/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ioncavity/threading.hpp"

namespace ioncavity::experiments {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw InputError("linspace: need at least one point");
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double step = (hi - lo) / double(n - 1);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
    out.back() = hi;
    return out;
}

lindblad::Liouvillian assemble_for(const model::SystemParams& p) {
    return lindblad::assemble(model::build_hamiltonian(p), model::build_collapse_ops(p));
}

lindblad::DensityMatrix steady_for(const model::SystemParams& p) {
    return lindblad::steady_state(assemble_for(p));
}

model::SystemParams repumpers_off(const model::SystemParams& p) {
    model::SystemParams off = p;
    off.l850.rabi = 0.0;
    off.l854.rabi = 0.0;
    return off;
}

// With either repumper absent a metastable D manifold is absorbing and the
// driven steady state degenerates to a dark mixture; seed from an even S1/2
// mixture settled into the driven S/P balance so the recorded trace decays.
lindblad::DensityMatrix transient_seed(const model::SystemParams& p) {
    if (p.l850.rabi == 0.0 || p.l854.rabi == 0.0) {
        lindblad::EvolveOptions opts;
        opts.abs_tol = 1e-8;
        return lindblad::evolve(even_manifold_state(p, model::Term::S12),
                                assemble_for(repumpers_off(p)), {0.0, 3e-7}, opts)
            .back();
    }
    return steady_for(p);
}

// UV-rate trace of the switch-off transient at one absolute cavity detuning.
std::vector<double> transient_trace(const model::SystemParams& p_shifted,
                                    const std::vector<double>& times,
                                    const qops::QOperator& uv_obs, double rel_tol) {
    const lindblad::DensityMatrix rho0 = transient_seed(p_shifted);
    const lindblad::Liouvillian liou = assemble_for(repumpers_off(p_shifted));
    lindblad::EvolveOptions opts;
    opts.rel_tol = rel_tol;
    // The fitted observable is a rate of order 1e8 s^-1; density-matrix
    // components below 1e-8 cannot move the fit.
    opts.abs_tol = 1e-8;
    std::vector<double> rate(times.size(), 0.0);
    lindblad::evolve_observe(rho0, liou, times, opts,
                             [&](std::size_t idx, double, const lindblad::DensityMatrix& rho) {
                                 rate[idx] = lindblad::expect_real(uv_obs, rho);
                             });
    return rate;
}

// Gaussian average of a vector-valued model over detuning shifts, evaluated
// in parallel over quadrature nodes and reduced in node order.
std::vector<double> gauss_average_parallel(
    const std::function<std::vector<double>(double)>& eval, double sigma, int nodes,
    int threads) {
    if (sigma <= 0.0) return eval(0.0);
    const GaussHermite gh = gauss_hermite(nodes);
    std::vector<std::vector<double>> samples(gh.nodes.size());
    threading::parallel_for(gh.nodes.size(), threads, [&](std::size_t k) {
        samples[k] = eval(std::sqrt(2.0) * sigma * gh.nodes[k]);
    });
    std::vector<double> acc(samples[0].size(), 0.0);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (samples[k].size() != acc.size())
            throw AnalysisError("gauss_average: inconsistent sample lengths");
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += gh.weights[k] * samples[k][i];
    }
    return acc;
}

// Exponential fit over the leading window [0, factor * initial tau estimate].
ExponentialFit windowed_exponential_fit(const std::vector<double>& times,
                                        const std::vector<double>& rate,
                                        double window_tau_factor,
                                        std::size_t* window_points_out) {
    double tau0 = initial_tau_estimate(times, rate);
    if (!(tau0 > 0.0)) tau0 = (times.back() - times.front()) / 5.0;
    const double t_window = std::min(times.back(), window_tau_factor * tau0);
    std::size_t n_window = 0;
    while (n_window < times.size() && times[n_window] <= t_window) ++n_window;
    n_window = std::max<std::size_t>(n_window, 8);
    n_window = std::min(n_window, times.size());
    if (window_points_out) *window_points_out = n_window;
    const std::vector<double> tw(times.begin(), times.begin() + static_cast<long>(n_window));
    const std::vector<double> rw(rate.begin(), rate.begin() + static_cast<long>(n_window));
    return fit_exponential(tw, rw);
}

} // namespace

lindblad::DensityMatrix even_manifold_state(const model::SystemParams& p, model::Term term) {
    const qops::HilbertLayout layout = model::make_layout(p);
    const model::AtomicBasis basis;
    Eigen::Index mode_dim = 1;
    for (int md : layout.mode_dims()) mode_dim *= md;
    const int off = basis.manifold_offset(term);
    const int size = basis.manifold_size(term);
    qops::DenseCd rho = qops::DenseCd::Zero(layout.dim(), layout.dim());
    for (int k = 0; k < size; ++k) {
        const Eigen::Index flat = static_cast<Eigen::Index>(off + k) * mode_dim;
        rho(flat, flat) = 1.0 / double(size);
    }
    return lindblad::DensityMatrix{std::move(rho)};
}

Transient shelving_transient(const model::SystemParams& p, bool cavity_on,
                             const TransientSettings& s) {
    p.validate();
    if (s.samples < 8) throw InputError("shelving_transient: need at least 8 samples");
    model::SystemParams base = p;
    if (!cavity_on) base.g_bar = 0.0;

    const std::vector<double> times = linspace(0.0, s.t_max, s.samples);
    const qops::QOperator uv_obs = model::uv_fluorescence_observable(base, s.include_393);

    auto eval = [&](double shift) {
        model::SystemParams shifted = base;
        shifted.delta_cav += shift;
        return transient_trace(shifted, times, uv_obs, s.rel_tol);
    };

    const bool averaged = cavity_on && s.broaden_transient && base.sigma_inhom > 0.0;
    Transient out;
    out.times = times;
    out.rate = averaged ? gauss_average_parallel(eval, base.sigma_inhom, s.gh_nodes, s.threads)
                        : eval(0.0);

    out.fit = windowed_exponential_fit(times, out.rate, s.window_tau_factor,
                                       &out.window_points);
    out.tau_fit = out.fit.tau;
    out.tau_stderr = out.fit.tau_err;
    return out;
}

double calibrate_omega397(const model::SystemParams& p, double tau_off_target,
                          const TransientSettings& s) {
    if (!(tau_off_target > 0.0))
        throw InputError("calibrate_omega397: target time constant must be positive");

    auto tau_of = [&](double omega) {
        model::SystemParams trial = p;
        trial.l397.rabi = omega;
        return shelving_transient(trial, false, s).tau_fit;
    };

    double omega_mid = p.l397.rabi > 0.0 ? p.l397.rabi : two_pi * 18e6;
    double om_lo = 0.5 * omega_mid; // tau decreases with omega: lo -> long tau
    double om_hi = 2.0 * omega_mid;
    double tau_lo = tau_of(om_lo);
    double tau_hi = tau_of(om_hi);

    for (int tries = 0; tau_lo < tau_off_target && tries < 6; ++tries)
        tau_lo = tau_of(om_lo *= 0.5);
    for (int tries = 0; tau_hi > tau_off_target && tries < 6; ++tries)
        tau_hi = tau_of(om_hi *= 2.0);
    if (tau_lo < tau_off_target || tau_hi > tau_off_target)
        throw AnalysisError("calibrate_omega397: target " + std::to_string(tau_off_target) +
                            " s not bracketed; the decay-time range reachable by the 397 nm "
                            "power does not contain it");

    // Secant iteration in log-log (tau(omega) is close to a power law), with
    // bisection safeguarding.
    double la = std::log(om_lo), fa = std::log(tau_lo / tau_off_target);
    double lb = std::log(om_hi), fb = std::log(tau_hi / tau_off_target);
    for (int iter = 0; iter < 60; ++iter) {
        double lm = (std::abs(fb - fa) > 1e-14) ? la - fa * (lb - la) / (fb - fa)
                                                : 0.5 * (la + lb);
        if (!(lm > std::min(la, lb) && lm < std::max(la, lb))) lm = 0.5 * (la + lb);
        const double om = std::exp(lm);
        const double tau = tau_of(om);
        if (std::abs(tau - tau_off_target) <= 0.005 * tau_off_target) return om;
        const double fm = std::log(tau / tau_off_target);
        if ((fm > 0.0) == (fa > 0.0)) {
            la = lm;
            fa = fm;
        } else {
            lb = lm;
            fb = fm;
        }
    }
    throw AnalysisError("calibrate_omega397: root refinement did not converge to 0.5%");
}

namespace {

struct ScanColumns {
    std::vector<double> detunings; // absolute
    std::vector<double> cavity;
    std::vector<double> uv_with_393;    // normalized
    std::vector<double> uv_without_393; // normalized
    double sigma = 0.0;
};

// Steady-state observables, Gaussian-averaged per grid point, plus the
// far-detuned UV baselines used for normalization.
ScanColumns scan_columns(const model::SystemParams& p, const std::vector<double>& detunings,
                         double baseline_offset, int gh_nodes, int threads) {
    p.validate();
    if (detunings.empty()) throw InputError("cavity_scan: empty detuning grid");

    const qops::QOperator cav_obs = model::cavity_emission_observable(p);
    const qops::QOperator uv_incl = model::uv_fluorescence_observable(p, true);
    const qops::QOperator uv_excl = model::uv_fluorescence_observable(p, false);

    const double raman = p.l397.detuning;
    const double baseline_det = raman + baseline_offset;

    std::vector<double> abs_dets = detunings;
    abs_dets.push_back(baseline_det); // last entry: normalization reference

    GaussHermite gh;
    if (p.sigma_inhom > 0.0) {
        gh = gauss_hermite(gh_nodes);
    } else {
        gh.nodes = {0.0};
        gh.weights = {1.0};
    }
    const std::size_t n_pts = abs_dets.size();
    const std::size_t n_nodes = gh.nodes.size();

    std::vector<std::array<double, 3>> raw(n_pts * n_nodes);
    threading::parallel_for(n_pts * n_nodes, threads, [&](std::size_t task) {
        const std::size_t ip = task / n_nodes;
        const std::size_t ik = task % n_nodes;
        model::SystemParams pp = p;
        pp.delta_cav = abs_dets[ip] + std::sqrt(2.0) * p.sigma_inhom * gh.nodes[ik];
        try {
            const lindblad::DensityMatrix rho = steady_for(pp);
            raw[task] = {lindblad::expect_real(cav_obs, rho),
                         lindblad::expect_real(uv_incl, rho),
                         lindblad::expect_real(uv_excl, rho)};
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " [scan grid point " +
                              std::to_string(ip) + ", delta_cav/2pi = " +
                              std::to_string(pp.delta_cav / two_pi / 1e6) + " MHz]");
        }
    });

    auto averaged = [&](std::size_t ip, int col) {
        double acc = 0.0;
        for (std::size_t ik = 0; ik < n_nodes; ++ik)
            acc += gh.weights[ik] * raw[ip * n_nodes + ik][static_cast<std::size_t>(col)];
        return acc;
    };

    const double base_incl = averaged(n_pts - 1, 1);
    const double base_excl = averaged(n_pts - 1, 2);
    if (!(base_incl > 0.0) || !(base_excl > 0.0))
        throw AnalysisError("cavity_scan: far-detuned UV baseline vanished; cannot normalize");

    ScanColumns out;
    out.detunings = detunings;
    out.sigma = p.sigma_inhom;
    out.cavity.resize(detunings.size());
    out.uv_with_393.resize(detunings.size());
    out.uv_without_393.resize(detunings.size());
    for (std::size_t ip = 0; ip < detunings.size(); ++ip) {
        out.cavity[ip] = averaged(ip, 0);
        out.uv_with_393[ip] = averaged(ip, 1) / base_incl;
        out.uv_without_393[ip] = averaged(ip, 2) / base_excl;
    }
    return out;
}

double default_baseline(double requested) {
    return requested > 0.0 ? requested : two_pi * 80e6;
}

} // namespace

std::pair<Spectrum, Spectrum> cavity_scan(const model::SystemParams& p,
                                          const std::vector<double>& detunings,
                                          const ScanSettings& s) {
    const ScanColumns cols = scan_columns(p, detunings, default_baseline(s.baseline_offset),
                                          s.gh_nodes, s.threads);
    Spectrum cavity;
    cavity.detunings = cols.detunings;
    cavity.values = cols.cavity;
    cavity.kind = SpectrumKind::CavityEmission;
    cavity.sigma_applied = cols.sigma;

    Spectrum uv;
    uv.detunings = cols.detunings;
    uv.values = s.include_393 ? cols.uv_with_393 : cols.uv_without_393;
    uv.kind = SpectrumKind::UvFluorescenceNormalized;
    uv.sigma_applied = cols.sigma;
    return {cavity, uv};
}

Spectrum broaden(const Spectrum& s, double sigma, const std::function<double(double)>& eval,
                 int nodes) {
    if (sigma < 0.0) throw InputError("broaden: sigma must be >= 0");
    Spectrum out = s;
    out.sigma_applied = sigma;
    if (sigma == 0.0) return out;
    const GaussHermite gh = gauss_hermite(nodes);
    for (std::size_t i = 0; i < out.detunings.size(); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < gh.nodes.size(); ++k)
            acc += gh.weights[k] * eval(out.detunings[i] + std::sqrt(2.0) * sigma * gh.nodes[k]);
        out.values[i] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Inversion

namespace {

// Catmull-Rom interpolation on a uniform grid; clamps to the boundary cells.
double cubic_interp_uniform(double x0, double dx, const std::vector<double>& y, double x) {
    const int n = static_cast<int>(y.size());
    if (n == 0) throw InputError("cubic_interp: empty table");
    if (n == 1) return y[0];
    double u = (x - x0) / dx;
    u = std::clamp(u, 0.0, double(n - 1));
    int i = std::clamp(static_cast<int>(std::floor(u)), 0, n - 2);
    const double t = u - i;

    const auto at = [&](int k) { return y[static_cast<std::size_t>(std::clamp(k, 0, n - 1))]; };
    const double ym1 = at(i - 1), y0v = at(i), y1 = at(i + 1), y2 = at(i + 2);
    const double a = -0.5 * ym1 + 1.5 * y0v - 1.5 * y1 + 0.5 * y2;
    const double b = ym1 - 2.5 * y0v + 2.0 * y1 - 0.5 * y2;
    const double c = -0.5 * ym1 + 0.5 * y1;
    return ((a * t + b) * t + c) * t + y0v;
}

struct MarchSegment {
    // Endpoints in fractional grid-index coordinates (gi, si).
    double g0, s0, g1, s1;
};

// Marching squares of map = level on a structured grid; map[ig][is].
std::vector<MarchSegment> level_segments(const std::vector<std::vector<double>>& map,
                                         double level) {
    const int ng = static_cast<int>(map.size());
    const int ns = ng > 0 ? static_cast<int>(map[0].size()) : 0;
    std::vector<MarchSegment> segs;

    auto edge_point = [&](double fa, double fb, double a_g, double a_s, double b_g,
                          double b_s, double& pg, double& ps) {
        const double t = (level - fa) / (fb - fa);
        pg = a_g + t * (b_g - a_g);
        ps = a_s + t * (b_s - a_s);
    };

    for (int ig = 0; ig + 1 < ng; ++ig)
        for (int is = 0; is + 1 < ns; ++is) {
            const double f00 = map[ig][is];         // corner (ig, is)
            const double f10 = map[ig + 1][is];     // (ig+1, is)
            const double f01 = map[ig][is + 1];     // (ig, is+1)
            const double f11 = map[ig + 1][is + 1]; // (ig+1, is+1)
            if (!std::isfinite(f00) || !std::isfinite(f10) || !std::isfinite(f01) ||
                !std::isfinite(f11))
                continue;

            int mask = 0;
            if (f00 > level) mask |= 1;
            if (f10 > level) mask |= 2;
            if (f11 > level) mask |= 4;
            if (f01 > level) mask |= 8;
            if (mask == 0 || mask == 15) continue;

            // Crossing points on the four cell edges.
            double eg[4], es[4];
            bool have[4] = {false, false, false, false};
            if ((mask & 1) != (mask & 2) >> 1) { // bottom: (ig,is)-(ig+1,is)
                edge_point(f00, f10, ig, is, ig + 1, is, eg[0], es[0]);
                have[0] = true;
            }
            if (((mask & 2) >> 1) != ((mask & 4) >> 2)) { // right: (ig+1,is)-(ig+1,is+1)
                edge_point(f10, f11, ig + 1, is, ig + 1, is + 1, eg[1], es[1]);
                have[1] = true;
            }
            if (((mask & 8) >> 3) != ((mask & 4) >> 2)) { // top: (ig,is+1)-(ig+1,is+1)
                edge_point(f01, f11, ig, is + 1, ig + 1, is + 1, eg[2], es[2]);
                have[2] = true;
            }
            if ((mask & 1) != ((mask & 8) >> 3)) { // left: (ig,is)-(ig,is+1)
                edge_point(f00, f01, ig, is, ig, is + 1, eg[3], es[3]);
                have[3] = true;
            }

            int pts[4], n_pts = 0;
            for (int e = 0; e < 4; ++e)
                if (have[e]) pts[n_pts++] = e;

            if (n_pts == 2) {
                segs.push_back({eg[pts[0]], es[pts[0]], eg[pts[1]], es[pts[1]]});
            } else if (n_pts == 4) {
                // Saddle: disambiguate with the cell-center value.
                const double center = 0.25 * (f00 + f10 + f01 + f11);
                if ((center > level) == ((mask & 1) != 0)) {
                    segs.push_back({eg[0], es[0], eg[1], es[1]});
                    segs.push_back({eg[2], es[2], eg[3], es[3]});
                } else {
                    segs.push_back({eg[0], es[0], eg[3], es[3]});
                    segs.push_back({eg[1], es[1], eg[2], es[2]});
                }
            }
        }
    return segs;
}

// 2D segment intersection in index coordinates; returns true and the point
// when the closed segments cross.
bool segments_cross(const MarchSegment& a, const MarchSegment& b, double& g, double& s) {
    const double r_g = a.g1 - a.g0, r_s = a.s1 - a.s0;
    const double q_g = b.g1 - b.g0, q_s = b.s1 - b.s0;
    const double denom = r_g * q_s - r_s * q_g;
    if (std::abs(denom) < 1e-14) return false;
    const double dg = b.g0 - a.g0, ds = b.s0 - a.s0;
    const double t = (dg * q_s - ds * q_g) / denom;
    const double u = (dg * r_s - ds * r_g) / denom;
    if (t < -1e-9 || t > 1.0 + 1e-9 || u < -1e-9 || u > 1.0 + 1e-9) return false;
    g = a.g0 + t * r_g;
    s = a.s0 + t * r_s;
    return true;
}

std::vector<ContourPoint> to_physical(const std::vector<MarchSegment>& segs,
                                      const std::vector<double>& g_values,
                                      const std::vector<double>& s_values) {
    auto phys = [](const std::vector<double>& axis, double idx) {
        if (axis.size() == 1) return axis[0];
        const double step = (axis.back() - axis.front()) / double(axis.size() - 1);
        return axis.front() + idx * step;
    };
    // Chain segments greedily into an ordered polyline where possible.
    std::vector<ContourPoint> out;
    std::vector<bool> used(segs.size(), false);
    auto close = [](double ag, double as, double bg, double bs) {
        return std::abs(ag - bg) < 1e-9 && std::abs(as - bs) < 1e-9;
    };
    for (std::size_t seed = 0; seed < segs.size(); ++seed) {
        if (used[seed]) continue;
        std::vector<std::array<double, 2>> chain = {{segs[seed].g0, segs[seed].s0},
                                                    {segs[seed].g1, segs[seed].s1}};
        used[seed] = true;
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::size_t k = 0; k < segs.size(); ++k) {
                if (used[k]) continue;
                auto& back = chain.back();
                auto& front = chain.front();
                if (close(back[0], back[1], segs[k].g0, segs[k].s0)) {
                    chain.push_back({segs[k].g1, segs[k].s1});
                } else if (close(back[0], back[1], segs[k].g1, segs[k].s1)) {
                    chain.push_back({segs[k].g0, segs[k].s0});
                } else if (close(front[0], front[1], segs[k].g1, segs[k].s1)) {
                    chain.insert(chain.begin(), {segs[k].g0, segs[k].s0});
                } else if (close(front[0], front[1], segs[k].g0, segs[k].s0)) {
                    chain.insert(chain.begin(), {segs[k].g1, segs[k].s1});
                } else {
                    continue;
                }
                used[k] = true;
                grew = true;
            }
        }
        for (const auto& pt : chain)
            out.push_back({phys(g_values, pt[0]), phys(s_values, pt[1])});
    }
    return out;
}

double point_to_segments_distance(double g, double s, const std::vector<MarchSegment>& segs) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& seg : segs) {
        const double vg = seg.g1 - seg.g0, vs = seg.s1 - seg.s0;
        const double len2 = vg * vg + vs * vs;
        double t = 0.0;
        if (len2 > 0.0) t = std::clamp(((g - seg.g0) * vg + (s - seg.s0) * vs) / len2, 0.0, 1.0);
        const double dg = g - (seg.g0 + t * vg), ds = s - (seg.s0 + t * vs);
        best = std::min(best, std::hypot(dg, ds));
    }
    return best;
}

struct CrossResult {
    bool found = false;
    double g_idx = 0.0, s_idx = 0.0;
};

CrossResult find_crossing(const std::vector<MarchSegment>& tau_segs,
                          const std::vector<MarchSegment>& delta_segs) {
    CrossResult best;
    for (const auto& a : tau_segs)
        for (const auto& b : delta_segs) {
            double g, s;
            if (segments_cross(a, b, g, s)) {
                best.found = true;
                best.g_idx = g;
                best.s_idx = s;
                return best;
            }
        }
    return best;
}

InversionSettings resolve_inversion_settings(const InversionSettings& s, double sigma_max) {
    InversionSettings r = s;
    if (r.scan_halfspan <= 0.0) r.scan_halfspan = two_pi * 25e6;
    if (r.dense_step <= 0.0) r.dense_step = two_pi * 1e6;
    if (r.offset_points % 2 == 0) ++r.offset_points;
    if (r.offset_halfspan <= 0.0) {
        const GaussHermite gh = gauss_hermite(r.gh_nodes);
        const double x_max = std::abs(gh.nodes.back());
        r.offset_halfspan = std::max(std::sqrt(2.0) * sigma_max * x_max * 1.001, two_pi * 1e6);
    }
    return r;
}

} // namespace

InversionMaps compute_inversion_maps(const model::SystemParams& p, const InversionGrid& grid,
                                     const InversionSettings& s_in) {
    p.validate();
    if (grid.g_points < 2 || grid.sigma_points < 2)
        throw InputError("inversion grid needs at least 2 points per axis");
    if (!(grid.g_max > grid.g_min) || !(grid.sigma_max >= grid.sigma_min))
        throw InputError("inversion grid ranges are empty");

    const InversionSettings s = resolve_inversion_settings(s_in, grid.sigma_max);

    InversionMaps maps;
    maps.g_values = linspace(grid.g_min, grid.g_max, grid.g_points);
    maps.sigma_values = linspace(grid.sigma_min, grid.sigma_max, grid.sigma_points);
    maps.tau.assign(maps.g_values.size(),
                    std::vector<double>(maps.sigma_values.size(), 0.0));
    maps.delta.assign(maps.g_values.size(),
                      std::vector<double>(maps.sigma_values.size(), 0.0));

    const std::vector<double> times = linspace(0.0, s.t_max, s.samples);
    const std::vector<double> offsets =
        linspace(-s.offset_halfspan, s.offset_halfspan, s.offset_points);

    const double raman = p.l397.detuning;
    const double dense_halfspan = s.scan_halfspan + s.offset_halfspan + s.dense_step;
    const int dense_points = 2 * static_cast<int>(std::ceil(dense_halfspan / s.dense_step)) + 1;
    const std::vector<double> dense_rel =
        linspace(-dense_halfspan, dense_halfspan, dense_points);
    const std::vector<double> scan_rel =
        linspace(-s.scan_halfspan, s.scan_halfspan, s.scan_points);

    const qops::QOperator uv_obs = model::uv_fluorescence_observable(p, s.include_393);
    const qops::QOperator cav_obs = model::cavity_emission_observable(p);

    const std::size_t n_g = maps.g_values.size();
    const std::size_t n_off = offsets.size();
    const std::size_t n_dense = dense_rel.size();

    // Sigma-independent per-g data: transient traces over detuning offsets and
    // the unbroadened cavity-emission spectrum on the dense grid.
    std::vector<std::vector<std::vector<double>>> traces(
        n_g, std::vector<std::vector<double>>(n_off));
    std::vector<std::vector<double>> dense_cav(n_g, std::vector<double>(n_dense, 0.0));

    threading::parallel_for(n_g * n_off, s.threads, [&](std::size_t task) {
        const std::size_t ig = task / n_off;
        const std::size_t io = task % n_off;
        model::SystemParams pp = p;
        pp.g_bar = maps.g_values[ig];
        pp.sigma_inhom = 0.0;
        pp.delta_cav = p.delta_cav + offsets[io];
        traces[ig][io] = transient_trace(pp, times, uv_obs, s.rel_tol);
    });

    threading::parallel_for(n_g * n_dense, s.threads, [&](std::size_t task) {
        const std::size_t ig = task / n_dense;
        const std::size_t id = task % n_dense;
        model::SystemParams pp = p;
        pp.g_bar = maps.g_values[ig];
        pp.sigma_inhom = 0.0;
        pp.delta_cav = raman + dense_rel[id];
        dense_cav[ig][id] = lindblad::expect_real(cav_obs, steady_for(pp));
    });

    // Gauss-Hermite averaging via interpolation in the offset coordinate.
    const GaussHermite gh = gauss_hermite(s.gh_nodes);
    const double off0 = offsets.front();
    const double off_step = offsets.size() > 1 ? offsets[1] - offsets[0] : 1.0;
    const double dense0 = dense_rel.front();
    const double dense_step_actual = dense_rel.size() > 1 ? dense_rel[1] - dense_rel[0] : 1.0;

    std::vector<double> column(n_off);
    for (std::size_t ig = 0; ig < n_g; ++ig) {
        for (std::size_t is = 0; is < maps.sigma_values.size(); ++is) {
            const double sigma = maps.sigma_values[is];

            std::vector<double> rate(times.size(), 0.0);
            if (sigma <= 0.0) {
                rate = traces[ig][n_off / 2]; // center offset = 0
            } else {
                for (std::size_t it = 0; it < times.size(); ++it) {
                    for (std::size_t io = 0; io < n_off; ++io) column[io] = traces[ig][io][it];
                    double acc = 0.0;
                    for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
                        const double shift = std::sqrt(2.0) * sigma * gh.nodes[k];
                        acc += gh.weights[k] *
                               cubic_interp_uniform(off0, off_step, column, shift);
                    }
                    rate[it] = acc;
                }
            }
            const ExponentialFit efit =
                windowed_exponential_fit(times, rate, s.window_tau_factor, nullptr);
            maps.tau[ig][is] = efit.tau;

            std::vector<double> spec(scan_rel.size(), 0.0);
            for (std::size_t ip = 0; ip < scan_rel.size(); ++ip) {
                if (sigma <= 0.0) {
                    spec[ip] = cubic_interp_uniform(dense0, dense_step_actual, dense_cav[ig],
                                                    scan_rel[ip]);
                } else {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
                        const double shift = std::sqrt(2.0) * sigma * gh.nodes[k];
                        acc += gh.weights[k] *
                               cubic_interp_uniform(dense0, dense_step_actual, dense_cav[ig],
                                                    scan_rel[ip] + shift);
                    }
                    spec[ip] = acc;
                }
            }
            const LorentzianFit lfit = fit_lorentzian(scan_rel, spec);
            maps.delta[ig][is] = lfit.hwhm;
        }
    }
    return maps;
}

namespace {

InversionResult intersect_maps(const InversionMaps& maps, double tau_meas, double delta_meas) {
    const std::vector<MarchSegment> tau_segs = level_segments(maps.tau, tau_meas);
    const std::vector<MarchSegment> delta_segs = level_segments(maps.delta, delta_meas);

    InversionResult result;
    result.tau_contour = to_physical(tau_segs, maps.g_values, maps.sigma_values);
    result.delta_contour = to_physical(delta_segs, maps.g_values, maps.sigma_values);

    const CrossResult cross = find_crossing(tau_segs, delta_segs);
    if (!cross.found)
        throw InversionError(
            "invert_parameters: the tau and delta level sets do not intersect inside the "
            "grid (tau contour: " + std::to_string(tau_segs.size()) + " segments, delta "
            "contour: " + std::to_string(delta_segs.size()) + " segments)",
            result.tau_contour, result.delta_contour);

    auto phys = [](const std::vector<double>& axis, double idx) {
        if (axis.size() == 1) return axis[0];
        const double step = (axis.back() - axis.front()) / double(axis.size() - 1);
        return axis.front() + idx * step;
    };
    result.g_bar = phys(maps.g_values, cross.g_idx);
    result.sigma = phys(maps.sigma_values, cross.s_idx);

    const double g_step = maps.g_values.size() > 1
                              ? (maps.g_values.back() - maps.g_values.front()) /
                                    double(maps.g_values.size() - 1)
                              : 1.0;
    const double s_step = maps.sigma_values.size() > 1
                              ? (maps.sigma_values.back() - maps.sigma_values.front()) /
                                    double(maps.sigma_values.size() - 1)
                              : 1.0;
    const double d_tau = point_to_segments_distance(cross.g_idx, cross.s_idx, tau_segs);
    const double d_delta = point_to_segments_distance(cross.g_idx, cross.s_idx, delta_segs);
    // Index-space distances scaled back to physical units (conservative max).
    result.residual = std::max(d_tau, d_delta) * std::hypot(g_step, s_step);
    return result;
}

} // namespace

InversionResult invert_from_maps(const InversionMaps& maps, double tau_on_meas,
                                 double delta_meas, const model::SystemParams& p,
                                 const InversionSettings& s) {
    if (!(tau_on_meas > 0.0) || !(delta_meas > 0.0))
        throw InputError("invert_parameters: measured values must be positive");

    InversionResult coarse = intersect_maps(maps, tau_on_meas, delta_meas);
    if (!s.refine) return coarse;

    // One refinement pass: recompute both maps on a small window around the
    // coarse crossing and re-intersect.
    const double g_step = (maps.g_values.back() - maps.g_values.front()) /
                          double(maps.g_values.size() - 1);
    const double s_step = (maps.sigma_values.back() - maps.sigma_values.front()) /
                          double(maps.sigma_values.size() - 1);

    InversionGrid sub;
    sub.g_min = std::max(maps.g_values.front(), coarse.g_bar - 1.5 * g_step);
    sub.g_max = std::min(maps.g_values.back(), coarse.g_bar + 1.5 * g_step);
    sub.sigma_min = std::max(maps.sigma_values.front(), coarse.sigma - 1.5 * s_step);
    sub.sigma_max = std::min(maps.sigma_values.back(), coarse.sigma + 1.5 * s_step);
    sub.g_points = 7;
    sub.sigma_points = 7;
    if (sub.g_max - sub.g_min < 0.5 * g_step || sub.sigma_max - sub.sigma_min < 0.5 * s_step)
        return coarse;

    InversionSettings s_fine = s;
    s_fine.refine = false;

    try {
        const InversionMaps fine = compute_inversion_maps(p, sub, s_fine);
        InversionResult refined = intersect_maps(fine, tau_on_meas, delta_meas);
        // Keep the full coarse contours for diagnostics; report the refined point.
        refined.tau_contour = coarse.tau_contour;
        refined.delta_contour = coarse.delta_contour;
        return refined;
    } catch (const InversionError&) {
        return coarse; // refinement window missed the crossing; coarse answer stands
    }
}

InversionResult invert_parameters(double tau_on_meas, double delta_meas,
                                  const model::SystemParams& p, const InversionGrid& grid,
                                  const InversionSettings& s) {
    const InversionMaps maps = compute_inversion_maps(p, grid, s);
    return invert_from_maps(maps, tau_on_meas, delta_meas, p, s);
}

// ---------------------------------------------------------------------------
// Suppression sweep

std::vector<SuppressionPoint> suppression_sweep(const model::SystemParams& p,
                                                const std::vector<double>& delta850_list,
                                                const SuppressionSettings& s) {
    p.validate();
    const double halfspan = s.scan_halfspan > 0.0 ? s.scan_halfspan : two_pi * 15e6;
    const std::vector<double> grid =
        linspace(p.l397.detuning - halfspan, p.l397.detuning + halfspan, s.scan_points);

    std::vector<SuppressionPoint> out;
    out.reserve(delta850_list.size());
    for (double d850 : delta850_list) {
        model::SystemParams pp = p;
        pp.l850.detuning = d850;
        const ScanColumns cols =
            scan_columns(pp, grid, default_baseline(0.0), s.gh_nodes, s.threads);
        SuppressionPoint pt;
        pt.delta850 = d850;
        pt.suppression_with_393 =
            1.0 - *std::min_element(cols.uv_with_393.begin(), cols.uv_with_393.end());
        pt.suppression_without_393 =
            1.0 - *std::min_element(cols.uv_without_393.begin(), cols.uv_without_393.end());
        out.push_back(pt);
    }
    return out;
}

} // namespace ioncavity::experiments

#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "ioncavity/fitting.hpp"
#include "ioncavity/lindblad.hpp"
#include "ioncavity/model.hpp"
#include "ioncavity/quadrature.hpp"

namespace ioncavity::experiments {

// ---------------------------------------------------------------------------
// Shelving transients (tau_on / tau_off)

struct TransientSettings {
    double t_max = 8e-6;             // s
    int samples = 640;
    double window_tau_factor = 5.0;  // fit window = factor * initial tau estimate
    bool broaden_transient = true;   // Gaussian-average the trace before fitting
    int gh_nodes = 15;
    bool include_393 = true;
    double rel_tol = 1e-9;           // integrator tolerance
    int threads = 1;
};

struct Transient {
    std::vector<double> times;  // s
    std::vector<double> rate;   // fluorescence rate, s^-1
    double tau_fit = 0.0;       // s
    double tau_stderr = 0.0;    // s
    ExponentialFit fit;
    std::size_t window_points = 0; // leading samples used by the fit
};

// Vacuum-cavity density matrix evenly mixed over one atomic manifold.
lindblad::DensityMatrix even_manifold_state(const model::SystemParams& p, model::Term term);

// Steady state with repumpers on, abrupt switch-off of the 850/854 drives at
// t = 0 (and g_bar -> 0 when cavity_on is false), evolution of the UV
// fluorescence rate, exponential fit over the configured window.  When
// cavity_on and sigma_inhom > 0 and broaden_transient, the whole pipeline is
// Gaussian-averaged over the cavity detuning before fitting.  With either
// repumper absent the driven steady state is dark, so the transient starts
// from an even S1/2 mixture instead.
Transient shelving_transient(const model::SystemParams& p, bool cavity_on,
                             const TransientSettings& s = {});

// Monotone root-find for the Omega_397 that reproduces a target cavity-off
// tau to 0.5%.  Throws AnalysisError when the target cannot be bracketed.
double calibrate_omega397(const model::SystemParams& p, double tau_off_target,
                          const TransientSettings& s = {});

// ---------------------------------------------------------------------------
// Cavity-detuning scans

enum class SpectrumKind { CavityEmission, UvFluorescenceNormalized };

struct Spectrum {
    std::vector<double> detunings; // absolute Delta_cav, rad/s
    std::vector<double> values;    // cavity: rate s^-1; UV: dimensionless
    SpectrumKind kind = SpectrumKind::CavityEmission;
    double sigma_applied = 0.0;    // rad/s
};

struct ScanSettings {
    int gh_nodes = 15;
    double baseline_offset = 0.0;  // rad/s beyond the Raman resonance; 0 -> default 2pi*80 MHz
    bool include_393 = true;
    int threads = 1;
};

// Per grid point: steady state -> cavity-emission and UV-fluorescence rates,
// UV normalized by the far-detuned baseline, both Gaussian-averaged over the
// cavity detuning.  Returns (cavity, uv_normalized).
std::pair<Spectrum, Spectrum> cavity_scan(const model::SystemParams& p,
                                          const std::vector<double>& detunings,
                                          const ScanSettings& s = {});

// Gaussian-average an existing spectrum by re-evaluating the underlying model
// at shifted detunings: value(d) <- sum_k w_k eval(d + sqrt(2) sigma x_k).
Spectrum broaden(const Spectrum& s, double sigma,
                 const std::function<double(double)>& eval, int nodes = 15);

// ---------------------------------------------------------------------------
// (g_bar, sigma) inversion

struct InversionGrid {
    double g_min = 0.0, g_max = 0.0;         // rad/s
    int g_points = 21;
    double sigma_min = 0.0, sigma_max = 0.0; // rad/s
    int sigma_points = 21;
};

struct InversionSettings {
    // Transient branch: evolution time grid and fit window.
    double t_max = 4e-6;
    int samples = 320;
    double window_tau_factor = 5.0;
    double rel_tol = 1e-8;
    bool include_393 = true;
    // Detuning-offset grid used to interpolate Gaussian-broadened transients.
    double offset_halfspan = 0.0;  // rad/s; 0 -> derived from sigma_max and gh_nodes
    int offset_points = 15;
    // Spectrum branch: dense unbroadened scan per g, fitted sub-grid.
    double scan_halfspan = 0.0;    // rad/s; 0 -> default 2pi*25 MHz
    int scan_points = 51;
    double dense_step = 0.0;       // rad/s; 0 -> default 2pi*1 MHz
    int gh_nodes = 9;
    bool refine = true;
    int threads = 1;
};

struct InversionMaps {
    std::vector<double> g_values;      // rad/s
    std::vector<double> sigma_values;  // rad/s
    std::vector<std::vector<double>> tau;    // [ig][is], seconds
    std::vector<std::vector<double>> delta;  // [ig][is], rad/s HWHM
};

struct ContourPoint {
    double g = 0.0;     // rad/s
    double sigma = 0.0; // rad/s
};

struct InversionResult {
    double g_bar = 0.0;    // rad/s
    double sigma = 0.0;    // rad/s
    double residual = 0.0; // rad/s distance between contours at the result
    std::vector<ContourPoint> tau_contour;
    std::vector<ContourPoint> delta_contour;
};

// Thrown when the level sets do not cross inside the grid; carries both
// contours for diagnosis.
class InversionError : public AnalysisError {
public:
    InversionError(const std::string& msg, std::vector<ContourPoint> tau_contour,
                   std::vector<ContourPoint> delta_contour)
        : AnalysisError(msg), tau_contour(std::move(tau_contour)),
          delta_contour(std::move(delta_contour)) {}

    std::vector<ContourPoint> tau_contour;
    std::vector<ContourPoint> delta_contour;
};

// tau_on and delta maps over the (g_bar, sigma) grid.  The transient traces
// and unbroadened spectra are computed once per g on dense detuning grids and
// reused for every sigma via Gauss-Hermite averaging with cubic interpolation.
InversionMaps compute_inversion_maps(const model::SystemParams& p,
                                     const InversionGrid& grid,
                                     const InversionSettings& s = {});

// Level-set extraction at the measured values, polyline intersection, and one
// local refinement pass around the crossing (recomputing both maps on a finer
// sub-grid).  Throws InversionError when the contours do not intersect.
InversionResult invert_from_maps(const InversionMaps& maps, double tau_on_meas,
                                 double delta_meas, const model::SystemParams& p,
                                 const InversionSettings& s = {});

InversionResult invert_parameters(double tau_on_meas, double delta_meas,
                                  const model::SystemParams& p, const InversionGrid& grid,
                                  const InversionSettings& s = {});

// ---------------------------------------------------------------------------
// Delta_850 suppression sweep

struct SuppressionPoint {
    double delta850 = 0.0;            // rad/s
    double suppression_with_393 = 0.0;    // 1 - min(normalized UV), 393 nm counted
    double suppression_without_393 = 0.0; // 1 - min(normalized UV), 397 nm only
};

struct SuppressionSettings {
    double scan_halfspan = 0.0; // rad/s around the Raman resonance; 0 -> 2pi*15 MHz
    int scan_points = 31;
    int gh_nodes = 9;
    int threads = 1;
};

std::vector<SuppressionPoint> suppression_sweep(const model::SystemParams& p,
                                                const std::vector<double>& delta850_list,
                                                const SuppressionSettings& s = {});

} // namespace ioncavity::experiments

#pragma once

#include <string>
#include <vector>

#include "ioncavity/experiments.hpp"
#include "ioncavity/model.hpp"

namespace ioncavity::io {

// All run parameters in the human units of the config format: frequencies as
// nu = omega/2pi in MHz, magnetic field in Gauss, times in ns/us.  Conversion
// to SI angular frequencies happens only in the to_*() accessors.
struct RunConfig {
    int schema = 1;

    struct Laser {
        double detuning_mhz = 0.0;
        double rabi_mhz = 0.0;
        std::string pol = "pi"; // "pi" or "sigma_pm"
    };
    Laser l397;
    Laser l850;
    Laser l854;

    struct Atom {
        double gamma_p12_s12_mhz = 0.0;
        double gamma_p12_d32_mhz = 0.0;
        double gamma_p32_s12_mhz = 0.0;
        double gamma_p32_d32_mhz = 0.0;
        double gamma_p32_d52_mhz = 0.0;
        double b_field_gauss = 0.0;
        double zeeman_unit_mhz_per_gauss = 0.0;
    };
    Atom atom;

    struct Cavity {
        double g_bar_mhz = 0.0;
        double kappa_mhz = 0.0;
        double delta_cav_mhz = 0.0;
        double sigma_inhom_mhz = 0.0;
        int fock_cutoff = 1;
        int cavity_modes = 2;
    };
    Cavity cavity;

    std::string rabi_convention = "reduced"; // or "strongest"

    struct TransientBlock {
        double t_max_ns = 8000.0;
        int samples = 640;
        double window_tau_factor = 5.0;
        bool broaden_transient = true;
        bool include_393 = true;
        int gh_nodes = 15;
        double rel_tol = 1e-9;
    };
    TransientBlock transient;

    struct ScanBlock {
        double halfspan_mhz = 25.0;
        int points = 41;
        double baseline_offset_mhz = 80.0;
        bool include_393 = true;
        int gh_nodes = 15;
    };
    ScanBlock scan;

    struct InversionBlock {
        double g_min_mhz = 3.0, g_max_mhz = 8.0;
        int g_points = 21;
        double sigma_min_mhz = 0.0, sigma_max_mhz = 6.0;
        int sigma_points = 21;
        double tau_target_ns = 292.0;
        double delta_target_mhz = 10.3;
        double t_max_ns = 4000.0;
        int samples = 320;
        double rel_tol = 1e-8;
        int offset_points = 15;
        double scan_halfspan_mhz = 25.0;
        int scan_points = 51;
        double dense_step_mhz = 1.0;
        int gh_nodes = 9;
        bool refine = true;
        bool include_393 = true;
    };
    InversionBlock inversion;

    struct SuppressionBlock {
        double delta850_min_mhz = -25.0;
        double delta850_max_mhz = 2.0;
        int delta850_points = 10;
        double scan_halfspan_mhz = 15.0;
        int scan_points = 31;
        int gh_nodes = 9;
    };
    SuppressionBlock suppression;

    struct Eq1Block {
        double v_min = 0.05, v_max = 1.0;
        int v_points = 10;
        double w_min = 0.0, w_max = 2.0;
        int w_points = 10;
        double pump_over_gamma1 = 0.25;
    };
    Eq1Block eq1;

    std::string out_dir = "out";

    // Warnings accumulated while loading (missing keys filled from defaults).
    std::vector<std::string> warnings;

    static RunConfig defaults();

    model::SystemParams to_system_params() const;
    experiments::TransientSettings to_transient_settings() const;
    experiments::ScanSettings to_scan_settings() const;
    std::vector<double> scan_grid() const; // absolute detunings, rad/s
    experiments::InversionGrid to_inversion_grid() const;
    experiments::InversionSettings to_inversion_settings() const;
    experiments::SuppressionSettings to_suppression_settings() const;
    std::vector<double> delta850_list() const; // rad/s
};

// Line-oriented `key = value [unit]` format with [section] headers and
// mandatory unit suffixes on dimensioned quantities.  Unknown keys, bad
// units, and malformed lines raise ConfigError with the line number; missing
// keys are defaulted and recorded in warnings.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin);

// Canonical listing of a resolved config, parseable by parse_config; used for
// the shipped default file and for CSV metadata echoes.
std::string serialize_config(const RunConfig& cfg);

} // namespace ioncavity::io

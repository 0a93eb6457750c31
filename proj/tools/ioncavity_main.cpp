#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ioncavity/csv.hpp"
#include "ioncavity/eff3.hpp"
#include "ioncavity/errors.hpp"
#include "ioncavity/experiments.hpp"
#include "ioncavity/fitting.hpp"
#include "ioncavity/threading.hpp"
#include "ioncavity/validate.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ioncavity;

constexpr double two_pi = 2.0 * std::numbers::pi;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::string cavity = "both"; // "on", "off", "both"
    int include_393 = -1;        // -1: from config
};

io::RunConfig load(const GlobalOpts& g) {
    io::RunConfig cfg;
    if (!g.config_path.empty()) {
        cfg = io::load_config(g.config_path);
    } else if (const char* env = std::getenv("IONCAVITY_CONFIG"); env && *env) {
        cfg = io::load_config(env);
    } else {
        cfg = io::RunConfig::defaults();
    }
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (g.include_393 >= 0) {
        cfg.transient.include_393 = g.include_393 != 0;
        cfg.scan.include_393 = g.include_393 != 0;
        cfg.inversion.include_393 = g.include_393 != 0;
    }
    return cfg;
}

std::string out_path(const io::RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

void save(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw InputError("write failed for '" + path + "'");
    std::cout << "wrote " << path << "\n";
}

int cmd_shelve(const GlobalOpts& g) {
    const io::RunConfig cfg = load(g);
    const auto p = cfg.to_system_params();
    auto s = cfg.to_transient_settings();
    s.threads = g.threads;

    auto run_one = [&](bool cavity_on) {
        const auto tr = experiments::shelving_transient(p, cavity_on, s);
        const std::string label = cavity_on ? "cavity_on" : "cavity_off";
        io::MetaList meta{{"cavity", cavity_on ? "on" : "off"}};
        save(out_path(cfg, "shelve_" + label + ".csv"),
             io::transient_csv(tr, "shelve", cfg, meta));
        std::cout << "tau_" << (cavity_on ? "on" : "off") << "_ns = "
                  << io::format_g9(tr.tau_fit * 1e9) << " +- "
                  << io::format_g9(tr.tau_stderr * 1e9) << "\n";
    };
    if (g.cavity == "on" || g.cavity == "both") run_one(true);
    if (g.cavity == "off" || g.cavity == "both") run_one(false);
    return 0;
}

int cmd_scan(const GlobalOpts& g) {
    const io::RunConfig cfg = load(g);
    const auto p = cfg.to_system_params();
    auto s = cfg.to_scan_settings();
    s.threads = g.threads;

    const auto grid = cfg.scan_grid();
    const auto [cav, uv] = experiments::cavity_scan(p, grid, s);

    const auto fit = experiments::fit_lorentzian(cav.detunings, cav.values);
    io::MetaList fit_meta{
        {"fit_center_over_2pi_MHz", io::format_g9(fit.center / two_pi / 1e6)},
        {"fit_hwhm_over_2pi_MHz", io::format_g9(fit.hwhm / two_pi / 1e6)},
        {"fit_amplitude_per_s", io::format_g9(fit.amplitude)},
        {"fit_offset_per_s", io::format_g9(fit.offset)},
    };
    save(out_path(cfg, "scan_cavity_emission.csv"),
         io::spectrum_csv(cav, "scan", cfg, fit_meta));

    double uv_min = uv.values.empty() ? 1.0 : uv.values.front();
    for (double v : uv.values) uv_min = std::min(uv_min, v);
    io::MetaList uv_meta{{"uv_min_normalized", io::format_g9(uv_min)},
                         {"uv_suppression", io::format_g9(1.0 - uv_min)}};
    save(out_path(cfg, "scan_uv_normalized.csv"),
         io::spectrum_csv(uv, "scan", cfg, uv_meta));

    std::cout << "delta_over_2pi_MHz = " << io::format_g9(fit.hwhm / two_pi / 1e6)
              << " (cavity-emission HWHM, center "
              << io::format_g9(fit.center / two_pi / 1e6) << " MHz)\n";
    std::cout << "uv_suppression = " << io::format_g9(1.0 - uv_min) << "\n";
    return 0;
}

int cmd_invert(const GlobalOpts& g) {
    const io::RunConfig cfg = load(g);
    const auto p = cfg.to_system_params();
    auto s = cfg.to_inversion_settings();
    s.threads = g.threads;
    const auto grid = cfg.to_inversion_grid();
    const double tau_target = cfg.inversion.tau_target_ns * 1e-9;
    const double delta_target = cfg.inversion.delta_target_mhz * two_pi * 1e6;

    const auto maps = experiments::compute_inversion_maps(p, grid, s);
    save(out_path(cfg, "inversion_maps.csv"), io::inversion_maps_csv(maps, "invert", cfg));

    const auto result = experiments::invert_from_maps(maps, tau_target, delta_target, p, s);
    save(out_path(cfg, "inversion_contours.csv"),
         io::inversion_contours_csv(result, "invert", cfg));
    std::cout << "g_bar_over_2pi_MHz = " << io::format_g9(result.g_bar / two_pi / 1e6)
              << "\n";
    std::cout << "sigma_over_2pi_MHz = " << io::format_g9(result.sigma / two_pi / 1e6)
              << "\n";
    return 0;
}

int cmd_suppress(const GlobalOpts& g) {
    const io::RunConfig cfg = load(g);
    const auto p = cfg.to_system_params();
    auto s = cfg.to_suppression_settings();
    s.threads = g.threads;

    const auto pts = experiments::suppression_sweep(p, cfg.delta850_list(), s);
    save(out_path(cfg, "suppression.csv"), io::suppression_csv(pts, "suppress", cfg));

    double best = 0.0, best_delta = 0.0;
    for (const auto& pt : pts)
        if (pt.suppression_with_393 > best) {
            best = pt.suppression_with_393;
            best_delta = pt.delta850;
        }
    std::cout << "peak_suppression = " << io::format_g9(best) << " at delta850_over_2pi_MHz = "
              << io::format_g9(best_delta / two_pi / 1e6) << "\n";
    return 0;
}

int cmd_eq1(const GlobalOpts& g) {
    const io::RunConfig cfg = load(g);
    std::vector<io::Eq1Row> rows;
    const auto& e = cfg.eq1;
    for (int i = 0; i < e.v_points; ++i) {
        const double v = e.v_points == 1
                             ? e.v_min
                             : e.v_min + (e.v_max - e.v_min) * i / double(e.v_points - 1);
        for (int j = 0; j < e.w_points; ++j) {
            const double w = e.w_points == 1
                                 ? e.w_min
                                 : e.w_min + (e.w_max - e.w_min) * j / double(e.w_points - 1);
            rows.push_back({v, w, eff3::normalized_fluorescence_eq1(
                                      v, w, 1.0, e.pump_over_gamma1)});
        }
    }
    save(out_path(cfg, "eq1_table.csv"), io::eq1_csv(rows, "eq1", cfg));
    return 0;
}

int cmd_validate(const GlobalOpts& g) {
    const io::RunConfig cfg = load(g);
    const auto p = cfg.to_system_params();
    const auto checks = validate::run_invariant_suite(p);
    for (const auto& c : checks)
        std::cout << (c.passed ? "PASS" : "FAIL") << " " << c.name << " (" << c.detail
                  << ")\n";
    return validate::all_passed(checks) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trapped-ion / fiber-cavity emission simulator"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path,
                   "Config file path (default: $IONCAVITY_CONFIG, else built-in defaults)");
    app.add_option("--out", g.out_dir, "Output directory (overrides config)");
    app.add_option("--threads", g.threads, "Worker threads, 0 = auto")
        ->check(CLI::NonNegativeNumber);
    std::string cavity = "both";
    app.add_option("--cavity", cavity, "shelve: which transient(s) to run")
        ->check(CLI::IsMember({"on", "off", "both"}));
    std::string include393;
    app.add_option("--include-393", include393, "Count the 393 nm channel in UV rates")
        ->check(CLI::IsMember({"true", "false"}));

    auto* shelve = app.add_subcommand("shelve", "Shelving transients and tau fits");
    auto* scan = app.add_subcommand("scan", "Cavity-detuning spectra (emission + UV)");
    auto* invert = app.add_subcommand("invert", "(g_bar, sigma) from tau_on and delta");
    auto* suppress = app.add_subcommand("suppress", "Fluorescence suppression vs delta850");
    auto* eq1 = app.add_subcommand("eq1", "Analytic shelving-rate formula table");
    auto* validate_cmd = app.add_subcommand("validate", "Run the invariant suite");
    for (auto* sub : {shelve, scan, invert, suppress, eq1, validate_cmd}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return 1;
    }

    g.cavity = cavity;
    if (!include393.empty()) g.include_393 = include393 == "true" ? 1 : 0;
    g.threads = ioncavity::threading::resolve_thread_count(g.threads);

    try {
        if (shelve->parsed()) return cmd_shelve(g);
        if (scan->parsed()) return cmd_scan(g);
        if (invert->parsed()) return cmd_invert(g);
        if (suppress->parsed()) return cmd_suppress(g);
        if (eq1->parsed()) return cmd_eq1(g);
        if (validate_cmd->parsed()) return cmd_validate(g);
        std::cerr << app.help() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const AnalysisError& e) {
        std::cerr << "analysis error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

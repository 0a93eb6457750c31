#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ioncavity/config.hpp"
#include "ioncavity/eff3.hpp"
#include "ioncavity/errors.hpp"
#include "ioncavity/experiments.hpp"
#include "ioncavity/fitting.hpp"
#include "ioncavity/lindblad.hpp"
#include "ioncavity/model.hpp"
#include "ioncavity/qops.hpp"
#include "ioncavity/validate.hpp"

namespace py = pybind11;
using namespace ioncavity;

namespace {

lindblad::Liouvillian assemble_full(const model::SystemParams& p) {
    return lindblad::assemble(model::build_hamiltonian(p), model::build_collapse_ops(p));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Single-ion cavity QED simulation toolkit";
    m.attr("__version__") = IONCAVITY_VERSION_STRING;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_RuntimeError);

    m.def("clebsch_gordan", &qops::clebsch_gordan, py::arg("j1"), py::arg("m1"),
          py::arg("j2"), py::arg("m2"), py::arg("J"), py::arg("M"),
          "Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>");

    // ---- model -----------------------------------------------------------
    py::class_<model::Polarization>(m, "Polarization")
        .def(py::init<>())
        .def_readwrite("sigma_minus", &model::Polarization::sigma_minus)
        .def_readwrite("pi", &model::Polarization::pi)
        .def_readwrite("sigma_plus", &model::Polarization::sigma_plus)
        .def_static("pure_pi", &model::Polarization::pure_pi)
        .def_static("sigma_pm", &model::Polarization::sigma_pm);

    py::class_<model::LaserParams>(m, "LaserParams")
        .def(py::init<>())
        .def_readwrite("rabi", &model::LaserParams::rabi)
        .def_readwrite("detuning", &model::LaserParams::detuning)
        .def_readwrite("pol", &model::LaserParams::pol);

    py::class_<model::DecayRates>(m, "DecayRates")
        .def(py::init<>())
        .def_readwrite("p12_s12", &model::DecayRates::p12_s12)
        .def_readwrite("p12_d32", &model::DecayRates::p12_d32)
        .def_readwrite("p32_s12", &model::DecayRates::p32_s12)
        .def_readwrite("p32_d32", &model::DecayRates::p32_d32)
        .def_readwrite("p32_d52", &model::DecayRates::p32_d52);

    py::enum_<model::RabiConvention>(m, "RabiConvention")
        .value("Reduced", model::RabiConvention::Reduced)
        .value("Strongest", model::RabiConvention::Strongest);

    py::class_<model::SystemParams>(m, "SystemParams")
        .def(py::init<>())
        .def_readwrite("l397", &model::SystemParams::l397)
        .def_readwrite("l850", &model::SystemParams::l850)
        .def_readwrite("l854", &model::SystemParams::l854)
        .def_readwrite("g_bar", &model::SystemParams::g_bar)
        .def_readwrite("kappa", &model::SystemParams::kappa)
        .def_readwrite("delta_cav", &model::SystemParams::delta_cav)
        .def_readwrite("sigma_inhom", &model::SystemParams::sigma_inhom)
        .def_readwrite("b_field", &model::SystemParams::b_field)
        .def_readwrite("zeeman_unit", &model::SystemParams::zeeman_unit)
        .def_readwrite("decay", &model::SystemParams::decay)
        .def_readwrite("rabi_convention", &model::SystemParams::rabi_convention)
        .def_readwrite("fock_cutoff", &model::SystemParams::fock_cutoff)
        .def_readwrite("cavity_modes", &model::SystemParams::cavity_modes)
        .def("gamma_p12", &model::SystemParams::gamma_p12)
        .def("cooperativity", &model::SystemParams::cooperativity)
        .def("validate", &model::SystemParams::validate);

    m.def(
        "build_hamiltonian",
        [](const model::SystemParams& p) { return model::build_hamiltonian(p).dense(); },
        py::arg("params"), "Dense Hamiltonian on the atom x cavity-mode space (rad/s)");
    m.def(
        "build_collapse_ops",
        [](const model::SystemParams& p) {
            std::vector<qops::DenseCd> out;
            for (const auto& c : model::build_collapse_ops(p)) out.push_back(c.dense());
            return out;
        },
        py::arg("params"), "Dense collapse operators (sqrt(rate) units)");

    // ---- lindblad --------------------------------------------------------
    m.def(
        "steady_state",
        [](const model::SystemParams& p) {
            py::gil_scoped_release unlock;
            return lindblad::steady_state(assemble_full(p)).matrix();
        },
        py::arg("params"), "Steady-state density matrix of the full model");
    m.def(
        "steady_rates",
        [](const model::SystemParams& p, bool include_393) {
            py::gil_scoped_release unlock;
            const auto rho = lindblad::steady_state(assemble_full(p));
            const double cav =
                lindblad::expect_real(model::cavity_emission_observable(p), rho);
            const double uv = lindblad::expect_real(
                model::uv_fluorescence_observable(p, include_393), rho);
            return std::make_pair(cav, uv);
        },
        py::arg("params"), py::arg("include_393") = true,
        "(cavity photon rate, UV fluorescence rate) in the steady state, s^-1");

    // ---- fits ------------------------------------------------------------
    py::class_<experiments::ExponentialFit>(m, "ExponentialFit")
        .def_readonly("tau", &experiments::ExponentialFit::tau)
        .def_readonly("tau_err", &experiments::ExponentialFit::tau_err)
        .def_readonly("amplitude", &experiments::ExponentialFit::amplitude)
        .def_readonly("offset", &experiments::ExponentialFit::offset)
        .def_readonly("rms_residual", &experiments::ExponentialFit::rms_residual);
    py::class_<experiments::LorentzianFit>(m, "LorentzianFit")
        .def_readonly("center", &experiments::LorentzianFit::center)
        .def_readonly("hwhm", &experiments::LorentzianFit::hwhm)
        .def_readonly("amplitude", &experiments::LorentzianFit::amplitude)
        .def_readonly("offset", &experiments::LorentzianFit::offset)
        .def_readonly("rms_residual", &experiments::LorentzianFit::rms_residual);
    m.def("fit_exponential", &experiments::fit_exponential, py::arg("times"),
          py::arg("values"), "Least-squares fit of offset + amplitude exp(-t/tau)");
    m.def("fit_lorentzian", &experiments::fit_lorentzian, py::arg("xs"), py::arg("ys"),
          "Least-squares Lorentzian fit; hwhm is the half width at half maximum");

    // ---- experiments -----------------------------------------------------
    py::class_<experiments::TransientSettings>(m, "TransientSettings")
        .def(py::init<>())
        .def_readwrite("t_max", &experiments::TransientSettings::t_max)
        .def_readwrite("samples", &experiments::TransientSettings::samples)
        .def_readwrite("window_tau_factor",
                       &experiments::TransientSettings::window_tau_factor)
        .def_readwrite("broaden_transient",
                       &experiments::TransientSettings::broaden_transient)
        .def_readwrite("gh_nodes", &experiments::TransientSettings::gh_nodes)
        .def_readwrite("include_393", &experiments::TransientSettings::include_393)
        .def_readwrite("rel_tol", &experiments::TransientSettings::rel_tol)
        .def_readwrite("threads", &experiments::TransientSettings::threads);

    py::class_<experiments::Transient>(m, "Transient")
        .def_readonly("times", &experiments::Transient::times)
        .def_readonly("rate", &experiments::Transient::rate)
        .def_readonly("tau_fit", &experiments::Transient::tau_fit)
        .def_readonly("tau_stderr", &experiments::Transient::tau_stderr)
        .def_readonly("fit", &experiments::Transient::fit)
        .def_readonly("window_points", &experiments::Transient::window_points);

    m.def(
        "shelving_transient",
        [](const model::SystemParams& p, bool cavity_on,
           const experiments::TransientSettings& s) {
            py::gil_scoped_release unlock;
            return experiments::shelving_transient(p, cavity_on, s);
        },
        py::arg("params"), py::arg("cavity_on"),
        py::arg("settings") = experiments::TransientSettings{},
        "Fluorescence decay after switching the repumpers off at t = 0");
    m.def(
        "calibrate_omega397",
        [](const model::SystemParams& p, double tau_off_target,
           const experiments::TransientSettings& s) {
            py::gil_scoped_release unlock;
            return experiments::calibrate_omega397(p, tau_off_target, s);
        },
        py::arg("params"), py::arg("tau_off_target"),
        py::arg("settings") = experiments::TransientSettings{},
        "Omega_397 reproducing a target cavity-off decay time");

    py::enum_<experiments::SpectrumKind>(m, "SpectrumKind")
        .value("CavityEmission", experiments::SpectrumKind::CavityEmission)
        .value("UvFluorescenceNormalized",
               experiments::SpectrumKind::UvFluorescenceNormalized);
    py::class_<experiments::Spectrum>(m, "Spectrum")
        .def_readonly("detunings", &experiments::Spectrum::detunings)
        .def_readonly("values", &experiments::Spectrum::values)
        .def_readonly("kind", &experiments::Spectrum::kind)
        .def_readonly("sigma_applied", &experiments::Spectrum::sigma_applied);
    py::class_<experiments::ScanSettings>(m, "ScanSettings")
        .def(py::init<>())
        .def_readwrite("gh_nodes", &experiments::ScanSettings::gh_nodes)
        .def_readwrite("baseline_offset", &experiments::ScanSettings::baseline_offset)
        .def_readwrite("include_393", &experiments::ScanSettings::include_393)
        .def_readwrite("threads", &experiments::ScanSettings::threads);
    m.def(
        "cavity_scan",
        [](const model::SystemParams& p, const std::vector<double>& detunings,
           const experiments::ScanSettings& s) {
            py::gil_scoped_release unlock;
            return experiments::cavity_scan(p, detunings, s);
        },
        py::arg("params"), py::arg("detunings"),
        py::arg("settings") = experiments::ScanSettings{},
        "(cavity emission, normalized UV) spectra over absolute cavity detunings");

    py::class_<experiments::InversionGrid>(m, "InversionGrid")
        .def(py::init<>())
        .def_readwrite("g_min", &experiments::InversionGrid::g_min)
        .def_readwrite("g_max", &experiments::InversionGrid::g_max)
        .def_readwrite("g_points", &experiments::InversionGrid::g_points)
        .def_readwrite("sigma_min", &experiments::InversionGrid::sigma_min)
        .def_readwrite("sigma_max", &experiments::InversionGrid::sigma_max)
        .def_readwrite("sigma_points", &experiments::InversionGrid::sigma_points);
    py::class_<experiments::InversionSettings>(m, "InversionSettings")
        .def(py::init<>())
        .def_readwrite("t_max", &experiments::InversionSettings::t_max)
        .def_readwrite("samples", &experiments::InversionSettings::samples)
        .def_readwrite("window_tau_factor",
                       &experiments::InversionSettings::window_tau_factor)
        .def_readwrite("rel_tol", &experiments::InversionSettings::rel_tol)
        .def_readwrite("include_393", &experiments::InversionSettings::include_393)
        .def_readwrite("offset_halfspan",
                       &experiments::InversionSettings::offset_halfspan)
        .def_readwrite("offset_points", &experiments::InversionSettings::offset_points)
        .def_readwrite("scan_halfspan", &experiments::InversionSettings::scan_halfspan)
        .def_readwrite("scan_points", &experiments::InversionSettings::scan_points)
        .def_readwrite("dense_step", &experiments::InversionSettings::dense_step)
        .def_readwrite("gh_nodes", &experiments::InversionSettings::gh_nodes)
        .def_readwrite("refine", &experiments::InversionSettings::refine)
        .def_readwrite("threads", &experiments::InversionSettings::threads);
    py::class_<experiments::InversionMaps>(m, "InversionMaps")
        .def_readonly("g_values", &experiments::InversionMaps::g_values)
        .def_readonly("sigma_values", &experiments::InversionMaps::sigma_values)
        .def_readonly("tau", &experiments::InversionMaps::tau)
        .def_readonly("delta", &experiments::InversionMaps::delta);
    py::class_<experiments::ContourPoint>(m, "ContourPoint")
        .def_readonly("g", &experiments::ContourPoint::g)
        .def_readonly("sigma", &experiments::ContourPoint::sigma);
    py::class_<experiments::InversionResult>(m, "InversionResult")
        .def_readonly("g_bar", &experiments::InversionResult::g_bar)
        .def_readonly("sigma", &experiments::InversionResult::sigma)
        .def_readonly("residual", &experiments::InversionResult::residual)
        .def_readonly("tau_contour", &experiments::InversionResult::tau_contour)
        .def_readonly("delta_contour", &experiments::InversionResult::delta_contour);
    m.def(
        "compute_inversion_maps",
        [](const model::SystemParams& p, const experiments::InversionGrid& grid,
           const experiments::InversionSettings& s) {
            py::gil_scoped_release unlock;
            return experiments::compute_inversion_maps(p, grid, s);
        },
        py::arg("params"), py::arg("grid"),
        py::arg("settings") = experiments::InversionSettings{},
        "tau_on and delta maps over the (g_bar, sigma) grid");
    m.def(
        "invert_from_maps",
        [](const experiments::InversionMaps& maps, double tau_on, double delta,
           const model::SystemParams& p, const experiments::InversionSettings& s) {
            py::gil_scoped_release unlock;
            return experiments::invert_from_maps(maps, tau_on, delta, p, s);
        },
        py::arg("maps"), py::arg("tau_on"), py::arg("delta"), py::arg("params"),
        py::arg("settings") = experiments::InversionSettings{},
        "Level-set intersection of precomputed maps at the measured pair");
    m.def(
        "invert_parameters",
        [](double tau_on, double delta, const model::SystemParams& p,
           const experiments::InversionGrid& grid,
           const experiments::InversionSettings& s) {
            py::gil_scoped_release unlock;
            return experiments::invert_parameters(tau_on, delta, p, grid, s);
        },
        py::arg("tau_on"), py::arg("delta"), py::arg("params"), py::arg("grid"),
        py::arg("settings") = experiments::InversionSettings{},
        "(g_bar, sigma) whose tau_on and delta match the measured pair");

    py::class_<experiments::SuppressionPoint>(m, "SuppressionPoint")
        .def_readonly("delta850", &experiments::SuppressionPoint::delta850)
        .def_readonly("suppression_with_393",
                      &experiments::SuppressionPoint::suppression_with_393)
        .def_readonly("suppression_without_393",
                      &experiments::SuppressionPoint::suppression_without_393);
    py::class_<experiments::SuppressionSettings>(m, "SuppressionSettings")
        .def(py::init<>())
        .def_readwrite("scan_halfspan",
                       &experiments::SuppressionSettings::scan_halfspan)
        .def_readwrite("scan_points", &experiments::SuppressionSettings::scan_points)
        .def_readwrite("gh_nodes", &experiments::SuppressionSettings::gh_nodes)
        .def_readwrite("threads", &experiments::SuppressionSettings::threads);
    m.def(
        "suppression_sweep",
        [](const model::SystemParams& p, const std::vector<double>& delta850,
           const experiments::SuppressionSettings& s) {
            py::gil_scoped_release unlock;
            return experiments::suppression_sweep(p, delta850, s);
        },
        py::arg("params"), py::arg("delta850_values"),
        py::arg("settings") = experiments::SuppressionSettings{},
        "Fluorescence-dip suppression vs repumper detuning");

    // ---- effective three-level model --------------------------------------
    py::class_<eff3::RateParams>(m, "RateParams")
        .def(py::init<>())
        .def_readwrite("gamma1", &eff3::RateParams::gamma1)
        .def_readwrite("gamma2", &eff3::RateParams::gamma2)
        .def_readwrite("gamma2_prime", &eff3::RateParams::gamma2_prime)
        .def_readwrite("gamma3", &eff3::RateParams::gamma3)
        .def_readwrite("pump", &eff3::RateParams::pump);
    m.def("steady_populations", &eff3::steady_populations, py::arg("rates"),
          py::arg("use_prime"), "(N_S, N_P, N_D) equilibrium of the rate equations");
    m.def("normalized_fluorescence_eq1", &eff3::normalized_fluorescence_eq1,
          py::arg("v"), py::arg("w"), py::arg("gamma1"), py::arg("pump"),
          "Closed-form N'_P / N_P from the shelving-rate ratios v and w");
    m.def(
        "effective_rates_from_full",
        [](const model::SystemParams& p) {
            py::gil_scoped_release unlock;
            return eff3::effective_rates_from_full(p);
        },
        py::arg("params"), "Effective three-level rates extracted from the full model");

    // ---- config ----------------------------------------------------------
    py::class_<io::RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_static("defaults", &io::RunConfig::defaults)
        .def_readonly("warnings", &io::RunConfig::warnings)
        .def("to_system_params", &io::RunConfig::to_system_params)
        .def("to_transient_settings", &io::RunConfig::to_transient_settings)
        .def("to_scan_settings", &io::RunConfig::to_scan_settings)
        .def("to_inversion_grid", &io::RunConfig::to_inversion_grid)
        .def("to_inversion_settings", &io::RunConfig::to_inversion_settings)
        .def("to_suppression_settings", &io::RunConfig::to_suppression_settings);
    m.def("load_config", &io::load_config, py::arg("path"),
          "Parse a config file; missing keys fall back to defaults with warnings");
    m.def("parse_config", &io::parse_config, py::arg("text"),
          py::arg("origin") = std::string("<string>"));
    m.def("serialize_config", &io::serialize_config, py::arg("config"),
          "Canonical config text; parse(serialize(c)) round-trips");

    // ---- validation ------------------------------------------------------
    py::class_<validate::CheckResult>(m, "CheckResult")
        .def_readonly("name", &validate::CheckResult::name)
        .def_readonly("passed", &validate::CheckResult::passed)
        .def_readonly("detail", &validate::CheckResult::detail);
    m.def(
        "run_invariant_suite",
        [](const model::SystemParams& p) {
            py::gil_scoped_release unlock;
            return validate::run_invariant_suite(p);
        },
        py::arg("params"), "Self-contained physics invariant checks");
}

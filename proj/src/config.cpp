#include "ioncavity/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

namespace ioncavity::io {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double mhz_to_rad(double mhz) { return mhz * two_pi * 1e6; }

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

struct RawValue {
    std::string value;
    int line = 0;
};

class KeyTable {
public:
    KeyTable(std::string origin) : origin_(std::move(origin)) {}

    void insert(const std::string& section, const std::string& key, std::string value,
                int line) {
        const std::string full = section + "/" + key;
        if (entries_.count(full))
            throw ConfigError(origin_ + ":" + std::to_string(line) + ": duplicate key '" +
                              key + "' in section [" + section + "]");
        entries_[full] = RawValue{std::move(value), line};
    }

    // nullptr when absent; removes the entry so leftovers can be reported.
    std::optional<RawValue> take(const std::string& section, const std::string& key) {
        const auto it = entries_.find(section + "/" + key);
        if (it == entries_.end()) return std::nullopt;
        RawValue out = it->second;
        entries_.erase(it);
        return out;
    }

    void require_empty() const {
        if (entries_.empty()) return;
        std::ostringstream msg;
        msg << origin_ << ": unknown key(s):";
        for (const auto& [full, raw] : entries_)
            msg << " '" << full << "' (line " << raw.line << ")";
        throw ConfigError(msg.str());
    }

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    std::map<std::string, RawValue> entries_;
};

[[noreturn]] void fail(const KeyTable& table, const RawValue& raw, const std::string& what) {
    throw ConfigError(table.origin() + ":" + std::to_string(raw.line) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_number(const KeyTable& table, const RawValue& raw, const std::string& tok) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + tok.size() || !std::isfinite(v))
        fail(table, raw, "expected a number, got '" + tok + "'");
    return v;
}

// Dimensioned value: "NUMBER UNIT" where UNIT must be one of `units`; the
// value is returned multiplied by the matching conversion factor.
double parse_dimensioned(KeyTable& table, const std::string& section, const std::string& key,
                         const std::vector<std::pair<std::string, double>>& units,
                         double default_value, std::vector<std::string>& warnings,
                         const std::string& canonical_unit) {
    const auto raw = table.take(section, key);
    if (!raw) {
        warnings.push_back("[" + section + "] " + key + " missing; using default " +
                           fmt9(default_value) + " " + canonical_unit);
        return default_value;
    }
    const auto toks = split_ws(raw->value);
    if (toks.size() != 2)
        fail(table, *raw,
             "key '" + key + "' requires 'value unit' with unit one of those documented");
    const double v = parse_number(table, *raw, toks[0]);
    for (const auto& [name, factor] : units)
        if (toks[1] == name) return v * factor;
    std::string allowed;
    for (const auto& [name, factor] : units) allowed += (allowed.empty() ? "" : ", ") + name;
    fail(table, *raw, "unit mismatch for '" + key + "': got '" + toks[1] + "', expected " +
                          allowed);
}

double parse_freq_mhz(KeyTable& t, const std::string& sec, const std::string& key,
                      double def, std::vector<std::string>& warn) {
    return parse_dimensioned(t, sec, key, {{"MHz_2pi", 1.0}}, def, warn, "MHz_2pi");
}

double parse_time_ns(KeyTable& t, const std::string& sec, const std::string& key, double def,
                     std::vector<std::string>& warn) {
    return parse_dimensioned(t, sec, key, {{"ns", 1.0}, {"us", 1e3}, {"s", 1e9}}, def, warn,
                             "ns");
}

double parse_gauss(KeyTable& t, const std::string& sec, const std::string& key, double def,
                   std::vector<std::string>& warn) {
    return parse_dimensioned(t, sec, key, {{"G", 1.0}, {"T", 1e4}}, def, warn, "G");
}

double parse_zeeman(KeyTable& t, const std::string& sec, const std::string& key, double def,
                    std::vector<std::string>& warn) {
    return parse_dimensioned(t, sec, key, {{"MHz_2pi_per_G", 1.0}}, def, warn,
                             "MHz_2pi_per_G");
}

double parse_plain(KeyTable& t, const std::string& sec, const std::string& key, double def,
                   std::vector<std::string>& warn) {
    const auto raw = t.take(sec, key);
    if (!raw) {
        warn.push_back("[" + sec + "] " + key + " missing; using default " + fmt9(def));
        return def;
    }
    const auto toks = split_ws(raw->value);
    if (toks.size() != 1) fail(t, *raw, "key '" + key + "' takes a bare number (no unit)");
    return parse_number(t, *raw, toks[0]);
}

int parse_int(KeyTable& t, const std::string& sec, const std::string& key, int def,
              std::vector<std::string>& warn) {
    const double v = parse_plain(t, sec, key, double(def), warn);
    if (std::abs(v - std::round(v)) > 1e-9)
        throw ConfigError("[" + sec + "] " + key + " must be an integer");
    return static_cast<int>(std::llround(v));
}

bool parse_bool(KeyTable& t, const std::string& sec, const std::string& key, bool def,
                std::vector<std::string>& warn) {
    const auto raw = t.take(sec, key);
    if (!raw) {
        warn.push_back("[" + sec + "] " + key + " missing; using default " +
                       (def ? "true" : "false"));
        return def;
    }
    const std::string v = trim(raw->value);
    if (v == "true") return true;
    if (v == "false") return false;
    fail(t, *raw, "key '" + key + "' must be 'true' or 'false'");
}

std::string parse_token(KeyTable& t, const std::string& sec, const std::string& key,
                        const std::vector<std::string>& allowed, const std::string& def,
                        std::vector<std::string>& warn) {
    const auto raw = t.take(sec, key);
    if (!raw) {
        warn.push_back("[" + sec + "] " + key + " missing; using default " + def);
        return def;
    }
    const std::string v = trim(raw->value);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(t, *raw, "key '" + key + "' must be one of: " + list);
    }
    return v;
}

} // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.l397 = {-11.4, 18.2, "pi"};
    c.l850 = {-1.1, 6.5, "sigma_pm"};
    c.l854 = {24.8, 8.9, "sigma_pm"};
    c.atom = {20.98, 1.443, 21.49, 0.152, 1.35, 0.78, 1.3996245};
    c.cavity = {5.3, 4.2, -11.4, 3.1, 1, 2};
    return c;
}

model::SystemParams RunConfig::to_system_params() const {
    model::SystemParams p;
    auto to_laser = [](const Laser& l) {
        model::LaserParams lp;
        lp.detuning = mhz_to_rad(l.detuning_mhz);
        lp.rabi = mhz_to_rad(l.rabi_mhz);
        if (l.pol == "pi")
            lp.pol = model::Polarization::pure_pi();
        else if (l.pol == "sigma_pm")
            lp.pol = model::Polarization::sigma_pm();
        else
            throw ConfigError("unknown polarization token '" + l.pol + "'");
        return lp;
    };
    p.l397 = to_laser(l397);
    p.l850 = to_laser(l850);
    p.l854 = to_laser(l854);

    p.decay.p12_s12 = mhz_to_rad(atom.gamma_p12_s12_mhz);
    p.decay.p12_d32 = mhz_to_rad(atom.gamma_p12_d32_mhz);
    p.decay.p32_s12 = mhz_to_rad(atom.gamma_p32_s12_mhz);
    p.decay.p32_d32 = mhz_to_rad(atom.gamma_p32_d32_mhz);
    p.decay.p32_d52 = mhz_to_rad(atom.gamma_p32_d52_mhz);
    p.b_field = atom.b_field_gauss * 1e-4;
    p.zeeman_unit = mhz_to_rad(atom.zeeman_unit_mhz_per_gauss) / 1e-4;

    p.g_bar = mhz_to_rad(cavity.g_bar_mhz);
    p.kappa = mhz_to_rad(cavity.kappa_mhz);
    p.delta_cav = mhz_to_rad(cavity.delta_cav_mhz);
    p.sigma_inhom = mhz_to_rad(cavity.sigma_inhom_mhz);
    p.fock_cutoff = cavity.fock_cutoff;
    p.cavity_modes = cavity.cavity_modes;

    if (rabi_convention == "reduced")
        p.rabi_convention = model::RabiConvention::Reduced;
    else if (rabi_convention == "strongest")
        p.rabi_convention = model::RabiConvention::Strongest;
    else
        throw ConfigError("unknown rabi_convention '" + rabi_convention + "'");

    p.validate();
    return p;
}

experiments::TransientSettings RunConfig::to_transient_settings() const {
    experiments::TransientSettings s;
    s.t_max = transient.t_max_ns * 1e-9;
    s.samples = transient.samples;
    s.window_tau_factor = transient.window_tau_factor;
    s.broaden_transient = transient.broaden_transient;
    s.include_393 = transient.include_393;
    s.gh_nodes = transient.gh_nodes;
    s.rel_tol = transient.rel_tol;
    return s;
}

experiments::ScanSettings RunConfig::to_scan_settings() const {
    experiments::ScanSettings s;
    s.gh_nodes = scan.gh_nodes;
    s.baseline_offset = mhz_to_rad(scan.baseline_offset_mhz);
    s.include_393 = scan.include_393;
    return s;
}

std::vector<double> RunConfig::scan_grid() const {
    const double center = mhz_to_rad(l397.detuning_mhz);
    const double halfspan = mhz_to_rad(scan.halfspan_mhz);
    std::vector<double> grid(static_cast<std::size_t>(scan.points));
    for (int i = 0; i < scan.points; ++i)
        grid[static_cast<std::size_t>(i)] =
            center - halfspan + 2.0 * halfspan * i / double(scan.points - 1);
    return grid;
}

experiments::InversionGrid RunConfig::to_inversion_grid() const {
    experiments::InversionGrid g;
    g.g_min = mhz_to_rad(inversion.g_min_mhz);
    g.g_max = mhz_to_rad(inversion.g_max_mhz);
    g.g_points = inversion.g_points;
    g.sigma_min = mhz_to_rad(inversion.sigma_min_mhz);
    g.sigma_max = mhz_to_rad(inversion.sigma_max_mhz);
    g.sigma_points = inversion.sigma_points;
    return g;
}

experiments::InversionSettings RunConfig::to_inversion_settings() const {
    experiments::InversionSettings s;
    s.t_max = inversion.t_max_ns * 1e-9;
    s.samples = inversion.samples;
    s.rel_tol = inversion.rel_tol;
    s.include_393 = inversion.include_393;
    s.offset_points = inversion.offset_points;
    s.scan_halfspan = mhz_to_rad(inversion.scan_halfspan_mhz);
    s.scan_points = inversion.scan_points;
    s.dense_step = mhz_to_rad(inversion.dense_step_mhz);
    s.gh_nodes = inversion.gh_nodes;
    s.refine = inversion.refine;
    return s;
}

experiments::SuppressionSettings RunConfig::to_suppression_settings() const {
    experiments::SuppressionSettings s;
    s.scan_halfspan = mhz_to_rad(suppression.scan_halfspan_mhz);
    s.scan_points = suppression.scan_points;
    s.gh_nodes = suppression.gh_nodes;
    return s;
}

std::vector<double> RunConfig::delta850_list() const {
    std::vector<double> out(static_cast<std::size_t>(suppression.delta850_points));
    const double lo = mhz_to_rad(suppression.delta850_min_mhz);
    const double hi = mhz_to_rad(suppression.delta850_max_mhz);
    for (int i = 0; i < suppression.delta850_points; ++i)
        out[static_cast<std::size_t>(i)] =
            suppression.delta850_points == 1
                ? lo
                : lo + (hi - lo) * i / double(suppression.delta850_points - 1);
    return out;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    KeyTable table(origin);
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": empty key or value");
        table.insert(section, key, value, line_no);
    }

    RunConfig d = RunConfig::defaults();
    RunConfig c;
    auto& warn = c.warnings;

    c.schema = parse_int(table, "", "schema", d.schema, warn);
    if (c.schema != 1)
        throw ConfigError(origin + ": unsupported schema version " + std::to_string(c.schema));

    auto laser = [&](const char* sec_suffix, const RunConfig::Laser& def) {
        RunConfig::Laser l;
        const std::string sec = "lasers";
        l.detuning_mhz = parse_freq_mhz(table, sec, std::string("detuning_") + sec_suffix,
                                        def.detuning_mhz, warn);
        l.rabi_mhz =
            parse_freq_mhz(table, sec, std::string("rabi_") + sec_suffix, def.rabi_mhz, warn);
        l.pol = parse_token(table, sec, std::string("pol_") + sec_suffix, {"pi", "sigma_pm"},
                            def.pol, warn);
        return l;
    };
    c.l397 = laser("397", d.l397);
    c.l850 = laser("850", d.l850);
    c.l854 = laser("854", d.l854);

    c.atom.gamma_p12_s12_mhz =
        parse_freq_mhz(table, "atom", "gamma_p12_s12", d.atom.gamma_p12_s12_mhz, warn);
    c.atom.gamma_p12_d32_mhz =
        parse_freq_mhz(table, "atom", "gamma_p12_d32", d.atom.gamma_p12_d32_mhz, warn);
    c.atom.gamma_p32_s12_mhz =
        parse_freq_mhz(table, "atom", "gamma_p32_s12", d.atom.gamma_p32_s12_mhz, warn);
    c.atom.gamma_p32_d32_mhz =
        parse_freq_mhz(table, "atom", "gamma_p32_d32", d.atom.gamma_p32_d32_mhz, warn);
    c.atom.gamma_p32_d52_mhz =
        parse_freq_mhz(table, "atom", "gamma_p32_d52", d.atom.gamma_p32_d52_mhz, warn);
    c.atom.b_field_gauss = parse_gauss(table, "atom", "b_field", d.atom.b_field_gauss, warn);
    c.atom.zeeman_unit_mhz_per_gauss =
        parse_zeeman(table, "atom", "zeeman_unit", d.atom.zeeman_unit_mhz_per_gauss, warn);

    c.cavity.g_bar_mhz = parse_freq_mhz(table, "cavity", "g_bar", d.cavity.g_bar_mhz, warn);
    c.cavity.kappa_mhz = parse_freq_mhz(table, "cavity", "kappa", d.cavity.kappa_mhz, warn);
    c.cavity.delta_cav_mhz =
        parse_freq_mhz(table, "cavity", "delta_cav", d.cavity.delta_cav_mhz, warn);
    c.cavity.sigma_inhom_mhz =
        parse_freq_mhz(table, "cavity", "sigma_inhom", d.cavity.sigma_inhom_mhz, warn);
    c.cavity.fock_cutoff = parse_int(table, "cavity", "fock_cutoff", d.cavity.fock_cutoff, warn);
    c.cavity.cavity_modes =
        parse_int(table, "cavity", "cavity_modes", d.cavity.cavity_modes, warn);

    c.rabi_convention = parse_token(table, "model", "rabi_convention",
                                    {"reduced", "strongest"}, d.rabi_convention, warn);

    c.transient.t_max_ns = parse_time_ns(table, "transient", "t_max", d.transient.t_max_ns, warn);
    c.transient.samples = parse_int(table, "transient", "samples", d.transient.samples, warn);
    c.transient.window_tau_factor = parse_plain(table, "transient", "window_tau_factor",
                                                d.transient.window_tau_factor, warn);
    c.transient.broaden_transient = parse_bool(table, "transient", "broaden_transient",
                                               d.transient.broaden_transient, warn);
    c.transient.include_393 =
        parse_bool(table, "transient", "include_393", d.transient.include_393, warn);
    c.transient.gh_nodes = parse_int(table, "transient", "gh_nodes", d.transient.gh_nodes, warn);
    c.transient.rel_tol = parse_plain(table, "transient", "rel_tol", d.transient.rel_tol, warn);

    c.scan.halfspan_mhz = parse_freq_mhz(table, "scan", "halfspan", d.scan.halfspan_mhz, warn);
    c.scan.points = parse_int(table, "scan", "points", d.scan.points, warn);
    c.scan.baseline_offset_mhz =
        parse_freq_mhz(table, "scan", "baseline_offset", d.scan.baseline_offset_mhz, warn);
    c.scan.include_393 = parse_bool(table, "scan", "include_393", d.scan.include_393, warn);
    c.scan.gh_nodes = parse_int(table, "scan", "gh_nodes", d.scan.gh_nodes, warn);

    c.inversion.g_min_mhz = parse_freq_mhz(table, "inversion", "g_min", d.inversion.g_min_mhz, warn);
    c.inversion.g_max_mhz = parse_freq_mhz(table, "inversion", "g_max", d.inversion.g_max_mhz, warn);
    c.inversion.g_points = parse_int(table, "inversion", "g_points", d.inversion.g_points, warn);
    c.inversion.sigma_min_mhz =
        parse_freq_mhz(table, "inversion", "sigma_min", d.inversion.sigma_min_mhz, warn);
    c.inversion.sigma_max_mhz =
        parse_freq_mhz(table, "inversion", "sigma_max", d.inversion.sigma_max_mhz, warn);
    c.inversion.sigma_points =
        parse_int(table, "inversion", "sigma_points", d.inversion.sigma_points, warn);
    c.inversion.tau_target_ns =
        parse_time_ns(table, "inversion", "tau_target", d.inversion.tau_target_ns, warn);
    c.inversion.delta_target_mhz =
        parse_freq_mhz(table, "inversion", "delta_target", d.inversion.delta_target_mhz, warn);
    c.inversion.t_max_ns = parse_time_ns(table, "inversion", "t_max", d.inversion.t_max_ns, warn);
    c.inversion.samples = parse_int(table, "inversion", "samples", d.inversion.samples, warn);
    c.inversion.rel_tol = parse_plain(table, "inversion", "rel_tol", d.inversion.rel_tol, warn);
    c.inversion.offset_points =
        parse_int(table, "inversion", "offset_points", d.inversion.offset_points, warn);
    c.inversion.scan_halfspan_mhz = parse_freq_mhz(table, "inversion", "scan_halfspan",
                                                   d.inversion.scan_halfspan_mhz, warn);
    c.inversion.scan_points =
        parse_int(table, "inversion", "scan_points", d.inversion.scan_points, warn);
    c.inversion.dense_step_mhz =
        parse_freq_mhz(table, "inversion", "dense_step", d.inversion.dense_step_mhz, warn);
    c.inversion.gh_nodes = parse_int(table, "inversion", "gh_nodes", d.inversion.gh_nodes, warn);
    c.inversion.refine = parse_bool(table, "inversion", "refine", d.inversion.refine, warn);
    c.inversion.include_393 =
        parse_bool(table, "inversion", "include_393", d.inversion.include_393, warn);

    c.suppression.delta850_min_mhz = parse_freq_mhz(table, "suppression", "delta850_min",
                                                    d.suppression.delta850_min_mhz, warn);
    c.suppression.delta850_max_mhz = parse_freq_mhz(table, "suppression", "delta850_max",
                                                    d.suppression.delta850_max_mhz, warn);
    c.suppression.delta850_points = parse_int(table, "suppression", "delta850_points",
                                              d.suppression.delta850_points, warn);
    c.suppression.scan_halfspan_mhz = parse_freq_mhz(table, "suppression", "scan_halfspan",
                                                     d.suppression.scan_halfspan_mhz, warn);
    c.suppression.scan_points =
        parse_int(table, "suppression", "scan_points", d.suppression.scan_points, warn);
    c.suppression.gh_nodes = parse_int(table, "suppression", "gh_nodes", d.suppression.gh_nodes, warn);

    c.eq1.v_min = parse_plain(table, "eq1", "v_min", d.eq1.v_min, warn);
    c.eq1.v_max = parse_plain(table, "eq1", "v_max", d.eq1.v_max, warn);
    c.eq1.v_points = parse_int(table, "eq1", "v_points", d.eq1.v_points, warn);
    c.eq1.w_min = parse_plain(table, "eq1", "w_min", d.eq1.w_min, warn);
    c.eq1.w_max = parse_plain(table, "eq1", "w_max", d.eq1.w_max, warn);
    c.eq1.w_points = parse_int(table, "eq1", "w_points", d.eq1.w_points, warn);
    c.eq1.pump_over_gamma1 =
        parse_plain(table, "eq1", "pump_over_gamma1", d.eq1.pump_over_gamma1, warn);

    {
        const auto raw = table.take("output", "out_dir");
        if (raw) {
            c.out_dir = trim(raw->value);
        } else {
            warn.push_back("[output] out_dir missing; using default " + d.out_dir);
            c.out_dir = d.out_dir;
        }
    }

    table.require_empty();

    // Model-level validation (negative rates, bad mode counts, ...).
    c.to_system_params();
    if (c.scan.points < 2 || c.inversion.g_points < 2 || c.inversion.sigma_points < 2 ||
        c.suppression.delta850_points < 1 || c.transient.samples < 8)
        throw ConfigError(origin + ": grid sizes out of range");
    if (c.transient.gh_nodes < 1 || c.scan.gh_nodes < 1 || c.inversion.gh_nodes < 1 ||
        c.suppression.gh_nodes < 1)
        throw ConfigError(origin + ": quadrature node counts must be >= 1");
    if (!(c.transient.rel_tol > 0.0) || !(c.inversion.rel_tol > 0.0))
        throw ConfigError(origin + ": integrator tolerances must be positive");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out << "schema = " << c.schema << "\n\n";
    out << "[lasers]\n";
    auto laser = [&](const char* suffix, const RunConfig::Laser& l) {
        out << "detuning_" << suffix << " = " << fmt9(l.detuning_mhz) << " MHz_2pi\n";
        out << "rabi_" << suffix << " = " << fmt9(l.rabi_mhz) << " MHz_2pi\n";
        out << "pol_" << suffix << " = " << l.pol << "\n";
    };
    laser("397", c.l397);
    laser("850", c.l850);
    laser("854", c.l854);
    out << "\n[atom]\n";
    out << "gamma_p12_s12 = " << fmt9(c.atom.gamma_p12_s12_mhz) << " MHz_2pi\n";
    out << "gamma_p12_d32 = " << fmt9(c.atom.gamma_p12_d32_mhz) << " MHz_2pi\n";
    out << "gamma_p32_s12 = " << fmt9(c.atom.gamma_p32_s12_mhz) << " MHz_2pi\n";
    out << "gamma_p32_d32 = " << fmt9(c.atom.gamma_p32_d32_mhz) << " MHz_2pi\n";
    out << "gamma_p32_d52 = " << fmt9(c.atom.gamma_p32_d52_mhz) << " MHz_2pi\n";
    out << "b_field = " << fmt9(c.atom.b_field_gauss) << " G\n";
    out << "zeeman_unit = " << fmt9(c.atom.zeeman_unit_mhz_per_gauss) << " MHz_2pi_per_G\n";
    out << "\n[cavity]\n";
    out << "g_bar = " << fmt9(c.cavity.g_bar_mhz) << " MHz_2pi\n";
    out << "kappa = " << fmt9(c.cavity.kappa_mhz) << " MHz_2pi\n";
    out << "delta_cav = " << fmt9(c.cavity.delta_cav_mhz) << " MHz_2pi\n";
    out << "sigma_inhom = " << fmt9(c.cavity.sigma_inhom_mhz) << " MHz_2pi\n";
    out << "fock_cutoff = " << c.cavity.fock_cutoff << "\n";
    out << "cavity_modes = " << c.cavity.cavity_modes << "\n";
    out << "\n[model]\n";
    out << "rabi_convention = " << c.rabi_convention << "\n";
    out << "\n[transient]\n";
    out << "t_max = " << fmt9(c.transient.t_max_ns) << " ns\n";
    out << "samples = " << c.transient.samples << "\n";
    out << "window_tau_factor = " << fmt9(c.transient.window_tau_factor) << "\n";
    out << "broaden_transient = " << (c.transient.broaden_transient ? "true" : "false") << "\n";
    out << "include_393 = " << (c.transient.include_393 ? "true" : "false") << "\n";
    out << "gh_nodes = " << c.transient.gh_nodes << "\n";
    out << "rel_tol = " << fmt9(c.transient.rel_tol) << "\n";
    out << "\n[scan]\n";
    out << "halfspan = " << fmt9(c.scan.halfspan_mhz) << " MHz_2pi\n";
    out << "points = " << c.scan.points << "\n";
    out << "baseline_offset = " << fmt9(c.scan.baseline_offset_mhz) << " MHz_2pi\n";
    out << "include_393 = " << (c.scan.include_393 ? "true" : "false") << "\n";
    out << "gh_nodes = " << c.scan.gh_nodes << "\n";
    out << "\n[inversion]\n";
    out << "g_min = " << fmt9(c.inversion.g_min_mhz) << " MHz_2pi\n";
    out << "g_max = " << fmt9(c.inversion.g_max_mhz) << " MHz_2pi\n";
    out << "g_points = " << c.inversion.g_points << "\n";
    out << "sigma_min = " << fmt9(c.inversion.sigma_min_mhz) << " MHz_2pi\n";
    out << "sigma_max = " << fmt9(c.inversion.sigma_max_mhz) << " MHz_2pi\n";
    out << "sigma_points = " << c.inversion.sigma_points << "\n";
    out << "tau_target = " << fmt9(c.inversion.tau_target_ns) << " ns\n";
    out << "delta_target = " << fmt9(c.inversion.delta_target_mhz) << " MHz_2pi\n";
    out << "t_max = " << fmt9(c.inversion.t_max_ns) << " ns\n";
    out << "samples = " << c.inversion.samples << "\n";
    out << "rel_tol = " << fmt9(c.inversion.rel_tol) << "\n";
    out << "offset_points = " << c.inversion.offset_points << "\n";
    out << "scan_halfspan = " << fmt9(c.inversion.scan_halfspan_mhz) << " MHz_2pi\n";
    out << "scan_points = " << c.inversion.scan_points << "\n";
    out << "dense_step = " << fmt9(c.inversion.dense_step_mhz) << " MHz_2pi\n";
    out << "gh_nodes = " << c.inversion.gh_nodes << "\n";
    out << "refine = " << (c.inversion.refine ? "true" : "false") << "\n";
    out << "include_393 = " << (c.inversion.include_393 ? "true" : "false") << "\n";
    out << "\n[suppression]\n";
    out << "delta850_min = " << fmt9(c.suppression.delta850_min_mhz) << " MHz_2pi\n";
    out << "delta850_max = " << fmt9(c.suppression.delta850_max_mhz) << " MHz_2pi\n";
    out << "delta850_points = " << c.suppression.delta850_points << "\n";
    out << "scan_halfspan = " << fmt9(c.suppression.scan_halfspan_mhz) << " MHz_2pi\n";
    out << "scan_points = " << c.suppression.scan_points << "\n";
    out << "gh_nodes = " << c.suppression.gh_nodes << "\n";
    out << "\n[eq1]\n";
    out << "v_min = " << fmt9(c.eq1.v_min) << "\n";
    out << "v_max = " << fmt9(c.eq1.v_max) << "\n";
    out << "v_points = " << c.eq1.v_points << "\n";
    out << "w_min = " << fmt9(c.eq1.w_min) << "\n";
    out << "w_max = " << fmt9(c.eq1.w_max) << "\n";
    out << "w_points = " << c.eq1.w_points << "\n";
    out << "pump_over_gamma1 = " << fmt9(c.eq1.pump_over_gamma1) << "\n";
    out << "\n[output]\n";
    out << "out_dir = " << c.out_dir << "\n";
    return out.str();
}

} // namespace ioncavity::io

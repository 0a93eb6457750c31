#include "ioncavity/csv.hpp"

#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ioncavity/errors.hpp"

#ifndef IONCAVITY_VERSION_STRING
#define IONCAVITY_VERSION_STRING "0.0.0"
#endif

namespace ioncavity::io {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double rad_to_mhz(double w) { return w / (two_pi * 1e6); }

std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string artifact_version() { return IONCAVITY_VERSION_STRING; }

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw InputError("CSV needs at least one column");
}

void CsvWriter::meta_line(const std::string& text) { meta_.push_back("# " + text); }

void CsvWriter::meta_kv(const std::string& key, const std::string& value) {
    meta_line(key + ": " + value);
}

void CsvWriter::meta_standard(const std::string& command, const RunConfig& cfg,
                              const MetaList& extra) {
    meta_kv("artifact_version", artifact_version());
    meta_kv("command", command);
    for (const auto& [k, v] : extra) meta_kv(k, v);
    meta_line("config:");
    std::istringstream in(serialize_config(cfg));
    std::string line;
    while (std::getline(in, line)) meta_line("  " + line);
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_.size())
        throw InputError("CSV row width mismatch");
    std::vector<std::string> cells(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) cells[i] = format_g9(values[i]);
    rows_.push_back(join(cells));
}

void CsvWriter::row_cells(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size())
        throw InputError("CSV row width mismatch");
    rows_.push_back(join(cells));
}

std::string CsvWriter::str() const {
    std::string out;
    for (const auto& m : meta_) {
        out += m;
        out += '\n';
    }
    out += join(columns_);
    out += '\n';
    for (const auto& r : rows_) {
        out += r;
        out += '\n';
    }
    return out;
}

void CsvWriter::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    out << str();
    if (!out) throw InputError("write failed for '" + path + "'");
}

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw InputError("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
    const std::size_t idx = column_index(name);
    std::vector<double> out;
    out.reserve(cells.size());
    for (const auto& row : cells) {
        if (idx >= row.size()) throw InputError("short CSV row");
        out.push_back(std::stod(row[idx]));
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body.front() == ' ') body.erase(0, 1);
            t.meta.push_back(body);
            continue;
        }
        if (!have_header) {
            t.columns = split_commas(line);
            have_header = true;
        } else {
            t.cells.push_back(split_commas(line));
        }
    }
    if (!have_header) throw InputError("CSV has no header row");
    return t;
}

std::string spectrum_csv(const experiments::Spectrum& s, const std::string& command,
                         const RunConfig& cfg, const MetaList& extra) {
    CsvWriter w({"detuning_over_2pi_MHz", "value", "kind"});
    MetaList meta = extra;
    meta.emplace_back("sigma_applied_over_2pi_MHz", format_g9(rad_to_mhz(s.sigma_applied)));
    w.meta_standard(command, cfg, meta);
    const std::string kind = s.kind == experiments::SpectrumKind::CavityEmission
                                 ? "cavity_emission_rate_per_s"
                                 : "uv_fluorescence_normalized";
    for (std::size_t i = 0; i < s.detunings.size(); ++i)
        w.row_cells({format_g9(rad_to_mhz(s.detunings[i])), format_g9(s.values[i]), kind});
    return w.str();
}

std::string transient_csv(const experiments::Transient& t, const std::string& command,
                          const RunConfig& cfg, const MetaList& extra) {
    CsvWriter w({"time_ns", "rate_per_s"});
    MetaList meta = extra;
    meta.emplace_back("fit_tau_ns", format_g9(t.tau_fit * 1e9));
    meta.emplace_back("fit_tau_stderr_ns", format_g9(t.tau_stderr * 1e9));
    meta.emplace_back("fit_amplitude_per_s", format_g9(t.fit.amplitude));
    meta.emplace_back("fit_offset_per_s", format_g9(t.fit.offset));
    meta.emplace_back("fit_rms_residual_per_s", format_g9(t.fit.rms_residual));
    meta.emplace_back("fit_window_points", std::to_string(t.window_points));
    w.meta_standard(command, cfg, meta);
    for (std::size_t i = 0; i < t.times.size(); ++i)
        w.row({t.times[i] * 1e9, t.rate[i]});
    return w.str();
}

std::string inversion_maps_csv(const experiments::InversionMaps& maps,
                               const std::string& command, const RunConfig& cfg,
                               const MetaList& extra) {
    CsvWriter w({"g_bar_over_2pi_MHz", "sigma_over_2pi_MHz", "tau_on_ns",
                 "delta_over_2pi_MHz"});
    w.meta_standard(command, cfg, extra);
    for (std::size_t ig = 0; ig < maps.g_values.size(); ++ig)
        for (std::size_t is = 0; is < maps.sigma_values.size(); ++is)
            w.row({rad_to_mhz(maps.g_values[ig]), rad_to_mhz(maps.sigma_values[is]),
                   maps.tau[ig][is] * 1e9, rad_to_mhz(maps.delta[ig][is])});
    return w.str();
}

std::string inversion_contours_csv(const experiments::InversionResult& r,
                                   const std::string& command, const RunConfig& cfg,
                                   const MetaList& extra) {
    CsvWriter w({"g_bar_over_2pi_MHz", "sigma_over_2pi_MHz", "kind"});
    MetaList meta = extra;
    meta.emplace_back("result_g_bar_over_2pi_MHz", format_g9(rad_to_mhz(r.g_bar)));
    meta.emplace_back("result_sigma_over_2pi_MHz", format_g9(rad_to_mhz(r.sigma)));
    meta.emplace_back("result_residual_over_2pi_MHz", format_g9(rad_to_mhz(r.residual)));
    w.meta_standard(command, cfg, meta);
    for (const auto& pt : r.tau_contour)
        w.row_cells({format_g9(rad_to_mhz(pt.g)), format_g9(rad_to_mhz(pt.sigma)),
                     "tau_level_set"});
    for (const auto& pt : r.delta_contour)
        w.row_cells({format_g9(rad_to_mhz(pt.g)), format_g9(rad_to_mhz(pt.sigma)),
                     "delta_level_set"});
    return w.str();
}

std::string suppression_csv(const std::vector<experiments::SuppressionPoint>& pts,
                            const std::string& command, const RunConfig& cfg,
                            const MetaList& extra) {
    CsvWriter w({"delta850_over_2pi_MHz", "suppression_with_393",
                 "suppression_without_393"});
    w.meta_standard(command, cfg, extra);
    for (const auto& pt : pts)
        w.row({rad_to_mhz(pt.delta850), pt.suppression_with_393,
               pt.suppression_without_393});
    return w.str();
}

std::string eq1_csv(const std::vector<Eq1Row>& rows, const std::string& command,
                    const RunConfig& cfg, const MetaList& extra) {
    CsvWriter w({"v", "w", "normalized_fluorescence"});
    w.meta_standard(command, cfg, extra);
    for (const auto& r : rows) w.row({r.v, r.w, r.value});
    return w.str();
}

} // namespace ioncavity::io

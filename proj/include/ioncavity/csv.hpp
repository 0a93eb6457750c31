#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ioncavity/config.hpp"
#include "ioncavity/experiments.hpp"

namespace ioncavity::io {

// %.9g -- every double in a CSV goes through this, which is what makes the
// parse-back bit-identical at 9 significant digits.
std::string format_g9(double v);

using MetaList = std::vector<std::pair<std::string, std::string>>;

// In-memory CSV assembly: '#'-prefixed metadata block (artifact version,
// command, resolved config echo, extra key/value pairs), then a header row,
// then data rows.  Deterministic: output depends only on the arguments.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns);

    void meta_line(const std::string& text);
    void meta_kv(const std::string& key, const std::string& value);
    void meta_standard(const std::string& command, const RunConfig& cfg,
                       const MetaList& extra = {});
    void row(const std::vector<double>& values);
    void row_cells(const std::vector<std::string>& cells);

    std::string str() const;
    void save(const std::string& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::string> meta_;
    std::vector<std::string> rows_;
};

// Parsed CSV (round-trip checks, downstream plotting).
struct CsvTable {
    std::vector<std::string> meta;    // '#' lines, prefix stripped
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> cells;

    std::size_t column_index(const std::string& name) const;
    std::vector<double> numeric_column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);

std::string artifact_version();

// Canonical emitters, one per pipeline artifact.
std::string spectrum_csv(const experiments::Spectrum& s, const std::string& command,
                         const RunConfig& cfg, const MetaList& extra = {});
std::string transient_csv(const experiments::Transient& t, const std::string& command,
                          const RunConfig& cfg, const MetaList& extra = {});
std::string inversion_maps_csv(const experiments::InversionMaps& maps,
                               const std::string& command, const RunConfig& cfg,
                               const MetaList& extra = {});
std::string inversion_contours_csv(const experiments::InversionResult& r,
                                   const std::string& command, const RunConfig& cfg,
                                   const MetaList& extra = {});
std::string suppression_csv(const std::vector<experiments::SuppressionPoint>& pts,
                            const std::string& command, const RunConfig& cfg,
                            const MetaList& extra = {});
struct Eq1Row {
    double v = 0.0;
    double w = 0.0;
    double value = 0.0;
};
std::string eq1_csv(const std::vector<Eq1Row>& rows, const std::string& command,
                    const RunConfig& cfg, const MetaList& extra = {});

} // namespace ioncavity::io

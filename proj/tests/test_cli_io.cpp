#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ioncavity/config.hpp"
#include "ioncavity/csv.hpp"
#include "ioncavity/errors.hpp"

using namespace ioncavity;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("ioncavity_test_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(IONCAVITY_BIN) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

} // namespace

TEST_SUITE("cli_io") {

TEST_CASE("defaults carry the measured drive and cavity parameters") {
    const io::RunConfig cfg = io::RunConfig::defaults();
    CHECK(cfg.l397.detuning_mhz == -11.4);
    CHECK(cfg.l397.rabi_mhz == 18.2);
    CHECK(cfg.l850.detuning_mhz == -1.1);
    CHECK(cfg.l850.rabi_mhz == 6.5);
    CHECK(cfg.l854.detuning_mhz == 24.8);
    CHECK(cfg.l854.rabi_mhz == 8.9);
    CHECK(cfg.atom.gamma_p12_s12_mhz == 20.98);
    CHECK(cfg.atom.gamma_p12_d32_mhz == 1.443);
    CHECK(cfg.atom.gamma_p32_s12_mhz == 21.49);
    CHECK(cfg.atom.gamma_p32_d32_mhz == 0.152);
    CHECK(cfg.atom.gamma_p32_d52_mhz == 1.35);
    CHECK(cfg.atom.b_field_gauss == 0.78);
    CHECK(cfg.cavity.g_bar_mhz == 5.3);
    CHECK(cfg.cavity.kappa_mhz == 4.2);
    CHECK(cfg.cavity.delta_cav_mhz == -11.4);
    CHECK(cfg.cavity.sigma_inhom_mhz == 3.1);

    // Human units to angular frequency is one exact multiplication.
    const double two_pi = 2.0 * std::numbers::pi;
    const auto p = cfg.to_system_params();
    CHECK(p.l397.detuning == -11.4 * two_pi * 1e6);
    CHECK(p.l397.rabi == 18.2 * two_pi * 1e6);
    CHECK(p.kappa == 4.2 * two_pi * 1e6);
    CHECK(p.g_bar == 5.3 * two_pi * 1e6);
}

TEST_CASE("empty config falls back to defaults with warnings") {
    const io::RunConfig cfg = io::parse_config("", "empty");
    CHECK(!cfg.warnings.empty());
    CHECK(io::serialize_config(cfg) == io::serialize_config(io::RunConfig::defaults()));
}

TEST_CASE("config text round-trips through serialize and parse") {
    io::RunConfig cfg = io::RunConfig::defaults();
    cfg.cavity.g_bar_mhz = 4.75;
    cfg.scan.points = 29;
    const std::string text = io::serialize_config(cfg);
    const io::RunConfig back = io::parse_config(text, "roundtrip");
    CHECK(back.warnings.empty());
    CHECK(io::serialize_config(back) == text);
    CHECK(back.cavity.g_bar_mhz == 4.75);
    CHECK(back.scan.points == 29);
}

TEST_CASE("config rejects bad input") {
    SUBCASE("negative kappa") {
        CHECK_THROWS_AS(io::parse_config("schema = 1\n[cavity]\nkappa = -4.2 MHz_2pi\n", "t"),
                        ConfigError);
    }
    SUBCASE("unknown key") {
        CHECK_THROWS_AS(io::parse_config("schema = 1\n[cavity]\nfinesse = 40000\n", "t"),
                        ConfigError);
    }
    SUBCASE("missing unit suffix") {
        CHECK_THROWS_AS(io::parse_config("schema = 1\n[cavity]\nkappa = 4.2\n", "t"),
                        ConfigError);
    }
    SUBCASE("wrong unit") {
        CHECK_THROWS_AS(io::parse_config("schema = 1\n[cavity]\nkappa = 4.2 GHz\n", "t"),
                        ConfigError);
    }
    SUBCASE("malformed line") {
        CHECK_THROWS_AS(io::parse_config("schema = 1\nthis is not a key value pair\n", "t"),
                        ConfigError);
    }
}

TEST_CASE("CSV values survive a parse round-trip at nine significant digits") {
    const std::vector<double> gnarly = {std::numbers::pi * 1e6, 1.0 / 3.0,       1246e-9,
                                        5.3 * 2e6 * std::numbers::pi, -0.46789123, 1e-18,
                                        2.0999999e7};
    io::CsvWriter w({"a", "b"});
    w.meta_kv("purpose", "roundtrip");
    for (const double v : gnarly) w.row({v, v * 3.0});
    const std::string text = w.str();

    const io::CsvTable t = io::parse_csv(text);
    REQUIRE(t.columns == std::vector<std::string>{"a", "b"});
    const auto a = t.numeric_column("a");
    const auto b = t.numeric_column("b");
    REQUIRE(a.size() == gnarly.size());
    for (std::size_t i = 0; i < gnarly.size(); ++i) {
        CHECK(io::format_g9(a[i]) == io::format_g9(gnarly[i]));
        CHECK(io::format_g9(b[i]) == io::format_g9(gnarly[i] * 3.0));
    }
}

TEST_CASE("spectrum CSV embeds the producing command and resolved config") {
    experiments::Spectrum s;
    s.detunings = {-1.0e6, 0.0, 1.0e6};
    s.values = {0.5, 0.9, 0.5};
    s.kind = experiments::SpectrumKind::UvFluorescenceNormalized;
    const std::string text =
        io::spectrum_csv(s, "scan", io::RunConfig::defaults(), {{"note", "unit-test"}});
    const io::CsvTable t = io::parse_csv(text);
    REQUIRE(t.columns.size() == 3);
    CHECK(t.columns[0] == "detuning_over_2pi_MHz");
    bool has_command = false, has_version = false, has_config = false, has_note = false;
    for (const auto& m : t.meta) {
        if (m.find("command: scan") != std::string::npos) has_command = true;
        if (m.find("artifact_version") != std::string::npos ||
            m.find(io::artifact_version()) != std::string::npos)
            has_version = true;
        if (m.find("kappa = 4.2 MHz_2pi") != std::string::npos) has_config = true;
        if (m.find("note: unit-test") != std::string::npos) has_note = true;
    }
    CHECK(has_command);
    CHECK(has_version);
    CHECK(has_config);
    CHECK(has_note);
}

TEST_CASE("cli: exit codes and usage") {
    CHECK(run_cli("validate") == 0);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("scan --bogus-flag") == 1);
    CHECK(run_cli("") == 1);
}

TEST_CASE("cli: config errors exit 1, solver errors exit 2") {
    const fs::path dir = fresh_dir("cli_errors");
    const fs::path bad = dir / "bad.cfg";
    write_file(bad, "schema = 1\n[cavity]\nfinesse = 40000\n");
    CHECK(run_cli("validate --config " + bad.string()) == 1);

    // 397 off makes S1/2 absorbing: the driven steady state is degenerate and
    // the pinned solve reports it.
    const fs::path dark = dir / "dark.cfg";
    write_file(dark, "schema = 1\n[lasers]\nrabi_397 = 0 MHz_2pi\n[output]\nout_dir = " +
                         (dir / "out").string() + "\n");
    CHECK(run_cli("shelve --cavity off --config " + dark.string()) == 2);
}

TEST_CASE("cli: environment variable supplies the default config path") {
    const fs::path dir = fresh_dir("cli_env");
    const fs::path bad = dir / "bad.cfg";
    write_file(bad, "schema = 1\n[cavity]\nfinesse = 40000\n");
    const std::string cmd = "IONCAVITY_CONFIG=" + bad.string() + " " +
                            std::string(IONCAVITY_BIN) + " validate >/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 1);
}

TEST_CASE("cli: eq1 emits a parseable table") {
    const fs::path dir = fresh_dir("cli_eq1");
    CHECK(run_cli("eq1 --out " + dir.string()) == 0);
    const io::CsvTable t = io::parse_csv(slurp(dir / "eq1_table.csv"));
    CHECK(t.columns == std::vector<std::string>{"v", "w", "value"});
    CHECK(t.cells.size() == 100); // 10 x 10 default grid
    const auto vals = t.numeric_column("value");
    for (const double v : vals) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("cli: scan output is byte-identical across thread counts") {
    const fs::path dir = fresh_dir("cli_threads");
    const fs::path cfg = dir / "tiny.cfg";
    write_file(cfg, "schema = 1\n[scan]\nhalfspan = 10 MHz_2pi\npoints = 5\ngh_nodes = 3\n"
                    "[output]\nout_dir = " +
                        (dir / "out").string() + "\n");
    REQUIRE(run_cli("scan --config " + cfg.string() + " --threads 1") == 0);
    const std::string cav1 = slurp(dir / "out" / "scan_cavity_emission.csv");
    const std::string uv1 = slurp(dir / "out" / "scan_uv_normalized.csv");
    REQUIRE(run_cli("scan --config " + cfg.string() + " --threads 4") == 0);
    CHECK(slurp(dir / "out" / "scan_cavity_emission.csv") == cav1);
    CHECK(slurp(dir / "out" / "scan_uv_normalized.csv") == uv1);
    CHECK(!cav1.empty());
}

} // TEST_SUITE

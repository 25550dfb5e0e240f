#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cavarray/cli.hpp"
#include "cavarray/errors.hpp"

using namespace cavarray;
using namespace cavarray::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / ("cavarray_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string config_path(const std::string& name) { return std::string(CAVARRAY_CONFIGS) + "/" + name + ".cfg"; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::string& command, RunConfig cfg, const std::string& out) {
    cfg.out = (scratch() / out).string();
    std::ostringstream log;
    return run_command(command, cfg, log);
}

int run_tool(const std::string& args) {
    const std::string cmd = std::string(CAVARRAY_TOOL) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    RunConfig cfg;
    apply_config_text(cfg, "# comment\n t = 2 # trailing\n\nomega=1\naxis1 = k\naxis1_count = 10\nengine = both\n");
    CHECK(cfg.physics.at("t") == 2.0);
    CHECK(cfg.physics.at("omega") == 1.0);
    CHECK(cfg.axis1.name == "k");
    CHECK(cfg.axis1.count == 10);
    CHECK(cfg.engine == Engine::both);
    CHECK(cfg.entries.size() == 5);

    CHECK_THROWS_WITH_AS(apply_config_text(cfg, "t = 1\nfoo = 3\n"), doctest::Contains("foo"), ConfigError);
    CHECK_THROWS_WITH_AS(apply_config_text(cfg, "t = 1\nfoo = 3\n"), doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(cfg, "t 1\n"), ConfigError);
    CHECK_THROWS_WITH_AS(apply_setting(cfg, "t", "abc"), doctest::Contains("t:"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "t", "nan"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "axis1", "bogus"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "engine", "fast"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "workers", "0"), ConfigError);
    CHECK_THROWS_AS(apply_setting(cfg, "D", ""), ConfigError);

    const auto [k, v] = split_assignment(" Omega = 0.5 ");
    CHECK(k == "Omega");
    CHECK(v == "0.5");
    CHECK_THROWS_AS((void)split_assignment("Omega"), ConfigError);
}

TEST_CASE("physical validation happens before computation") {
    for (const char* bad : {"t = 0", "t = -1", "Gamma = -0.1", "D = 0", "gamma2 = -1"}) {
        RunConfig cfg = load_config(config_path("fig3a"));
        apply_config_text(cfg, std::string(bad) + "\nnodes = 2\n");
        CHECK_THROWS_AS((void)validate_config(cfg), ConfigError);
        CHECK(run("spectrum", cfg, "invalid.csv") == kExitConfig);
        CHECK_FALSE(fs::exists(scratch() / "invalid.csv"));
    }
    RunConfig cfg = load_config(config_path("fig3a"));
    cfg.physics["t"] = 0.0;
    try {
        (void)validate_config(cfg);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("t") != std::string::npos);
    }
    CHECK_THROWS_AS((void)load_config("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("csv formatting and round trip") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");

    std::mt19937_64 rng(61);
    std::ostringstream out;
    std::vector<std::vector<double>> rows;
    {
        CsvWriter w(out, {"a", "b"});
        for (int i = 0; i < 2000; ++i) {
            double x, y;
            std::uint64_t bits = rng();
            std::memcpy(&x, &bits, sizeof x);
            if (!std::isfinite(x)) x = 1.0 / 3.0;
            y = std::ldexp(double(rng() % 1000003), -int(rng() % 1000)) * (i % 2 ? -1 : 1);
            w << x << y;
            w.end_row();
            rows.push_back({x, y});
        }
    }
    const std::string text = out.str();
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.substr(0, 4) == "a,b\n");
    const CsvTable table = parse_csv(text);
    REQUIRE(table.rows.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(std::memcmp(table.rows[i].data(), rows[i].data(), 2 * sizeof(double)) == 0);
    }

    std::ostringstream o2;
    CsvWriter w2(o2, {"a", "b"});
    w2 << 1.0;
    CHECK_THROWS(w2.end_row());
}

TEST_CASE("spectrum outputs") {
    RunConfig cfg = load_config(config_path("fig3a"));
    REQUIRE(run("spectrum", cfg, "fig3a.csv") == kExitOk);
    const CsvTable t = read_csv((scratch() / "fig3a.csv").string());
    CHECK(t.header == std::vector<std::string>{"k", "eps_k", "Re_r", "Im_r", "Re_s", "Im_s", "R", "T", "xi", "singular_flag"});
    REQUIRE(t.rows.size() == 2000);
    std::size_t nearest = 0;
    const std::size_t eps = t.column("eps_k");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (std::abs(t.rows[i][eps]) < std::abs(t.rows[nearest][eps])) nearest = i;
    }
    CHECK(t.rows[nearest][t.column("R")] <= 1e-6);

    const auto meta = nlohmann::json::parse(slurp(scratch() / "fig3a.csv.meta.json"));
    CHECK(meta["command"] == "spectrum");
    CHECK(meta["parameters"]["t"] == 2.0);
    CHECK(meta["engine"] == "analytic");
    CHECK(meta.contains("tolerances"));
    CHECK(meta.contains("tool_version"));
    CHECK(meta.contains("git_hash"));
    CHECK(meta.contains("timestamp"));

    REQUIRE(run("spectrum", load_config(config_path("no_atom")), "none.csv") == kExitOk);
    const CsvTable none = read_csv((scratch() / "none.csv").string());
    for (const auto& row : none.rows) CHECK(row[none.column("R")] == 0.0);

    REQUIRE(run("spectrum", load_config(config_path("fig7")), "fig7.csv") == kExitOk);
    const CsvTable f7 = read_csv((scratch() / "fig7.csv").string());
    double max_R = 0.0, max_T = 0.0, min_xi = 1.0;
    for (const auto& row : f7.rows) {
        max_R = std::max(max_R, row[f7.column("R")]);
        max_T = std::max(max_T, row[f7.column("T")]);
        min_xi = std::min(min_xi, row[f7.column("xi")]);
    }
    CHECK(max_R < 1.0);
    CHECK(max_T < 1.0);
    CHECK(min_xi >= 0.0);

    RunConfig both = load_config(config_path("fig3a"));
    both.engine = Engine::both;
    both.axis1.count = 50;
    REQUIRE(run("spectrum", both, "both.csv") == kExitOk);
    const CsvTable tb = read_csv((scratch() / "both.csv").string());
    for (const auto& row : tb.rows) {
        CHECK(std::abs(row[tb.column("Re_r")] - row[tb.column("Re_r_oracle")]) < 1e-8);
    }

    REQUIRE(run("spectrum", load_config(config_path("fig6b")), "fig6b.csv") == kExitOk);
    const CsvTable d = read_csv((scratch() / "fig6b.csv").string());
    CHECK(d.header.front() == "D");
    CHECK(d.rows.size() == 40);

    for (const char* limit : {"fig5", "fig5_low"}) {
        REQUIRE(run("spectrum", load_config(config_path(limit)), std::string(limit) + ".csv") == kExitOk);
        const CsvTable l = read_csv((scratch() / (std::string(limit) + ".csv")).string());
        CHECK(l.rows.size() == 2000);
        for (const auto& row : l.rows) CHECK(row[l.column("singular_flag")] != 2.0);
    }
}

TEST_CASE("identical configs give identical files") {
    RunConfig cfg = load_config(config_path("fig4"));
    cfg.axis1.count = 60;
    cfg.axis2.count = 50;
    REQUIRE(run("map2d", cfg, "a.csv") == kExitOk);
    cfg.workers = 3;
    REQUIRE(run("map2d", cfg, "b.csv") == kExitOk);
    CHECK(slurp(scratch() / "a.csv") == slurp(scratch() / "b.csv"));
}

TEST_CASE("map2d") {
    RunConfig cfg = load_config(config_path("fig4"));
    cfg.axis1 = {"Omega", 0.5, std::nullopt, 1};
    cfg.axis2 = {"omega_C", 0.5, std::nullopt, 1};
    REQUIRE(run("map2d", cfg, "one.csv") == kExitOk);
    const CsvTable one = read_csv((scratch() / "one.csv").string());
    CHECK(one.rows.size() == 1);
    CHECK(one.header == std::vector<std::string>{"Omega", "omega_C", "R", "singular_flag"});

    RunConfig missing = load_config(config_path("fig4"));
    missing.axis2 = {};
    CHECK(run("map2d", missing, "missing.csv") == kExitConfig);

    // Omega = 0 column: the ridge sits where E(k) = omega_e
    RunConfig zero = load_config(config_path("fig4"));
    zero.physics["k"] = 1.3;
    zero.axis1 = {"Omega", 0.0, 0.0, 1};
    zero.axis2 = {"omega_e", -2.0, 4.0, 601};
    REQUIRE(run("map2d", zero, "zero.csv") == kExitOk);
    const CsvTable z = read_csv((scratch() / "zero.csv").string());
    std::size_t arg = 0;
    for (std::size_t i = 0; i < z.rows.size(); ++i) {
        if (z.rows[i][2] > z.rows[arg][2]) arg = i;
    }
    const double e = 1.0 - 4.0 * std::cos(1.3);
    CHECK(std::abs(z.rows[arg][1] - e) <= 0.01 + 1e-12);
}

TEST_CASE("quasibound outputs") {
    REQUIRE(run("quasibound", load_config(config_path("resonant_d10")), "qb.csv") == kExitOk);
    const CsvTable t = read_csv((scratch() / "qb.csv").string());
    CHECK(t.header == std::vector<std::string>{"n", "Re_k", "Im_k", "Re_E", "Im_E", "leakage", "residual"});
    REQUIRE(t.rows.size() == 9);
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(t.rows[i][0] == double(i + 1));
        CHECK(std::abs(t.rows[i][1] - kPi * (i + 1) / 10) < 1e-3);
        CHECK(std::abs(t.rows[i][2]) <= 1e-8);
    }
    const CsvTable p = read_csv((scratch() / "qb.csv.profile.csv").string());
    CHECK(p.header == std::vector<std::string>{"j", "Re_u", "Im_u"});
    CHECK(p.rows.size() == 11);
    const auto meta = nlohmann::json::parse(slurp(scratch() / "qb.csv.meta.json"));
    CHECK(meta.contains("seed_failures"));

    RunConfig d1 = load_config(config_path("resonant_d10"));
    d1.physics["D"] = 1;
    d1.profile_n = 0;
    REQUIRE(run("quasibound", d1, "d1.csv") == kExitOk);
    CHECK(read_csv((scratch() / "d1.csv").string()).rows.empty());

    REQUIRE(run("quasibound", load_config(config_path("detuned_d10")), "det.csv") == kExitOk);
    const CsvTable det = read_csv((scratch() / "det.csv").string());
    REQUIRE_FALSE(det.rows.empty());
    for (const auto& row : det.rows) CHECK(row[det.column("leakage")] > 0.0);

    RunConfig single = load_config(config_path("fig3a"));
    CHECK(run("quasibound", single, "single.csv") == kExitConfig);
}

TEST_CASE("oracle-check suites") {
    CHECK(run("oracle-check", load_config(config_path("oracle_default")), "od.csv") == kExitOk);
    CHECK(run("oracle-check", load_config(config_path("oracle_decay")), "odc.csv") == kExitOk);
    CHECK(run("oracle-check", load_config(config_path("oracle_negative")), "on.csv") == kExitCheckFailed);
    const auto meta = nlohmann::json::parse(slurp(scratch() / "on.csv.meta.json"));
    CHECK(meta["pass"] == false);
}

TEST_CASE("wavepacket and modes") {
    RunConfig wp = load_config(config_path("fig3a"));
    wp.physics["eps_k"] = 0.0;
    wp.axis1 = {};
    REQUIRE(run("wavepacket", wp, "wp.csv") == kExitOk);
    const CsvTable t = read_csv((scratch() / "wp.csv").string());
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][t.column("T_meas")] >= 0.98);
    CHECK(t.rows[0][t.column("norm_drift")] <= 1e-8);
    CHECK(fs::exists(scratch() / "wp.csv.history.csv"));

    RunConfig m = load_config(config_path("resonant_d10"));
    m.physics["t"] = 1.0;
    m.profile_n = 3;
    m.dump_mode = 0;
    REQUIRE(run("modes", m, "modes.csv") == kExitOk);
    const CsvTable modes = read_csv((scratch() / "modes.csv").string());
    CHECK(modes.header.back() == "overlap");
    CHECK(modes.rows.size() == 51 + 4);
    const CsvTable wf = read_csv((scratch() / "modes.csv.mode0.csv").string());
    CHECK(wf.header == std::vector<std::string>{"site", "Re", "Im"});
    CHECK(wf.rows.size() == 51);
}

TEST_CASE("tool executable flags and exit codes") {
    const std::string out = (scratch() / "tool.csv").string();
    CHECK(run_tool("spectrum --config " + config_path("fig3a") + " --set axis1_count=20 --workers 2 --engine both --out " + out) == 0);
    const CsvTable t = read_csv(out);
    CHECK(t.rows.size() == 20);
    CHECK(t.header.back() == "Im_s_oracle");
    CHECK(run_tool("spectrum --config " + config_path("fig3a") + " --set nonsense=1 --out " + out) == kExitConfig);
    CHECK(run_tool("spectrum --config " + config_path("fig3a") + " --set t=-2 --out " + out) == kExitConfig);
    CHECK(run_tool("oracle-check --config " + config_path("oracle_negative") + " --out " + out) == 1);
    CHECK(run_tool("oracle-check --config " + config_path("oracle_default") + " --out " + out) == 0);
    CHECK(run_tool("spectrum --config " + config_path("fig3a")) != 0);
}

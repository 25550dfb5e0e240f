#pragma once

// Batch front end: flat key=value run configurations, CSV writers and the
// subcommands of the cavarray tool.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cavarray/quasibound.hpp"
#include "cavarray/sweep.hpp"

namespace cavarray::cli {

struct AxisConfig {
    std::string name;
    std::optional<double> min;
    std::optional<double> max;
    int count = 0;

    [[nodiscard]] bool defined() const { return !name.empty(); }
};

struct RunConfig {
    ParameterMap physics;
    AxisConfig axis1;
    AxisConfig axis2;
    Quantity quantity = Quantity::R;
    Engine engine = Engine::analytic;
    Convention convention = Convention::physical;
    std::optional<EnergyRegime> regime;  ///< spectrum only; unset = exact lineshape
    LimitWindow limit_window;
    int workers = 1;
    double singular_tolerance = kDefaultSingularTolerance;
    double resonance_tolerance = 1e-14;
    int oracle_margin = 10;
    double oracle_threshold = 1e-8;

    SearchWindow window;
    RootSearchOptions roots;
    int profile_n = 0;  ///< 0: no bound-profile output

    double sigma = 25.0;
    double dt = 0.0;
    double drift_bound = 1e-8;
    bool check_wavepacket = false;

    int chain_N = 0;  ///< 0: sized automatically
    double kappa = 0.0;
    int dump_mode = -1;

    std::string out;

    /// Every key=value binding in the order applied (file first, then overrides).
    std::vector<std::pair<std::string, std::string>> entries;
};

/// Names accepted besides the physical parameters.
[[nodiscard]] const std::vector<std::string>& setting_names();

/// Applies one binding. Throws ConfigError naming the key.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses "key = value" lines; '#' starts a comment. Throws ConfigError with the line number.
void apply_config_text(RunConfig& cfg, std::string_view text);
[[nodiscard]] RunConfig load_config(const std::string& path);

/// Splits "key=value" from the command line.
[[nodiscard]] std::pair<std::string, std::string> split_assignment(std::string_view text);

/// Physical validation before any computation. Throws ConfigError.
[[nodiscard]] Setup validate_config(const RunConfig& cfg);

// CSV

/// %.17g: shortest width that round-trips every binary64 value.
[[nodiscard]] std::string format_double(double x);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header);
    CsvWriter& operator<<(double x);
    CsvWriter& operator<<(int x);
    CsvWriter& operator<<(std::string_view x);
    void end_row();

private:
    void separator();
    std::ostream& out_;
    std::size_t columns_;
    std::size_t column_ = 0;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::size_t column(std::string_view name) const;
};

[[nodiscard]] CsvTable parse_csv(std::string_view text);
[[nodiscard]] CsvTable read_csv(const std::string& path);

// Subcommands

enum ExitCode { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitRuntime = 3 };

[[nodiscard]] const std::vector<std::string>& command_names();

/// Runs a subcommand, writing the CSV to cfg.out and the sidecar to
/// cfg.out + ".meta.json". Progress and reports go to log.
[[nodiscard]] int run_command(std::string_view command, const RunConfig& cfg, std::ostream& log);

[[nodiscard]] std::string tool_version();
[[nodiscard]] std::string git_hash();

}  // namespace cavarray::cli

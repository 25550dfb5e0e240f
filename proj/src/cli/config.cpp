#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cavarray/cli.hpp"
#include "cavarray/errors.hpp"

namespace cavarray::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view value) {
    double x = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, x);
    if (ec != std::errc() || ptr != end || !std::isfinite(x)) {
        throw ConfigError(std::string(key) + ": expected a finite number, got '" +
                          std::string(value) + "'");
    }
    return x;
}

int to_int(std::string_view key, std::string_view value) {
    int x = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, x);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(value) +
                          "'");
    }
    return x;
}

bool to_bool(std::string_view key, std::string_view value) {
    if (value == "1" || value == "true" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "no") return false;
    throw ConfigError(std::string(key) + ": expected a boolean, got '" + std::string(value) + "'");
}

void require_positive(std::string_view key, double x) {
    if (!(x > 0.0)) throw ConfigError(std::string(key) + " must be positive");
}

void require_nonnegative(std::string_view key, double x) {
    if (!(x >= 0.0)) throw ConfigError(std::string(key) + " must be >= 0");
}

bool is_physical(std::string_view key) {
    const auto& names = parameter_names();
    return std::find(names.begin(), names.end(), key) != names.end();
}

bool apply_axis(AxisConfig& axis, std::string_view field, std::string_view key,
                std::string_view value) {
    if (field.empty()) {
        if (!is_physical(value)) {
            throw ConfigError(std::string(key) + ": unknown sweep parameter '" + std::string(value) +
                              "'");
        }
        axis.name = std::string(value);
    } else if (field == "_min") {
        axis.min = to_double(key, value);
    } else if (field == "_max") {
        axis.max = to_double(key, value);
    } else if (field == "_count") {
        axis.count = to_int(key, value);
        if (axis.count < 1) throw ConfigError(std::string(key) + " must be >= 1");
    } else {
        return false;
    }
    return true;
}

}  // namespace

const std::vector<std::string>& setting_names() {
    static const std::vector<std::string> names{
        "axis1", "axis1_min", "axis1_max", "axis1_count", "axis2", "axis2_min", "axis2_max",
        "axis2_count", "quantity", "regime", "limit_window_high", "limit_window_low", "engine", "convention", "workers", "singular_tolerance",
        "resonance_tolerance", "oracle_margin", "oracle_threshold", "search_re_min",
        "search_re_max", "search_im_min", "search_im_max", "seeds_re", "seeds_im",
        "max_iterations", "residual_tolerance", "accept_tolerance", "profile_n", "sigma", "dt",
        "drift_bound", "check_wavepacket", "chain_N", "kappa", "dump_mode"};
    return names;
}

void apply_setting(RunConfig& cfg, std::string_view raw_key, std::string_view raw_value) {
    const std::string_view key = trim(raw_key);
    const std::string_view value = trim(raw_value);
    if (key.empty()) throw ConfigError("empty key");
    if (value.empty()) throw ConfigError(std::string(key) + ": missing value");

    if (is_physical(key)) {
        cfg.physics[std::string(key)] = to_double(key, value);
    } else if (key.substr(0, 5) == "axis1" && apply_axis(cfg.axis1, key.substr(5), key, value)) {
    } else if (key.substr(0, 5) == "axis2" && apply_axis(cfg.axis2, key.substr(5), key, value)) {
    } else if (key == "quantity") {
        const auto q = parse_quantity(value);
        if (!q) throw ConfigError("quantity: unknown quantity '" + std::string(value) + "'");
        cfg.quantity = *q;
    } else if (key == "engine") {
        const auto e = parse_engine(value);
        if (!e) throw ConfigError("engine: expected analytic, oracle or both");
        cfg.engine = *e;
    } else if (key == "convention") {
        if (value == "physical") {
            cfg.convention = Convention::physical;
        } else if (value == "printed") {
            cfg.convention = Convention::printed;
        } else {
            throw ConfigError("convention: expected physical or printed");
        }
    } else if (key == "regime") {
        if (value == "exact") {
            cfg.regime.reset();
        } else if (value == "high") {
            cfg.regime = EnergyRegime::high;
        } else if (value == "low") {
            cfg.regime = EnergyRegime::low;
        } else {
            throw ConfigError("regime: expected exact, high or low");
        }
    } else if (key == "limit_window_high") {
        cfg.limit_window.high = to_double(key, value);
        require_positive(key, cfg.limit_window.high);
    } else if (key == "limit_window_low") {
        cfg.limit_window.low = to_double(key, value);
        require_positive(key, cfg.limit_window.low);
    } else if (key == "workers") {
        cfg.workers = to_int(key, value);
        if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    } else if (key == "singular_tolerance") {
        cfg.singular_tolerance = to_double(key, value);
        require_positive(key, cfg.singular_tolerance);
    } else if (key == "resonance_tolerance") {
        cfg.resonance_tolerance = to_double(key, value);
        require_positive(key, cfg.resonance_tolerance);
    } else if (key == "oracle_margin") {
        cfg.oracle_margin = to_int(key, value);
        if (cfg.oracle_margin < 6) throw ConfigError("oracle_margin must be >= 6");
    } else if (key == "oracle_threshold") {
        cfg.oracle_threshold = to_double(key, value);
        require_positive(key, cfg.oracle_threshold);
    } else if (key == "search_re_min") {
        cfg.window.re_min = to_double(key, value);
    } else if (key == "search_re_max") {
        cfg.window.re_max = to_double(key, value);
    } else if (key == "search_im_min") {
        cfg.window.im_min = to_double(key, value);
    } else if (key == "search_im_max") {
        cfg.window.im_max = to_double(key, value);
    } else if (key == "seeds_re") {
        cfg.roots.seeds_re = to_int(key, value);
        if (cfg.roots.seeds_re < 1) throw ConfigError("seeds_re must be >= 1");
    } else if (key == "seeds_im") {
        cfg.roots.seeds_im = to_int(key, value);
        if (cfg.roots.seeds_im < 1) throw ConfigError("seeds_im must be >= 1");
    } else if (key == "max_iterations") {
        cfg.roots.max_iterations = to_int(key, value);
        if (cfg.roots.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    } else if (key == "residual_tolerance") {
        cfg.roots.residual_tolerance = to_double(key, value);
        require_positive(key, cfg.roots.residual_tolerance);
    } else if (key == "accept_tolerance") {
        cfg.roots.accept_tolerance = to_double(key, value);
        require_positive(key, cfg.roots.accept_tolerance);
    } else if (key == "profile_n") {
        cfg.profile_n = to_int(key, value);
        if (cfg.profile_n < 0) throw ConfigError("profile_n must be >= 0");
    } else if (key == "sigma") {
        cfg.sigma = to_double(key, value);
        require_positive(key, cfg.sigma);
    } else if (key == "dt") {
        cfg.dt = to_double(key, value);
        require_nonnegative(key, cfg.dt);
    } else if (key == "drift_bound") {
        cfg.drift_bound = to_double(key, value);
        require_positive(key, cfg.drift_bound);
    } else if (key == "check_wavepacket") {
        cfg.check_wavepacket = to_bool(key, value);
    } else if (key == "chain_N") {
        cfg.chain_N = to_int(key, value);
        if (cfg.chain_N < 0) throw ConfigError("chain_N must be >= 0");
    } else if (key == "kappa") {
        cfg.kappa = to_double(key, value);
        require_nonnegative(key, cfg.kappa);
    } else if (key == "dump_mode") {
        cfg.dump_mode = to_int(key, value);
    } else {
        throw ConfigError("unknown key '" + std::string(key) + "'");
    }
    cfg.entries.emplace_back(std::string(key), std::string(value));
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        try {
            apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    RunConfig cfg;
    try {
        apply_config_text(cfg, text.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return cfg;
}

std::pair<std::string, std::string> split_assignment(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("expected key=value, got '" + std::string(text) + "'");
    }
    return {std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1)))};
}

Setup validate_config(const RunConfig& cfg) {
    try {
        return resolve_setup(cfg.physics);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace cavarray::cli

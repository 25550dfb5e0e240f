#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cavarray/cli.hpp"
#include "cavarray/errors.hpp"
#include "cavarray/kernels.hpp"
#include "cavarray/lattice_oracle.hpp"

namespace cavarray::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << content;
    out.close();
    if (!out) throw Error("write to '" + path + "' failed");
}

struct Context {
    std::string_view command;
    const RunConfig& cfg;
    Setup setup;
    std::ostream& log;
    Json meta = Json::object();
    std::vector<std::string> outputs;

    void emit(const std::string& path, const std::string& content) {
        write_file(path, content);
        outputs.push_back(path);
    }
};

Json base_metadata(const Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    Json meta;
    meta["command"] = std::string(ctx.command);

    Json params = Json::object();
    for (const auto& [key, value] : cfg.physics) params[key] = value;
    meta["parameters"] = params;

    const Setup& s = ctx.setup;
    Json resolved;
    resolved["t"] = s.lat.t;
    resolved["omega"] = s.lat.omega;
    resolved["nodes"] = s.nodes;
    auto node = [](const AtomParams& a) {
        return Json{{"omega_e", a.omega_e}, {"delta", a.delta}, {"Omega", a.Omega}, {"g", a.g},
                    {"Gamma", a.Gamma},     {"gamma", a.gamma}};
    };
    if (s.nodes >= 1) resolved["node1"] = node(s.atom1);
    if (s.nodes == 2) {
        resolved["node2"] = node(s.atom2);
        resolved["D"] = s.D;
    }
    meta["resolved"] = resolved;

    Json settings = Json::object();
    for (const auto& [key, value] : cfg.entries) {
        if (!cfg.physics.count(key)) settings[key] = value;
    }
    meta["settings"] = settings;
    meta["engine"] = std::string(engine_name(cfg.engine));
    meta["convention"] = cfg.convention == Convention::physical ? "physical" : "printed";
    meta["workers"] = cfg.workers;
    meta["isa"] = std::string(kernels::isa_name(kernels::active_isa()));
    meta["tolerances"] = {{"singular_tolerance", cfg.singular_tolerance},
                          {"resonance_tolerance", cfg.resonance_tolerance},
                          {"oracle_threshold", cfg.oracle_threshold},
                          {"residual_tolerance", cfg.roots.residual_tolerance},
                          {"accept_tolerance", cfg.roots.accept_tolerance},
                          {"drift_bound", cfg.drift_bound}};
    meta["tool_version"] = tool_version();
    meta["git_hash"] = git_hash();
    meta["timestamp"] = timestamp();
    return meta;
}

Axis make_axis(const AxisConfig& a, const Setup& setup, int default_count, const char* label) {
    Axis axis;
    axis.name = a.name;
    axis.count = a.count > 0 ? a.count : default_count;
    const std::string prefix(label);
    if (axis.count < 1) throw ConfigError(prefix + "_count is required");
    const double fill = 1.0 / (axis.count + 1);
    if (a.name == "k" || a.name == "eps_k") {
        // interior grid of the open band
        double lo = 0.0;
        double width = kPi;
        if (a.name == "eps_k") {
            const double delta = setup.nodes >= 1 ? setup.atom1.delta : 0.0;
            lo = setup.lat.omega - 2.0 * setup.lat.t - delta;
            width = 4.0 * setup.lat.t;
        }
        axis.min = a.min.value_or(lo + width * fill);
        axis.max = a.max.value_or(axis.count == 1 ? axis.min : lo + width * (1.0 - fill));
    } else {
        if (!a.min) throw ConfigError(prefix + "_min is required for axis '" + a.name + "'");
        axis.min = *a.min;
        if (!a.max && axis.count > 1) {
            throw ConfigError(prefix + "_max is required for axis '" + a.name + "'");
        }
        axis.max = a.max.value_or(axis.min);
    }
    return axis;
}

SweepSpec make_spec(const Context& ctx, std::vector<Axis> axes) {
    const RunConfig& cfg = ctx.cfg;
    SweepSpec spec;
    spec.axes = std::move(axes);
    spec.fixed = cfg.physics;
    spec.quantity = cfg.quantity;
    spec.engine = cfg.engine;
    spec.convention = cfg.convention;
    spec.singular_tolerance = cfg.singular_tolerance;
    spec.resonance_tolerance = cfg.resonance_tolerance;
    spec.workers = cfg.workers;
    spec.oracle_margin = cfg.oracle_margin;
    try {
        spec.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
    bool momentum = cfg.physics.count("k") || cfg.physics.count("eps_k");
    for (const auto& axis : spec.axes) momentum = momentum || axis.name == "k" || axis.name == "eps_k";
    if (!momentum) throw ConfigError("k: momentum not set (fix k or eps_k, or sweep one)");
    return spec;
}

Axis spectrum_axis(const Context& ctx, int default_count) {
    if (ctx.cfg.axis2.defined()) throw ConfigError("axis2: spectrum takes a single axis");
    AxisConfig a = ctx.cfg.axis1;
    if (!a.defined()) a.name = "k";
    return make_axis(a, ctx.setup, default_count, "axis1");
}

Json mask_summary(const SweepResult& res) {
    std::size_t singular = 0;
    std::size_t errors = 0;
    for (auto m : res.mask) {
        if (m & kMaskSingular) ++singular;
        if (m & kMaskError) ++errors;
    }
    return {{"points", res.size()}, {"singular_points", singular}, {"error_points", errors}};
}

int cmd_limit_spectrum(Context& ctx, EnergyRegime regime) {
    const RunConfig& cfg = ctx.cfg;
    if (ctx.setup.nodes != 1) throw ConfigError("regime: limit lineshapes need nodes = 1");
    if (cfg.axis2.defined()) throw ConfigError("axis2: spectrum takes a single axis");
    if (cfg.axis1.defined() && cfg.axis1.name != "k") {
        throw ConfigError("axis1: limit lineshapes are swept over k");
    }
    Axis axis;
    axis.name = "k";
    axis.count = cfg.axis1.count > 0 ? cfg.axis1.count : 2000;
    if (regime == EnergyRegime::high) {
        axis.min = cfg.axis1.min.value_or(0.5 * kPi - cfg.limit_window.high);
        axis.max = cfg.axis1.max.value_or(0.5 * kPi + cfg.limit_window.high);
    } else {
        axis.min = cfg.axis1.min.value_or(cfg.limit_window.low / axis.count);
        axis.max = cfg.axis1.max.value_or(cfg.limit_window.low);
    }
    if (axis.count == 1) axis.max = axis.min;
    const auto grid = axis.grid();

    ScatterOptions opts;
    opts.singular_tolerance = cfg.singular_tolerance;
    std::ostringstream csv;
    CsvWriter w(csv, {"k", "eps_m", "Re_r", "Im_r", "Re_s", "Im_s", "R", "T", "xi", "singular_flag"});
    std::size_t errors = 0;
    for (double k : grid) {
        ScatteringResult res;
        int flag = 0;
        try {
            res = limit_scatter(k, regime, ctx.setup.atom1, ctx.setup.lat, cfg.limit_window, opts);
            flag = res.singular ? kMaskSingular : 0;
        } catch (const Error&) {
            flag = kMaskError;
            ++errors;
        }
        const double eps = limit_energy(k, regime, ctx.setup.lat) - ctx.setup.atom1.delta;
        w << k << eps << res.r.real() << res.r.imag() << res.s.real() << res.s.imag() << res.R
          << res.T << res.xi << flag;
        w.end_row();
    }
    ctx.emit(cfg.out, csv.str());
    ctx.meta["regime"] = regime == EnergyRegime::high ? "high" : "low";
    ctx.meta["axes"] = Json::array({{{"name", axis.name}, {"min", axis.min}, {"max", axis.max},
                                     {"count", axis.count}}});
    ctx.meta["summary"] = {{"points", grid.size()}, {"error_points", errors}};
    ctx.log << "spectrum (" << (regime == EnergyRegime::high ? "high" : "low")
            << "-energy limit): " << grid.size() << " points -> " << cfg.out << '\n';
    return kExitOk;
}

int cmd_spectrum(Context& ctx) {
    if (ctx.cfg.regime) return cmd_limit_spectrum(ctx, *ctx.cfg.regime);
    const Axis axis = spectrum_axis(ctx, 2000);
    const SweepSpec spec = make_spec(ctx, {axis});
    const SweepResult res = run_sweep(spec);

    const bool momentum_axis = axis.name == "k" || axis.name == "eps_k";
    const bool both = spec.engine == Engine::both;
    std::vector<std::string> header;
    if (!momentum_axis) header.push_back(axis.name);
    for (const char* h : {"k", "eps_k", "Re_r", "Im_r", "Re_s", "Im_s", "R", "T", "xi", "singular_flag"}) {
        header.emplace_back(h);
    }
    if (both) {
        for (const char* h : {"Re_r_oracle", "Im_r_oracle", "Re_s_oracle", "Im_s_oracle"}) {
            header.emplace_back(h);
        }
    }
    std::ostringstream csv;
    CsvWriter w(csv, header);
    for (std::size_t i = 0; i < res.size(); ++i) {
        if (!momentum_axis) w << res.grids[0][i];
        const Complex r = res.r[i];
        const Complex s = res.s[i];
        w << res.k[i] << res.eps_k[i] << r.real() << r.imag() << s.real() << s.imag()
          << quantity_value(Quantity::R, r, s) << quantity_value(Quantity::T, r, s)
          << quantity_value(Quantity::xi, r, s) << static_cast<int>(res.mask[i]);
        if (both) {
            w << res.oracle_r[i].real() << res.oracle_r[i].imag() << res.oracle_s[i].real()
              << res.oracle_s[i].imag();
        }
        w.end_row();
    }
    ctx.emit(ctx.cfg.out, csv.str());
    ctx.meta["axes"] = Json::array({{{"name", axis.name}, {"min", axis.min}, {"max", axis.max},
                                     {"count", axis.count}}});
    ctx.meta["summary"] = mask_summary(res);
    ctx.log << "spectrum: " << res.size() << " points over " << axis.name << " -> " << ctx.cfg.out
            << '\n';
    return kExitOk;
}

int cmd_map2d(Context& ctx) {
    if (!ctx.cfg.axis1.defined() || !ctx.cfg.axis2.defined()) {
        throw ConfigError("axis1/axis2: map2d needs two sweep axes");
    }
    const Axis a1 = make_axis(ctx.cfg.axis1, ctx.setup, 0, "axis1");
    const Axis a2 = make_axis(ctx.cfg.axis2, ctx.setup, 0, "axis2");
    const SweepSpec spec = make_spec(ctx, {a1, a2});
    const SweepResult res = run_sweep(spec);

    std::ostringstream csv;
    CsvWriter w(csv, {a1.name, a2.name, std::string(quantity_name(spec.quantity)), "singular_flag"});
    for (std::size_t i = 0; i < res.size(); ++i) {
        const auto c = res.coordinates(i);
        w << c[0] << c[1] << res.values[i] << static_cast<int>(res.mask[i]);
        w.end_row();
    }
    ctx.emit(ctx.cfg.out, csv.str());
    Json axes = Json::array();
    for (const auto& a : {a1, a2}) {
        axes.push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"count", a.count}});
    }
    ctx.meta["axes"] = axes;
    ctx.meta["quantity"] = std::string(quantity_name(spec.quantity));
    ctx.meta["summary"] = mask_summary(res);
    ctx.log << "map2d: " << a1.count << " x " << a2.count << " grid -> " << ctx.cfg.out << '\n';
    return kExitOk;
}

int cmd_quasibound(Context& ctx) {
    if (ctx.setup.nodes != 2) throw ConfigError("nodes: quasibound needs nodes = 2");
    const TwoNodeConfig tn = ctx.setup.two_node();
    const QuasiboundSearch search =
        find_quasibound_modes(tn, ctx.setup.lat, ctx.cfg.window, ctx.cfg.roots);

    std::ostringstream csv;
    CsvWriter w(csv, {"n", "Re_k", "Im_k", "Re_E", "Im_E", "leakage", "residual"});
    Json unassigned = Json::array();
    std::size_t rows = 0;
    for (const auto& m : search.modes) {
        if (!m.n) {
            unassigned.push_back({{"Re_k", m.k.real()}, {"Im_k", m.k.imag()},
                                  {"residual", m.residual}});
            continue;
        }
        w << *m.n << m.k.real() << m.k.imag() << m.energy.real() << m.energy.imag() << m.leakage
          << m.residual;
        w.end_row();
        ++rows;
    }
    ctx.emit(ctx.cfg.out, csv.str());

    if (ctx.cfg.profile_n > 0) {
        const auto profile = bound_profile(tn.D, ctx.cfg.profile_n);
        std::ostringstream pc;
        CsvWriter pw(pc, {"j", "Re_u", "Im_u"});
        for (std::size_t j = 0; j < profile.size(); ++j) {
            pw << static_cast<int>(j) << profile[j] << 0.0;
            pw.end_row();
        }
        ctx.emit(ctx.cfg.out + ".profile.csv", pc.str());
    }

    Json failures = Json::array();
    for (const auto& f : search.failures) {
        failures.push_back({{"seed_re", f.seed.real()}, {"seed_im", f.seed.imag()}, {"reason", f.reason}});
    }
    ctx.meta["search_window"] = {{"re_min", ctx.cfg.window.re_min}, {"re_max", ctx.cfg.window.re_max},
                                 {"im_min", ctx.cfg.window.im_min}, {"im_max", ctx.cfg.window.im_max}};
    ctx.meta["modes"] = rows;
    ctx.meta["unassigned_roots"] = unassigned;
    ctx.meta["seed_failures"] = failures;
    ctx.log << "quasibound: " << rows << " labelled modes, " << unassigned.size()
            << " unlabelled roots, " << search.failures.size() << " seed failures -> "
            << ctx.cfg.out << '\n';
    return kExitOk;
}

std::vector<AtomParams> node_atoms(const Setup& s) {
    std::vector<AtomParams> atoms;
    if (s.nodes >= 1) atoms.push_back(s.atom1);
    if (s.nodes == 2) atoms.push_back(s.atom2);
    return atoms;
}

std::vector<int> node_offsets(const Setup& s) {
    std::vector<int> offsets;
    if (s.nodes >= 1) offsets.push_back(0);
    if (s.nodes == 2) offsets.push_back(s.D);
    return offsets;
}

struct PacketRun {
    WavepacketSetup plan;
    WavepacketResult result;
};

PacketRun run_packet(const Context& ctx) {
    double k0 = 0.0;
    try {
        k0 = resolve_momentum(ctx.cfg.physics, ctx.setup);
    } catch (const Error& e) {
        throw ConfigError(std::string("k: ") + e.what());
    }
    PacketRun run;
    run.plan = plan_wavepacket(ctx.setup.lat, node_atoms(ctx.setup), node_offsets(ctx.setup), k0,
                               ctx.cfg.sigma);
    run.plan.chain.kappa = ctx.cfg.kappa;
    run.plan.packet.dt = ctx.cfg.dt;
    PropagationOptions opts;
    opts.drift_bound = ctx.cfg.drift_bound;
    run.result = propagate_wavepacket(run.plan.chain, run.plan.packet, opts);
    return run;
}

Json packet_json(const PacketRun& run) {
    const auto& r = run.result;
    return {{"k0", run.plan.packet.k0},     {"sigma", run.plan.packet.sigma},
            {"chain_N", run.plan.chain.N},  {"x0", run.plan.packet.x0},
            {"tmax", run.plan.packet.tmax}, {"R_meas", r.R_meas},
            {"T_meas", r.T_meas},           {"atomic", r.atomic},
            {"norm_drift", r.norm_drift}};
}

int cmd_wavepacket(Context& ctx) {
    const PacketRun run = run_packet(ctx);
    const auto& r = run.result;
    std::ostringstream csv;
    CsvWriter w(csv, {"k0", "R_meas", "T_meas", "atomic", "norm_drift"});
    w << run.plan.packet.k0 << r.R_meas << r.T_meas << r.atomic << r.norm_drift;
    w.end_row();
    ctx.emit(ctx.cfg.out, csv.str());

    std::ostringstream hist;
    CsvWriter hw(hist, {"time", "norm"});
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        hw << r.times[i] << r.norms[i];
        hw.end_row();
    }
    ctx.emit(ctx.cfg.out + ".history.csv", hist.str());
    ctx.meta["wavepacket"] = packet_json(run);
    ctx.log << "wavepacket: R_meas = " << format_double(r.R_meas)
            << ", T_meas = " << format_double(r.T_meas) << ", norm drift = "
            << format_double(r.norm_drift) << '\n';
    return kExitOk;
}

int cmd_modes(Context& ctx) {
    const Setup& s = ctx.setup;
    const int span = s.nodes == 2 ? s.D : 0;
    const int n = ctx.cfg.chain_N > 0 ? ctx.cfg.chain_N : span + 41;
    ChainSpec chain = centred_chain(n, s.lat, node_atoms(s), node_offsets(s));
    chain.kappa = ctx.cfg.kappa;
    const auto modes = eigenmodes(chain);

    const bool overlap = s.nodes == 2 && ctx.cfg.profile_n > 0;
    std::vector<double> profile;
    if (overlap) profile = bound_profile(s.D, ctx.cfg.profile_n);
    std::vector<std::string> header{"index", "Re_E", "Im_E", "ipr", "photon_fraction",
                                    "interior_weight"};
    if (overlap) header.emplace_back("overlap");

    std::ostringstream csv;
    CsvWriter w(csv, header);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const auto& m = modes[i];
        w << static_cast<int>(i) << m.energy.real() << m.energy.imag() << m.ipr
          << m.photon_fraction << m.interior_weight;
        if (overlap) w << profile_overlap(m, chain.placements.front().site, profile);
        w.end_row();
    }
    ctx.emit(ctx.cfg.out, csv.str());

    if (ctx.cfg.dump_mode >= 0) {
        if (ctx.cfg.dump_mode >= static_cast<int>(modes.size())) {
            throw ConfigError("dump_mode: index beyond the " + std::to_string(modes.size()) + " modes");
        }
        std::ostringstream wf;
        write_wavefunction_csv(wf, modes[static_cast<std::size_t>(ctx.cfg.dump_mode)].state.photon);
        ctx.emit(ctx.cfg.out + ".mode" + std::to_string(ctx.cfg.dump_mode) + ".csv", wf.str());
    }
    ctx.meta["chain_N"] = n;
    ctx.meta["kappa"] = ctx.cfg.kappa;
    ctx.meta["modes"] = modes.size();
    ctx.log << "modes: " << modes.size() << " eigenmodes of a " << n << "-site chain -> "
            << ctx.cfg.out << '\n';
    return kExitOk;
}

int cmd_oracle_check(Context& ctx) {
    const Axis axis = spectrum_axis(ctx, 200);
    SweepSpec spec = make_spec(ctx, {axis});
    spec.engine = Engine::both;
    const SweepResult res = run_sweep(spec);
    const EngineComparison cmp = compare_engines(res);
    const double threshold = ctx.cfg.oracle_threshold;

    std::vector<double> dev(res.size(), 0.0);
    std::ostringstream csv;
    CsvWriter w(csv, {axis.name, "dev_r", "dev_s", "mask"});
    for (std::size_t i = 0; i < res.size(); ++i) {
        const double dr = std::abs(res.r[i] - res.oracle_r[i]);
        const double ds = std::abs(res.s[i] - res.oracle_s[i]);
        if (!(res.mask[i] & kMaskError)) dev[i] = std::max(dr, ds);
        w << res.grids[0][i] << dr << ds << static_cast<int>(res.mask[i]);
        w.end_row();
    }
    ctx.emit(ctx.cfg.out, csv.str());

    std::vector<std::size_t> order(res.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dev[a] > dev[b]; });

    bool pass = cmp.compared > 0 && cmp.max_deviation <= threshold;
    ctx.log << "oracle-check: " << cmp.compared << " of " << res.size() << " points compared over "
            << axis.name << ", threshold " << format_double(threshold) << '\n';
    ctx.log << "  max deviation " << format_double(cmp.max_deviation) << '\n';
    Json worst = Json::array();
    for (std::size_t j = 0; j < std::min<std::size_t>(5, order.size()); ++j) {
        const std::size_t i = order[j];
        ctx.log << "  " << axis.name << " = " << format_double(res.grids[0][i])
                << "  |dr|,|ds| max = " << format_double(dev[i])
                << (dev[i] > threshold ? "  FAIL" : "") << '\n';
        worst.push_back({{axis.name, res.grids[0][i]}, {"deviation", dev[i]}});
    }
    ctx.meta["oracle"] = {{"compared", cmp.compared}, {"max_deviation", cmp.max_deviation},
                          {"threshold", threshold}, {"worst", worst}};
    ctx.meta["summary"] = mask_summary(res);

    if (ctx.cfg.check_wavepacket) {
        const PacketRun run = run_packet(ctx);
        const auto& r = run.result;
        const double balance = std::abs(r.R_meas + r.T_meas + r.atomic - 1.0);
        const bool lossless = run.plan.chain.kappa == 0.0 &&
                              std::all_of(run.plan.chain.placements.begin(),
                                          run.plan.chain.placements.end(),
                                          [](const Placement& p) { return p.atom.is_lossless(); });
        const bool ok = !lossless || (r.norm_drift <= ctx.cfg.drift_bound && balance <= 1e-6);
        ctx.log << "  wavepacket: R_meas " << format_double(r.R_meas) << ", T_meas "
                << format_double(r.T_meas) << ", drift " << format_double(r.norm_drift)
                << (ok ? "" : "  FAIL") << '\n';
        ctx.meta["wavepacket"] = packet_json(run);
        pass = pass && ok;
    }
    ctx.meta["pass"] = pass;
    ctx.log << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"spectrum",   "map2d",        "quasibound",
                                                "wavepacket", "oracle-check", "modes"};
    return names;
}

std::string tool_version() { return CAVARRAY_VERSION; }
std::string git_hash() { return CAVARRAY_GIT_HASH; }

int run_command(std::string_view command, const RunConfig& cfg, std::ostream& log) {
    try {
        if (std::find(command_names().begin(), command_names().end(), command) ==
            command_names().end()) {
            throw ConfigError("unknown command '" + std::string(command) + "'");
        }
        if (cfg.out.empty()) throw ConfigError("an output path (--out) is required");
        Context ctx{command, cfg, validate_config(cfg), log, Json::object(), {}};

        int code = kExitOk;
        if (command == "spectrum") {
            code = cmd_spectrum(ctx);
        } else if (command == "map2d") {
            code = cmd_map2d(ctx);
        } else if (command == "quasibound") {
            code = cmd_quasibound(ctx);
        } else if (command == "wavepacket") {
            code = cmd_wavepacket(ctx);
        } else if (command == "modes") {
            code = cmd_modes(ctx);
        } else {
            code = cmd_oracle_check(ctx);
        }

        Json meta = base_metadata(ctx);
        for (auto& [key, value] : ctx.meta.items()) meta[key] = value;
        meta["outputs"] = ctx.outputs;
        write_file(cfg.out + ".meta.json", meta.dump(2) + "\n");
        return code;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace cavarray::cli

#include "cavarray/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cavarray/errors.hpp"
#include "cavarray/kernels.hpp"
#include "cavarray/lattice_oracle.hpp"

namespace cavarray {

namespace {

constexpr std::size_t kChunkAlign = 4;

bool has(const ParameterMap& p, std::string_view key) { return p.find(key) != p.end(); }

double get(const ParameterMap& p, std::string_view key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

int get_integer(const ParameterMap& p, std::string_view key, int fallback) {
    const double v = get(p, key, fallback);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
        throw InvalidParameter(std::string(key) + " must be an integer");
    }
    return static_cast<int>(v);
}

AtomParams resolve_node(const ParameterMap& p, const std::string& suffix, const AtomParams& fallback) {
    auto key = [&](const char* base) { return std::string(base) + suffix; };
    AtomParams atom;
    atom.omega_e = get(p, key("omega_e"), fallback.omega_e);
    atom.Omega = std::abs(get(p, key("Omega"), fallback.Omega));  // only Omega^2 enters
    atom.g = get(p, key("g"), fallback.g);
    atom.Gamma = get(p, key("Gamma"), fallback.Gamma);
    atom.gamma = get(p, key("gamma"), fallback.gamma);

    const bool has_delta = has(p, key("delta"));
    const bool has_a = has(p, key("omega_a"));
    const bool has_c = has(p, key("omega_C"));
    if (has_a != has_c) {
        throw InvalidParameter(key("omega_a") + " and " + key("omega_C") + " must be given together");
    }
    if (has_delta && has_a) {
        throw InvalidParameter("give either " + key("delta") + " or " + key("omega_a") + "/" +
                               key("omega_C") + ", not both");
    }
    if (has_a) {
        atom.delta = p.find(key("omega_a"))->second - p.find(key("omega_C"))->second;
    } else {
        atom.delta = get(p, key("delta"), fallback.delta);
    }
    try {
        atom.validate();
    } catch (const InvalidParameter& e) {
        if (suffix.empty()) throw;
        throw InvalidParameter(std::string("second node (suffix 2): ") + e.what());
    }
    return atom;
}

bool is_momentum_axis(const std::string& name) { return name == "k" || name == "eps_k"; }

/// Fixed parameters plus the axis values of one grid point.
ParameterMap point_parameters(const SweepSpec& spec, const std::vector<std::vector<double>>& grids,
                              std::size_t index) {
    ParameterMap p = spec.fixed;
    std::size_t rest = index;
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
        const std::size_t count = grids[a].size();
        const std::string& name = spec.axes[a].name;
        p[name] = grids[a][rest % count];
        if (name == "k") p.erase("eps_k");
        if (name == "eps_k") p.erase("k");
        if (name == "omega_C" || name == "omega_a") p.erase("delta");
        if (name == "omega_C2" || name == "omega_a2") p.erase("delta2");
        rest /= count;
    }
    return p;
}

ChainSpec oracle_chain(const Setup& setup, int margin) {
    ChainSpec chain;
    chain.lat = setup.lat;
    const int span = setup.nodes == 2 ? setup.D : 0;
    chain.N = std::max(16, span + 2 * margin + 1);
    if (setup.nodes >= 1) chain.placements.push_back({margin, setup.atom1});
    if (setup.nodes == 2) chain.placements.push_back({margin + setup.D, setup.atom2});
    return chain;
}

struct Evaluator {
    const SweepSpec& spec;
    SweepResult& out;
    bool last_axis_momentum;
    std::size_t last_count;

    void set_error(std::size_t i) {
        out.mask[i] |= kMaskError;
        out.r[i] = 0.0;
        out.s[i] = 0.0;
        if (!out.oracle_r.empty()) {
            out.oracle_r[i] = 0.0;
            out.oracle_s[i] = 0.0;
        }
    }

    void run(std::size_t begin, std::size_t end) {
        std::size_t i = begin;
        while (i < end) {
            // Consecutive points that differ only in momentum share a setup.
            std::size_t group_end = i + 1;
            if (last_axis_momentum) {
                const std::size_t row_end = (i / last_count + 1) * last_count;
                group_end = std::min(end, row_end);
            }
            run_group(i, group_end);
            i = group_end;
        }
    }

    void run_group(std::size_t begin, std::size_t end) {
        Setup setup;
        try {
            setup = resolve_setup(point_parameters(spec, out.grids, begin));
        } catch (const Error&) {
            for (std::size_t i = begin; i < end; ++i) set_error(i);
            return;
        }
        const double delta = setup.nodes >= 1 ? setup.atom1.delta : 0.0;

        std::vector<std::size_t> valid;
        valid.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const double k = resolve_momentum(point_parameters(spec, out.grids, i), setup);
                out.k[i] = k;
                out.eps_k[i] = dispersion_energy(k, setup.lat) - delta;
                valid.push_back(i);
            } catch (const Error&) {
                set_error(i);
            }
        }

        const bool need_analytic = true;
        if (need_analytic) analytic(setup, valid);
        if (spec.engine != Engine::analytic) oracle(setup, valid);
    }

    void analytic(const Setup& setup, const std::vector<std::size_t>& points) {
        if (setup.nodes == 0) {
            for (std::size_t i : points) {
                out.r[i] = 0.0;
                out.s[i] = 1.0;
            }
            return;
        }
        if (setup.nodes == 1) {
            const std::size_t n = points.size();
            std::vector<double> cos_k(n), sin_k(n), r_re(n), r_im(n), s_re(n), s_im(n);
            std::vector<std::uint8_t> singular(n);
            for (std::size_t j = 0; j < n; ++j) {
                cos_k[j] = std::cos(out.k[points[j]]);
                sin_k[j] = std::sin(out.k[points[j]]);
            }
            const AtomParams& a = setup.atom1;
            const kernels::NodeCoefficients c{setup.lat.omega, setup.lat.t, a.omega_e, a.delta,
                                              a.Omega,         a.g,         a.Gamma,   a.gamma,
                                              spec.singular_tolerance};
            kernels::single_node_batch(c, {cos_k, sin_k, r_re, r_im, s_re, s_im, singular});
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t i = points[j];
                out.r[i] = {r_re[j], r_im[j]};
                out.s[i] = {s_re[j], s_im[j]};
                if (singular[j]) out.mask[i] |= kMaskSingular;
            }
            return;
        }
        ScatterOptions opts;
        opts.singular_tolerance = spec.singular_tolerance;
        opts.resonance_tolerance = spec.resonance_tolerance;
        for (std::size_t i : points) {
            try {
                const auto res =
                    two_node_scatter(out.k[i], setup.two_node(), setup.lat, spec.convention, opts);
                out.r[i] = res.r;
                out.s[i] = res.s;
                if (res.singular) out.mask[i] |= kMaskSingular;
            } catch (const Error&) {
                set_error(i);
            }
        }
    }

    void oracle(const Setup& setup, const std::vector<std::size_t>& points) {
        const ChainSpec chain = oracle_chain(setup, spec.oracle_margin);
        for (std::size_t i : points) {
            if (out.mask[i] & kMaskError) continue;
            try {
                const auto sol = solve_stationary(chain, out.k[i]);
                if (spec.engine == Engine::oracle) {
                    out.r[i] = sol.r;
                    out.s[i] = sol.s;
                } else {
                    out.oracle_r[i] = sol.r;
                    out.oracle_s[i] = sol.s;
                }
            } catch (const Error&) {
                set_error(i);
            }
        }
    }
};

}  // namespace

const std::vector<std::string>& parameter_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v{"t", "omega", "nodes", "D", "k", "eps_k"};
        for (const char* base :
             {"omega_e", "delta", "omega_a", "omega_C", "Omega", "g", "Gamma", "gamma"}) {
            v.emplace_back(base);
            v.emplace_back(std::string(base) + "2");
        }
        return v;
    }();
    return names;
}

Setup resolve_setup(const ParameterMap& params) {
    for (const auto& [key, value] : params) {
        if (std::find(parameter_names().begin(), parameter_names().end(), key) ==
            parameter_names().end()) {
            throw InvalidParameter("unknown parameter '" + key + "'");
        }
        if (!std::isfinite(value)) throw InvalidParameter("parameter '" + key + "' is not finite");
    }
    Setup setup;
    setup.lat.omega = get(params, "omega", 0.0);
    setup.lat.t = get(params, "t", 1.0);
    setup.lat.validate();
    setup.nodes = get_integer(params, "nodes", 1);
    if (setup.nodes < 0 || setup.nodes > 2) throw InvalidParameter("nodes must be 0, 1 or 2");
    setup.atom1 = resolve_node(params, "", AtomParams{});
    setup.atom2 = resolve_node(params, "2", setup.atom1);
    setup.D = get_integer(params, "D", 1);
    if (setup.D < 1) throw InvalidParameter("node separation D must be >= 1");
    return setup;
}

double resolve_momentum(const ParameterMap& params, const Setup& setup) {
    if (const auto it = params.find("k"); it != params.end()) {
        if (!(it->second > 0.0 && it->second < kPi)) {
            throw DomainError("momentum must lie in (0, pi)");
        }
        return it->second;
    }
    if (const auto it = params.find("eps_k"); it != params.end()) {
        const double delta = setup.nodes >= 1 ? setup.atom1.delta : 0.0;
        return momentum_from_energy(it->second + delta, setup.lat);
    }
    throw InvalidParameter("momentum not set: sweep or fix k or eps_k");
}

std::string_view quantity_name(Quantity q) {
    switch (q) {
        case Quantity::R: return "R";
        case Quantity::T: return "T";
        case Quantity::xi: return "xi";
        case Quantity::re_r: return "Re_r";
        case Quantity::im_r: return "Im_r";
        case Quantity::flux: return "R+T";
    }
    return "?";
}

std::optional<Quantity> parse_quantity(std::string_view name) {
    for (Quantity q : {Quantity::R, Quantity::T, Quantity::xi, Quantity::re_r, Quantity::im_r,
                       Quantity::flux}) {
        if (quantity_name(q) == name) return q;
    }
    return std::nullopt;
}

std::string_view engine_name(Engine e) {
    switch (e) {
        case Engine::analytic: return "analytic";
        case Engine::oracle: return "oracle";
        case Engine::both: return "both";
    }
    return "?";
}

std::optional<Engine> parse_engine(std::string_view name) {
    for (Engine e : {Engine::analytic, Engine::oracle, Engine::both}) {
        if (engine_name(e) == name) return e;
    }
    return std::nullopt;
}

std::vector<double> Axis::grid() const {
    std::vector<double> g(static_cast<std::size_t>(count));
    if (count == 1) {
        g[0] = min;
        return g;
    }
    const double step = (max - min) / (count - 1);
    for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = min + step * i;
    g.back() = max;
    return g;
}

void SweepSpec::validate() const {
    if (axes.empty() || axes.size() > 2) throw InvalidParameter("a sweep needs one or two axes");
    for (const auto& axis : axes) {
        if (std::find(parameter_names().begin(), parameter_names().end(), axis.name) ==
            parameter_names().end()) {
            throw InvalidParameter("unknown axis parameter '" + axis.name + "'");
        }
        if (axis.count < 1) throw InvalidParameter("axis '" + axis.name + "' needs count >= 1");
        if (axis.count == 1 ? axis.min > axis.max : !(axis.min < axis.max)) {
            throw InvalidParameter("axis '" + axis.name + "' needs min < max");
        }
    }
    if (axes.size() == 2 && axes[0].name == axes[1].name) {
        throw InvalidParameter("sweep axes must differ");
    }
    if (workers < 1) throw InvalidParameter("workers must be >= 1");
    if (oracle_margin < 6) throw InvalidParameter("oracle margin must be >= 6 sites");
}

std::vector<double> SweepResult::coordinates(std::size_t index) const {
    std::vector<double> c(grids.size());
    for (std::size_t a = grids.size(); a-- > 0;) {
        c[a] = grids[a][index % grids[a].size()];
        index /= grids[a].size();
    }
    return c;
}

double quantity_value(Quantity q, Complex r, Complex s) {
    switch (q) {
        case Quantity::R: return std::norm(r);
        case Quantity::T: return std::norm(s);
        case Quantity::xi: return 1.0 - (std::norm(r) + std::norm(s));
        case Quantity::re_r: return r.real();
        case Quantity::im_r: return r.imag();
        case Quantity::flux: return std::norm(r) + std::norm(s);
    }
    return 0.0;
}

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepResult out;
    out.axes = spec.axes;
    out.quantity = spec.quantity;
    out.engine = spec.engine;
    std::size_t total = 1;
    for (const auto& axis : spec.axes) {
        out.grids.push_back(axis.grid());
        total *= out.grids.back().size();
    }
    out.k.assign(total, 0.0);
    out.eps_k.assign(total, 0.0);
    out.r.assign(total, 0.0);
    out.s.assign(total, 0.0);
    out.values.assign(total, 0.0);
    out.mask.assign(total, 0);
    if (spec.engine == Engine::both) {
        out.oracle_r.assign(total, 0.0);
        out.oracle_s.assign(total, 0.0);
    }

    Evaluator evaluator{spec, out, is_momentum_axis(spec.axes.back().name),
                        out.grids.back().size()};

    const auto workers = static_cast<std::size_t>(spec.workers);
    std::size_t chunk = (total + workers - 1) / workers;
    chunk = (chunk + kChunkAlign - 1) / kChunkAlign * kChunkAlign;
    if (workers == 1 || total <= kChunkAlign) {
        evaluator.run(0, total);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t begin = 0; begin < total; begin += chunk) {
            const std::size_t end = std::min(total, begin + chunk);
            pool.emplace_back([&evaluator, begin, end] {
                Evaluator local = evaluator;
                local.run(begin, end);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < total; ++i) {
        if (out.mask[i] & kMaskError) continue;
        const double v = quantity_value(spec.quantity, out.r[i], out.s[i]);
        const bool finite = std::isfinite(v) && std::isfinite(out.r[i].real()) &&
                            std::isfinite(out.r[i].imag()) && std::isfinite(out.s[i].real()) &&
                            std::isfinite(out.s[i].imag());
        if (!finite) {
            evaluator.set_error(i);
            continue;
        }
        out.values[i] = v;
    }
    return out;
}

EngineComparison compare_engines(const SweepResult& both) {
    if (both.engine != Engine::both) {
        throw InvalidParameter("engine comparison needs a sweep run with engine = both");
    }
    EngineComparison cmp;
    for (std::size_t i = 0; i < both.size(); ++i) {
        if (both.mask[i] & kMaskError) continue;
        ++cmp.compared;
        const double dev =
            std::max(std::abs(both.r[i] - both.oracle_r[i]), std::abs(both.s[i] - both.oracle_s[i]));
        if (dev > cmp.max_deviation || cmp.compared == 1) {
            cmp.max_deviation = std::max(dev, cmp.max_deviation);
            if (dev >= cmp.max_deviation) cmp.index = i;
        }
    }
    if (cmp.compared > 0) cmp.location = both.coordinates(cmp.index);
    return cmp;
}

EngineComparison compare_engines(const SweepSpec& spec) {
    SweepSpec copy = spec;
    copy.engine = Engine::both;
    return compare_engines(run_sweep(copy));
}

}  // namespace cavarray

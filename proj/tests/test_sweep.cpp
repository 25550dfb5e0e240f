#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstring>

#include "cavarray/errors.hpp"
#include "cavarray/kernels.hpp"
#include "cavarray/sweep.hpp"

using namespace cavarray;

namespace {

ParameterMap fig3a() {
    return {{"t", 2.0}, {"omega", 1.0}, {"omega_e", 1.0}, {"delta", 0.0}, {"Omega", 1.0}, {"g", 1.0}};
}

SweepSpec k_spectrum(ParameterMap fixed, int count) {
    SweepSpec spec;
    spec.axes = {{"k", kPi / (count + 1), kPi - kPi / (count + 1), count}};
    spec.fixed = std::move(fixed);
    return spec;
}

template <typename T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

}  // namespace

TEST_CASE("setup resolution") {
    ParameterMap p = fig3a();
    p["nodes"] = 2;
    p["D"] = 4;
    p["delta2"] = 0.5;
    const Setup s = resolve_setup(p);
    CHECK(s.nodes == 2);
    CHECK(s.D == 4);
    CHECK(s.atom2.omega_e == 1.0);
    CHECK(s.atom2.delta == 0.5);
    CHECK(s.atom2.Omega == 1.0);

    p = fig3a();
    p.erase("delta");
    p["omega_a"] = 0.25;
    p["omega_C"] = 1.0;
    CHECK(resolve_setup(p).atom1.delta == -0.75);
    p["delta"] = 0.0;
    CHECK_THROWS_AS((void)resolve_setup(p), InvalidParameter);
    p.erase("delta");
    p.erase("omega_C");
    CHECK_THROWS_AS((void)resolve_setup(p), InvalidParameter);

    p = fig3a();
    p["Omega"] = -1.5;
    CHECK(resolve_setup(p).atom1.Omega == 1.5);

    for (auto [key, value] : std::vector<std::pair<std::string, double>>{
             {"t", 0.0}, {"t", -1.0}, {"Gamma", -0.1}, {"gamma2", -0.1}, {"D", 0.0}, {"D", 2.5},
             {"nodes", 3.0}, {"g", 0.0}, {"bogus", 1.0}}) {
        ParameterMap bad = fig3a();
        bad[key] = value;
        CHECK_THROWS_AS((void)resolve_setup(bad), InvalidParameter);
    }
}

TEST_CASE("momentum resolution") {
    ParameterMap p = fig3a();
    const Setup s = resolve_setup(p);
    CHECK_THROWS_AS((void)resolve_momentum(p, s), InvalidParameter);
    p["eps_k"] = 0.0;
    CHECK(resolve_momentum(p, s) == doctest::Approx(std::acos(0.25)));
    p["k"] = 1.0;
    CHECK(resolve_momentum(p, s) == 1.0);
    p["k"] = 4.0;
    CHECK_THROWS_AS((void)resolve_momentum(p, s), DomainError);
}

TEST_CASE("spec validation") {
    SweepSpec spec = k_spectrum(fig3a(), 10);
    CHECK_NOTHROW(spec.validate());
    spec.axes[0].name = "nope";
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
    spec = k_spectrum(fig3a(), 10);
    spec.axes[0].max = spec.axes[0].min;
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
    spec = k_spectrum(fig3a(), 10);
    spec.axes.push_back(spec.axes[0]);
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
    spec = k_spectrum(fig3a(), 10);
    spec.axes[0].count = 0;
    CHECK_THROWS_AS(spec.validate(), InvalidParameter);
}

TEST_CASE("grid") {
    const Axis a{"k", 0.0, 1.0, 5};
    const auto g = a.grid();
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(g[2] == 0.5);
    const Axis one{"k", 0.3, 0.3, 1};
    CHECK(one.grid() == std::vector<double>{0.3});
}

TEST_CASE("fig3a spectrum: perfect transmission row and flux") {
    SweepSpec spec = k_spectrum(fig3a(), 2000);
    spec.quantity = Quantity::flux;
    const auto res = run_sweep(spec);
    REQUIRE(res.size() == 2000);
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        CHECK(std::abs(res.values[i] - 1.0) <= 1e-10);
        if (std::abs(res.eps_k[i]) < std::abs(res.eps_k[nearest])) nearest = i;
    }
    CHECK(std::norm(res.r[nearest]) <= 1e-6);
}

TEST_CASE("singular grid points carry the analytic limit") {
    ParameterMap p = fig3a();
    p["omega_e"] = 1.0;
    p["Omega"] = 0.0;
    SweepSpec spec;
    spec.axes = {{"k", kPi / 4, 3 * kPi / 4, 3}};
    spec.fixed = p;
    const auto res = run_sweep(spec);
    CHECK(res.mask[1] == kMaskSingular);
    CHECK(res.values[1] == 1.0);
    CHECK(res.r[1] == Complex(-1.0));
    CHECK(res.mask[0] == 0);
}

TEST_CASE("per-point errors never abort the sweep") {
    SweepSpec spec;
    spec.axes = {{"eps_k", -10.0, 10.0, 21}};
    spec.fixed = fig3a();
    const auto res = run_sweep(spec);
    int errors = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        if (res.mask[i] & kMaskError) {
            ++errors;
            CHECK(res.values[i] == 0.0);
        }
        CHECK(std::isfinite(res.values[i]));
    }
    CHECK(errors > 0);
    CHECK(errors < 21);

    SweepSpec bad;
    bad.axes = {{"t", -1.0, 1.0, 3}};
    bad.fixed = fig3a();
    bad.fixed["k"] = 1.0;
    const auto r2 = run_sweep(bad);
    CHECK(r2.mask[0] == kMaskError);
    CHECK(r2.mask[1] == kMaskError);
    CHECK(r2.mask[2] == 0);
}

TEST_CASE("no atom") {
    ParameterMap p{{"nodes", 0.0}, {"t", 1.0}};
    SweepSpec spec;
    spec.axes = {{"k", 0.5, 2.5, 2}};
    spec.fixed = p;
    spec.engine = Engine::both;
    const auto res = run_sweep(spec);
    CHECK(res.values == std::vector<double>{0.0, 0.0});
    const auto cmp = compare_engines(res);
    CHECK(cmp.compared == 2);
    CHECK(std::abs(std::norm(res.oracle_r[0])) < 1e-20);
}

TEST_CASE("worker count does not change the output") {
    SweepSpec spec;
    spec.axes = {{"Omega", -3.5, 3.5, 37}, {"omega_C", -3.0, 3.0, 41}};
    spec.fixed = fig3a();
    spec.fixed.erase("delta");
    spec.fixed["omega_a"] = 0.0;
    spec.fixed["omega_C"] = 0.0;
    spec.fixed["k"] = 2.0;
    const auto one = run_sweep(spec);
    for (int w : {2, 3, 4, 7}) {
        spec.workers = w;
        const auto many = run_sweep(spec);
        CHECK(same_bits(one.values, many.values));
        CHECK(same_bits(one.mask, many.mask));
    }

    SweepSpec k1 = k_spectrum(fig3a(), 1001);
    const auto a = run_sweep(k1);
    k1.workers = 5;
    const auto b = run_sweep(k1);
    CHECK(same_bits(a.values, b.values));
    CHECK(same_bits(a.r, b.r));
}

TEST_CASE("batch kernel choice does not change the output") {
    const SweepSpec spec = k_spectrum(fig3a(), 997);
    kernels::set_isa_override(kernels::Isa::scalar);
    const auto a = run_sweep(spec);
    kernels::set_isa_override(std::nullopt);
    const auto b = run_sweep(spec);
    CHECK(same_bits(a.r, b.r));
    CHECK(same_bits(a.s, b.s));
}

TEST_CASE("engine comparison") {
    SweepSpec spec = k_spectrum(fig3a(), 400);
    CHECK(compare_engines(spec).max_deviation <= 1e-8);

    spec.fixed["Gamma"] = 0.04;
    spec.fixed["gamma"] = 0.04;
    CHECK(compare_engines(spec).max_deviation <= 1e-8);

    ParameterMap two = fig3a();
    two["nodes"] = 2;
    two["D"] = 6;
    two["delta2"] = 0.4;
    spec = k_spectrum(two, 300);
    const auto cmp = compare_engines(spec);
    CHECK(cmp.max_deviation <= 1e-8);
    CHECK(cmp.location.size() == 1);

    spec.convention = Convention::printed;
    CHECK(compare_engines(spec).max_deviation > 1e-2);

    const auto plain = run_sweep(k_spectrum(fig3a(), 10));
    CHECK_THROWS_AS((void)compare_engines(plain), InvalidParameter);
}

TEST_CASE("oracle engine alone") {
    SweepSpec spec = k_spectrum(fig3a(), 50);
    const auto a = run_sweep(spec);
    spec.engine = Engine::oracle;
    const auto o = run_sweep(spec);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values[i] - o.values[i]) < 1e-8);
}

TEST_CASE("parallel sweep is not slower than serial") {
    SweepSpec spec;
    spec.axes = {{"Omega", 0.0, 3.0, 320}, {"k", 0.01, 3.13, 320}};
    spec.fixed = fig3a();
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    const auto a = run_sweep(spec);
    const double serial = std::chrono::duration<double>(clock::now() - t0).count();
    spec.workers = 4;
    t0 = clock::now();
    const auto b = run_sweep(spec);
    const double parallel = std::chrono::duration<double>(clock::now() - t0).count();
    CHECK(same_bits(a.values, b.values));
    CHECK(parallel <= 1.5 * serial + 0.05);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "cavarray/errors.hpp"
#include "cavarray/quasibound.hpp"
#include "oracles.hpp"

using namespace cavarray;

namespace {

AtomParams two_level(double omega_e, double g = 1.0) {
    AtomParams a;
    a.omega_e = omega_e;
    a.g = g;
    return a;
}

/// Lambda node with its potential pole at the given energy.
AtomParams mirror_at(double energy) {
    AtomParams a;
    a.omega_e = energy + 0.7;
    a.Omega = 0.5;
    a.delta = solve_resonance_parameter(energy, a, FreeParameter::delta).at(0);
    return a;
}

}  // namespace

TEST_CASE("quantized momenta") {
    auto ks = quantized_momenta(10, 100);
    REQUIRE(ks.size() == 9);
    for (int n = 1; n <= 9; ++n) CHECK(ks[n - 1] == doctest::Approx(kPi * n / 10));
    CHECK(quantized_momenta(1, 5).empty());
    ks = quantized_momenta(2, 5);
    REQUIRE(ks.size() == 1);
    CHECK(ks[0] == doctest::Approx(kPi / 2));
    CHECK(quantized_momenta(10, 3).size() == 3);
    CHECK_THROWS_AS((void)quantized_momenta(0, 1), InvalidParameter);
}

TEST_CASE("bound profile") {
    const auto u2 = bound_profile(2, 1);
    REQUIRE(u2.size() == 3);
    CHECK(u2[0] == 0.0);
    CHECK(u2[1] == doctest::Approx(1.0));
    CHECK(u2[2] == 0.0);

    const auto u4 = bound_profile(4, 2);
    const double a = 1.0 / std::sqrt(2.0);
    CHECK(u4[0] == 0.0);
    CHECK(u4[1] == doctest::Approx(a));
    CHECK(u4[2] == 0.0);
    CHECK(u4[3] == doctest::Approx(-a));
    CHECK(u4[4] == 0.0);

    for (int n = 1; n < 10; ++n) {
        for (int m = 1; m < 10; ++m) {
            const auto un = bound_profile(10, n);
            const auto um = bound_profile(10, m);
            double dot = 0.0;
            for (std::size_t j = 0; j < un.size(); ++j) dot += un[j] * um[j];
            if (n == m) {
                CHECK(dot == doctest::Approx(1.0).epsilon(1e-14));
            } else {
                CHECK(std::abs(dot) <= 1e-12);
            }
        }
    }
    CHECK_THROWS_AS((void)bound_profile(10, 10), InvalidParameter);
    CHECK_THROWS_AS((void)bound_profile(1, 1), InvalidParameter);
}

TEST_CASE("residual is the cleared denominator up to a fixed factor") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> re(0.05, kPi - 0.05);
    std::uniform_real_distribution<double> im(-0.5, 0.05);
    std::uniform_int_distribution<int> dd(1, 20);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const LatticeParams lat = oracle::random_lattice(rng);
        const TwoNodeConfig cfg{oracle::random_atom(rng, i % 2 == 0), oracle::random_atom(rng, i % 2 == 0), dd(rng)};
        const Complex k(re(rng), im(rng));
        Complex residual;
        try {
            residual = quasibound_residual(k, cfg, lat);
        } catch (const PoleError&) {
            continue;
        }
        const auto terms = two_node_terms(k, cfg, lat);
        const Complex factor = terms.node1.denominator * terms.node2.denominator *
                               std::exp(Complex(0.0, 2.0) * k * double(cfg.D));
        CHECK(std::abs(residual * factor - terms.denominator) <=
              1e-9 * std::max(terms.scale, std::abs(terms.denominator)));
        ++checked;
    }
    CHECK(checked > 990);
}

TEST_CASE("transparent node cannot trap") {
    const LatticeParams lat{0.0, 1.0};
    AtomParams a;
    a.omega_e = 1.0;
    a.Omega = 0.8;
    a.delta = dispersion_energy(1.0, lat);
    AtomParams b = a;
    const Complex r = quasibound_residual(1.0, {a, b, 5}, lat);
    const Complex w(0.0, 2.0 * std::sin(1.0));
    const Complex v2 = effective_potential(a.delta, b);
    CHECK(std::abs(r - std::exp(Complex(0.0, -10.0)) * w * (w - v2)) < 1e-12);
    CHECK(std::abs(r) > 0.1);
}

TEST_CASE("pole error") {
    const LatticeParams lat{0.0, 1.0};
    const AtomParams a = two_level(dispersion_energy(1.0, lat));
    CHECK_THROWS_AS((void)quasibound_residual(Complex(1.0, 0.0), {a, a, 3}, lat), PoleError);
}

TEST_CASE("resonant nodes trap modes at pi n / D") {
    const LatticeParams lat{1.0, 0.01};
    const AtomParams a = two_level(1.0);
    const auto search = find_quasibound_modes({a, a, 10}, lat);
    REQUIRE(search.modes.size() == 9);
    for (int n = 1; n <= 9; ++n) {
        const auto& m = search.modes[n - 1];
        REQUIRE(m.n.has_value());
        CHECK(*m.n == n);
        CHECK(std::abs(m.k.real() - kPi * n / 10) < 1e-3);
        CHECK(std::abs(m.k.imag()) <= 1e-8);
        CHECK(m.energy.imag() <= 1e-12);
        CHECK(m.residual <= 1e-10);
    }
    for (std::size_t i = 1; i < search.modes.size(); ++i) {
        CHECK(search.modes[i].k.real() > search.modes[i - 1].k.real());
    }
}

TEST_CASE("detuned nodes give leaky modes") {
    const LatticeParams lat{0.0, 1.0};
    const auto search = find_quasibound_modes({two_level(0.3), two_level(0.3), 10}, lat);
    REQUIRE_FALSE(search.modes.empty());
    for (const auto& m : search.modes) {
        CHECK(m.leakage > 0.0);
        CHECK(m.energy.imag() < 0.0);
        CHECK(m.leakage == doctest::Approx(-2.0 * m.energy.imag()));
    }
}

TEST_CASE("passivity over random lossless configurations") {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> dd(2, 12);
    for (int i = 0; i < 20; ++i) {
        const LatticeParams lat = oracle::random_lattice(rng);
        const TwoNodeConfig cfg{oracle::random_atom(rng, false), oracle::random_atom(rng, false), dd(rng)};
        RootSearchOptions opts;
        opts.seeds_re = 24;
        opts.seeds_im = 4;
        const auto search = find_quasibound_modes(cfg, lat, {}, opts);
        for (const auto& m : search.modes) CHECK(m.energy.imag() <= 1e-12);
    }
}

TEST_CASE("continuation toward resonance converges on the quantized momentum") {
    const LatticeParams lat{0.0, 1.0};
    const int D = 10;
    const int n = 3;
    const double kn = kPi * n / D;
    const double en = dispersion_energy(kn, lat);
    double prev_dist = 1.0;
    double prev_leak = 1.0;
    for (double delta : {1e-2, 1e-3, 1e-4}) {
        const AtomParams m = mirror_at(en + delta);
        SearchWindow win{kn - 0.1, kn + 0.1, -0.05, 0.01};
        const auto search = find_quasibound_modes({m, m, D}, lat, win);
        const QuasiboundMode* best = nullptr;
        for (const auto& mode : search.modes) {
            if (!best || std::abs(mode.k - kn) < std::abs(best->k - kn)) best = &mode;
        }
        REQUIRE(best != nullptr);
        const double dist = std::abs(best->k - kn);
        CHECK(dist < prev_dist);
        CHECK(dist <= 10.0 * delta);
        CHECK(best->leakage < prev_leak);
        CHECK(best->leakage > 0.0);
        prev_dist = dist;
        prev_leak = best->leakage;
    }
}

TEST_CASE("search validation") {
    const LatticeParams lat{0.0, 1.0};
    SearchWindow bad{1.0, 0.5, -0.1, 0.0};
    CHECK_THROWS_AS((void)find_quasibound_modes({two_level(0.3), two_level(0.3), 4}, lat, bad), InvalidParameter);
}

#include "cavarray/quasibound.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cavarray/errors.hpp"

namespace cavarray {

namespace {

constexpr Complex kI(0.0, 1.0);

struct Evaluation {
    Complex value;
    double scale;
};

Evaluation evaluate(Complex k, const TwoNodeConfig& cfg, const LatticeParams& lat) {
    const TwoNodeTerms terms = two_node_terms(k, cfg, lat);
    return {terms.denominator, terms.scale};
}

double relative(const Evaluation& e) {
    return e.scale > 0.0 ? std::abs(e.value) / e.scale : std::abs(e.value);
}

Complex derivative(Complex k, const TwoNodeConfig& cfg, const LatticeParams& lat) {
    const double h = 1e-7 * std::max(1.0, std::abs(k));
    return (evaluate(k + h, cfg, lat).value - evaluate(k - h, cfg, lat).value) / (2.0 * h);
}

}  // namespace

Complex quasibound_residual(Complex k, const TwoNodeConfig& cfg, const LatticeParams& lat,
                            double pole_tolerance) {
    const Complex energy = dispersion_energy(k, lat);
    const auto v1 = try_effective_potential(energy, cfg.atom1, pole_tolerance);
    const auto v2 = try_effective_potential(energy, cfg.atom2, pole_tolerance);
    if (!v1 || !v2) {
        throw PoleError("E(k) lies on a node potential pole at k = " + std::to_string(k.real()) +
                        " + " + std::to_string(k.imag()) + "i");
    }
    const Complex w = 2.0 * kI * lat.t * std::sin(k);
    const Complex phase = std::exp(-2.0 * kI * k * static_cast<double>(cfg.D));
    return phase * (w - *v1) * (w - *v2) - *v1 * *v2;
}

QuasiboundSearch find_quasibound_modes(const TwoNodeConfig& cfg, const LatticeParams& lat,
                                       const SearchWindow& window, const RootSearchOptions& opts) {
    cfg.validate();
    lat.validate();
    if (!(window.re_min < window.re_max && window.im_min < window.im_max)) {
        throw InvalidParameter("empty quasibound search window");
    }

    QuasiboundSearch search;
    std::vector<Complex> roots;

    const double step_re = (window.re_max - window.re_min) / opts.seeds_re;
    const double step_im = (window.im_max - window.im_min) / opts.seeds_im;

    for (int a = 0; a < opts.seeds_re; ++a) {
        for (int b = 0; b < opts.seeds_im; ++b) {
            const Complex seed(window.re_min + (a + 0.5) * step_re,
                               window.im_min + (b + 0.5) * step_im);
            Complex k = seed;
            bool converged = false;
            for (int it = 0; it < opts.max_iterations; ++it) {
                const Evaluation f = evaluate(k, cfg, lat);
                if (relative(f) <= opts.residual_tolerance) {
                    converged = true;
                    break;
                }
                Complex slope = derivative(k, cfg, lat);
                Complex deflation = 0.0;
                for (const Complex& root : roots) deflation += 1.0 / (k - root);
                const Complex denom = slope - f.value * deflation;
                if (denom == 0.0) break;
                const Complex step = f.value / denom;
                k -= step;
                if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) break;
                if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(k))) {
                    converged = true;
                    break;
                }
            }
            if (!converged) {
                search.failures.push_back({seed, "no convergence"});
                continue;
            }
            // Polish without deflation.
            for (int it = 0; it < 3; ++it) {
                const Evaluation f = evaluate(k, cfg, lat);
                const Complex slope = derivative(k, cfg, lat);
                if (slope == 0.0 || relative(f) == 0.0) break;
                k -= f.value / slope;
            }
            const Evaluation f = evaluate(k, cfg, lat);
            if (!(relative(f) <= opts.accept_tolerance)) {
                search.failures.push_back({seed, "residual above acceptance"});
                continue;
            }
            if (k.real() < opts.edge_exclusion || k.real() > kPi - opts.edge_exclusion) {
                continue;  // band-edge roots where w vanishes
            }
            const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const Complex& r) {
                return std::abs(r - k) <= opts.duplicate_distance;
            });
            if (duplicate) continue;
            roots.push_back(k);
        }
    }

    const double slack = 1e-9;
    for (const Complex& k : roots) {
        if (k.real() < window.re_min - slack || k.real() > window.re_max + slack ||
            k.imag() < window.im_min - slack || k.imag() > window.im_max + slack) {
            continue;
        }
        QuasiboundMode mode;
        mode.k = k;
        mode.energy = dispersion_energy(k, lat);
        mode.leakage = -2.0 * mode.energy.imag();
        mode.residual = relative(evaluate(k, cfg, lat));
        const int n = static_cast<int>(std::lround(k.real() * cfg.D / kPi));
        if (n >= 1 && n <= cfg.D - 1) mode.n = n;
        search.modes.push_back(mode);
    }
    std::sort(search.modes.begin(), search.modes.end(),
              [](const QuasiboundMode& a, const QuasiboundMode& b) {
                  if (a.k.real() != b.k.real()) return a.k.real() < b.k.real();
                  return a.k.imag() < b.k.imag();
              });
    return search;
}

std::vector<double> quantized_momenta(int D, int n_max) {
    if (D < 1) throw InvalidParameter("node separation D must be >= 1");
    std::vector<double> ks;
    for (int n = 1; n <= std::min(n_max, D - 1); ++n) {
        ks.push_back(kPi * n / D);
    }
    return ks;
}

std::vector<double> bound_profile(int D, int n) {
    if (D < 2 || n < 1 || n > D - 1) {
        throw InvalidParameter("bound profile needs 1 <= n <= D - 1, got n = " +
                               std::to_string(n) + ", D = " + std::to_string(D));
    }
    std::vector<double> u(static_cast<std::size_t>(D) + 1, 0.0);
    double norm = 0.0;
    for (int j = 1; j < D; ++j) {
        // nodes of the standing wave are exact zeros
        u[static_cast<std::size_t>(j)] = (n * j) % D == 0 ? 0.0 : std::sin(kPi * n * j / D);
        norm += u[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
    }
    const double amplitude = 1.0 / std::sqrt(norm);
    for (double& x : u) x *= amplitude;
    return u;
}

}  // namespace cavarray

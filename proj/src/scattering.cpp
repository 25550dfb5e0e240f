#include "cavarray/scattering.hpp"

#include <array>
#include <cmath>
#include <string>

#include "cavarray/errors.hpp"
#include "cavarray/kernels.hpp"

namespace cavarray {

namespace {

constexpr Complex kI(0.0, 1.0);

void fill_probabilities(ScatteringResult& res) {
    res.R = std::norm(res.r);
    res.T = std::norm(res.s);
    res.xi = 1.0 - (res.R + res.T);
}

void require_open_momentum(double k) {
    if (!(k > 0.0 && k < kPi)) {
        throw DomainError("momentum must lie in (0, pi), got " + std::to_string(k));
    }
}

}  // namespace

void TwoNodeConfig::validate() const {
    atom1.validate();
    atom2.validate();
    if (D < 1) throw InvalidParameter("node separation D must be >= 1");
}

ScatteringResult single_node_scatter(double k, const AtomParams& atom, const LatticeParams& lat,
                                     const ScatterOptions& opts) {
    ScatteringResult res;
    res.k = k;
    res.energy = dispersion_energy(k, lat);

    const kernels::NodeCoefficients c{lat.omega, lat.t,     atom.omega_e, atom.delta,
                                      atom.Omega, atom.g,   atom.Gamma,   atom.gamma,
                                      opts.singular_tolerance};
    const std::array<double, 1> cos_k{std::cos(k)};
    const std::array<double, 1> sin_k{std::sin(k)};
    std::array<double, 1> r_re{}, r_im{}, s_re{}, s_im{};
    std::array<std::uint8_t, 1> singular{};
    kernels::detail::single_node_scalar(c, {cos_k, sin_k, r_re, r_im, s_re, s_im, singular}, 0, 1);

    res.r = {r_re[0], r_im[0]};
    res.s = {s_re[0], s_im[0]};
    res.singular = singular[0] != 0;
    fill_probabilities(res);
    return res;
}

double loss_ratio(double k, const AtomParams& atom, const LatticeParams& lat,
                  const ScatterOptions& opts) {
    return single_node_scatter(k, atom, lat, opts).xi;
}

TwoNodeTerms two_node_terms(Complex k, const TwoNodeConfig& cfg, const LatticeParams& lat) {
    TwoNodeTerms terms;
    const Complex energy = dispersion_energy(k, lat);
    terms.w = 2.0 * kI * lat.t * std::sin(k);
    terms.phase = std::exp(2.0 * kI * k * static_cast<double>(cfg.D));
    terms.node1 = potential_terms(energy, cfg.atom1);
    terms.node2 = potential_terms(energy, cfg.atom2);

    const auto& [n1, q1] = terms.node1;
    const auto& [n2, q2] = terms.node2;
    const Complex left = (terms.w * q1 - n1) * (terms.w * q2 - n2);
    const Complex right = n1 * n2 * terms.phase;
    terms.denominator = left - right;
    terms.r_numerator = n1 * (terms.w * q2 - n2) + n2 * terms.phase * (terms.w * q1 + n1);
    terms.s_numerator = terms.w * terms.w * q1 * q2;
    terms.scale = std::abs(left) + std::abs(right);
    return terms;
}

ScatteringResult two_node_scatter(double k, const TwoNodeConfig& cfg, const LatticeParams& lat,
                                  Convention convention, const ScatterOptions& opts) {
    require_open_momentum(k);
    cfg.validate();

    ScatteringResult res;
    res.k = k;
    res.energy = dispersion_energy(k, lat);

    // The printed closed form is the physical one at -k.
    const double k_eval = convention == Convention::physical ? k : -k;
    const TwoNodeTerms terms = two_node_terms(Complex(k_eval, 0.0), cfg, lat);

    const bool first_singular = is_singular(terms.node1, cfg.atom1, opts.singular_tolerance);
    const bool second_singular = is_singular(terms.node2, cfg.atom2, opts.singular_tolerance);
    res.singular = first_singular || second_singular;

    if (first_singular) {
        res.r = -1.0;
        res.s = 0.0;
    } else {
        if (std::abs(terms.denominator) <= opts.resonance_tolerance * terms.scale) {
            throw ResonanceDenominator("two-node denominator vanishes at k = " +
                                       std::to_string(k));
        }
        res.r = terms.r_numerator / terms.denominator;
        res.s = second_singular ? Complex(0.0) : terms.s_numerator / terms.denominator;
    }
    fill_probabilities(res);
    return res;
}

double limit_energy(double k, EnergyRegime regime, const LatticeParams& lat) {
    if (regime == EnergyRegime::high) return lat.omega - lat.t * kPi + 2.0 * lat.t * k;
    return lat.omega - 2.0 * lat.t + lat.t * k * k;
}

ScatteringResult limit_scatter(double k, EnergyRegime regime, const AtomParams& atom,
                               const LatticeParams& lat, const LimitWindow& window,
                               const ScatterOptions& opts) {
    if (regime == EnergyRegime::high && !(std::abs(k - 0.5 * kPi) <= window.high)) {
        throw WindowError("high-energy limit requires |k - pi/2| <= " +
                          std::to_string(window.high));
    }
    if (regime == EnergyRegime::low && !(k > 0.0 && k <= window.low)) {
        throw WindowError("low-energy limit requires 0 < k <= " + std::to_string(window.low));
    }

    ScatteringResult res;
    res.k = k;
    res.energy = limit_energy(k, regime, lat);
    const Complex w = regime == EnergyRegime::high ? 2.0 * kI * lat.t : 2.0 * kI * lat.t * k;
    const PotentialTerms terms = potential_terms(res.energy, atom);
    if (is_singular(terms, atom, opts.singular_tolerance)) {
        res.singular = true;
        res.r = -1.0;
        res.s = 0.0;
    } else {
        res.r = terms.numerator / (w * terms.denominator - terms.numerator);
        res.s = 1.0 + res.r;
    }
    fill_probabilities(res);
    return res;
}

std::vector<double> solve_resonance_parameter(double energy, const AtomParams& atom,
                                              FreeParameter free) {
    const double excited = energy - atom.omega_e;
    if (free == FreeParameter::Omega) {
        const double metastable = energy - atom.delta;
        if (metastable == 0.0) {
            throw NoSolution("E = delta is the two-photon resonance; V vanishes for every Omega");
        }
        const double omega2 = excited * metastable;
        if (omega2 < 0.0) {
            throw NoSolution("(E - omega_e)(E - delta) < 0: no real Rabi frequency");
        }
        return {std::sqrt(omega2)};
    }
    if (excited == 0.0) {
        throw NoSolution(atom.Omega == 0.0
                             ? "two-level node already resonant; delta does not control it"
                             : "E = omega_e with Omega > 0: no detuning reaches resonance");
    }
    return {energy - atom.Omega * atom.Omega / excited};
}

std::vector<double> find_perfect_reflection(double target_k, const AtomParams& atom,
                                            FreeParameter free, const LatticeParams& lat) {
    if (!atom.is_lossless()) {
        throw InvalidParameter("perfect reflection requires Gamma = gamma = 0");
    }
    return solve_resonance_parameter(dispersion_energy(target_k, lat), atom, free);
}

double find_perfect_transmission(const AtomParams& atom, const LatticeParams& lat) {
    return momentum_from_energy(atom.delta, lat);
}

}  // namespace cavarray

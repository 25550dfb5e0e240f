#include "cavarray/core_model.hpp"

#include <cmath>
#include <string>

#include "cavarray/errors.hpp"

namespace cavarray {

namespace {

void require_finite(double value, const char* name) {
    if (!std::isfinite(value)) {
        throw InvalidParameter(std::string(name) + " must be finite");
    }
}

}  // namespace

void LatticeParams::validate() const {
    require_finite(omega, "omega");
    require_finite(t, "t");
    if (!(t > 0.0)) {
        throw InvalidParameter("hopping t must be positive, got " + std::to_string(t));
    }
}

void AtomParams::validate() const {
    require_finite(omega_e, "omega_e");
    require_finite(delta, "delta");
    require_finite(Omega, "Omega");
    require_finite(g, "g");
    require_finite(Gamma, "Gamma");
    require_finite(gamma, "gamma");
    if (Omega < 0.0) throw InvalidParameter("Rabi frequency Omega must be >= 0");
    if (!(g > 0.0)) throw InvalidParameter("coupling g must be positive");
    if (Gamma < 0.0) throw InvalidParameter("decay rate Gamma must be >= 0");
    if (gamma < 0.0) throw InvalidParameter("decay rate gamma must be >= 0");
}

AtomParams AtomParams::from_frequencies(double omega_e, double omega_a, double omega_C,
                                        double Omega, double g) {
    AtomParams atom;
    atom.omega_e = omega_e;
    atom.delta = omega_a - omega_C;
    atom.Omega = Omega;
    atom.g = g;
    return atom;
}

double dispersion_energy(double k, const LatticeParams& lat) {
    if (!(k > 0.0 && k < kPi)) {
        throw DomainError("momentum must lie in (0, pi), got " + std::to_string(k));
    }
    return lat.omega - 2.0 * lat.t * std::cos(k);
}

Complex dispersion_energy(Complex k, const LatticeParams& lat) {
    return lat.omega - 2.0 * lat.t * std::cos(k);
}

double momentum_from_energy(double energy, const LatticeParams& lat) {
    const double x = (lat.omega - energy) / (2.0 * lat.t);
    if (!(std::abs(x) < 1.0)) {
        throw OutOfBand("energy " + std::to_string(energy) + " outside the open band (" +
                        std::to_string(lat.omega - 2.0 * lat.t) + ", " +
                        std::to_string(lat.omega + 2.0 * lat.t) + ")");
    }
    return std::acos(x);
}

PotentialTerms potential_terms(Complex energy, const AtomParams& atom) {
    const double g2 = atom.g * atom.g;
    const Complex excited = energy - atom.omega_e + Complex(0.0, atom.Gamma);
    if (atom.is_two_level()) {
        return {Complex(g2, 0.0), excited};
    }
    const Complex metastable = energy - atom.delta + Complex(0.0, atom.gamma);
    return {g2 * metastable, excited * metastable - atom.Omega * atom.Omega};
}

bool is_singular(const PotentialTerms& terms, const AtomParams& atom, double tolerance) {
    const double scale = atom.is_two_level() ? atom.g : atom.g * atom.g;
    return std::abs(terms.denominator) < tolerance * scale;
}

std::optional<ComplexEnergy> try_effective_potential(Complex energy, const AtomParams& atom,
                                                     double tolerance) {
    const PotentialTerms terms = potential_terms(energy, atom);
    if (is_singular(terms, atom, tolerance)) return std::nullopt;
    return terms.numerator / terms.denominator;
}

ComplexEnergy effective_potential(Complex energy, const AtomParams& atom, double tolerance) {
    auto v = try_effective_potential(energy, atom, tolerance);
    if (!v) {
        throw SingularPotential("effective potential is singular at E = " +
                                std::to_string(energy.real()) + " + " +
                                std::to_string(energy.imag()) + "i");
    }
    return *v;
}

PotentialDecomposition decompose_potential(const AtomParams& atom) {
    const double half_gap = 0.5 * (atom.omega_e - atom.delta);
    const double mu = std::hypot(atom.Omega, half_gap);
    if (mu == 0.0) {
        throw DegenerateDecomposition(
            "Omega = 0 and omega_e = delta: the potential has a single pole");
    }
    PotentialDecomposition d;
    d.mu = mu;
    d.nu = half_gap / mu;
    d.A = 0.5 * (1.0 + d.nu);
    d.B = 0.5 * (1.0 - d.nu);
    const double centre = 0.5 * (atom.omega_e + atom.delta);
    d.omega_plus = centre + mu;
    d.omega_minus = centre - mu;
    return d;
}

ComplexEnergy decomposed_potential(Complex energy, const PotentialDecomposition& d, double g) {
    return g * g * (d.A / (energy - d.omega_plus) + d.B / (energy - d.omega_minus));
}

HalfWidths fwhm(const AtomParams& atom, double zeta) {
    const double mean = 0.5 * (atom.Gamma + atom.gamma);
    const double split = (atom.Gamma - atom.gamma) * zeta;
    return {mean - split, mean + split};
}

}  // namespace cavarray

#pragma once

// Physical parameter types, tight-binding dispersion and the energy-dependent
// delta potential of a Lambda-type node embedded in one cavity of the array.
//
// All energies are expressed in units of the probe coupling g (g = 1 unless a
// node overrides it). The lattice constant is identically 1.

#include <complex>
#include <optional>

namespace cavarray {

using Complex = std::complex<double>;
using ComplexEnergy = std::complex<double>;
using ComplexAmplitude = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Default relative tolerance for detecting a vanishing potential denominator.
inline constexpr double kDefaultSingularTolerance = 1e-12;

/// Cavity array: mode frequency omega and hopping t (t > 0).
struct LatticeParams {
    double omega = 0.0;
    double t = 1.0;

    void validate() const;
};

/// One Lambda-type node in the rotating frame.
///
/// delta is the detuning omega_a - omega_C of the metastable level from the
/// control field. Omega = 0 reduces the node to a two-level emitter with
/// transition energy omega_e. Gamma and gamma are the phenomenological decay
/// rates of the excited and metastable levels; they enter as omega_e - i Gamma
/// and delta - i gamma.
struct AtomParams {
    double omega_e = 0.0;
    double delta = 0.0;
    double Omega = 0.0;
    double g = 1.0;
    double Gamma = 0.0;
    double gamma = 0.0;

    void validate() const;
    [[nodiscard]] bool is_two_level() const { return Omega == 0.0; }
    [[nodiscard]] bool is_lossless() const { return Gamma == 0.0 && gamma == 0.0; }

    /// Builds a node from bare level/field frequencies: delta = omega_a - omega_C.
    static AtomParams from_frequencies(double omega_e, double omega_a, double omega_C,
                                       double Omega, double g = 1.0);
};

/// Double-Lorentzian form V = g^2 (A / (E - omega_plus) + B / (E - omega_minus)).
struct PotentialDecomposition {
    double omega_plus = 0.0;
    double omega_minus = 0.0;
    double mu = 0.0;  ///< half the splitting omega_plus - omega_minus
    double nu = 0.0;  ///< peak asymmetry, |nu| <= 1
    double A = 0.0;   ///< weight of the omega_plus pole
    double B = 0.0;   ///< weight of the omega_minus pole
};

/// V = numerator / denominator with common factors removed.
///
/// For Omega != 0: numerator = g^2 (E - delta + i gamma),
/// denominator = (E - omega_e + i Gamma)(E - delta + i gamma) - Omega^2.
/// For Omega == 0 the shared factor cancels: numerator = g^2,
/// denominator = E - omega_e + i Gamma.
struct PotentialTerms {
    Complex numerator;
    Complex denominator;
};

/// E = omega - 2 t cos k for k in (0, pi). Throws DomainError otherwise.
[[nodiscard]] double dispersion_energy(double k, const LatticeParams& lat);

/// Complex continuation of the dispersion, used on the quasibound search plane.
[[nodiscard]] Complex dispersion_energy(Complex k, const LatticeParams& lat);

/// Inverse dispersion on the k in (0, pi) branch. Throws OutOfBand when
/// |E - omega| >= 2t.
[[nodiscard]] double momentum_from_energy(double energy, const LatticeParams& lat);

[[nodiscard]] PotentialTerms potential_terms(Complex energy, const AtomParams& atom);

/// True when |denominator| falls below tolerance * g^2 (g for the two-level form).
[[nodiscard]] bool is_singular(const PotentialTerms& terms, const AtomParams& atom,
                               double tolerance = kDefaultSingularTolerance);

/// Effective delta potential, or nullopt at a perfect-reflection pole.
[[nodiscard]] std::optional<ComplexEnergy> try_effective_potential(
    Complex energy, const AtomParams& atom, double tolerance = kDefaultSingularTolerance);

/// Effective delta potential. Throws SingularPotential at a pole.
[[nodiscard]] ComplexEnergy effective_potential(Complex energy, const AtomParams& atom,
                                                double tolerance = kDefaultSingularTolerance);

/// Resonant frequencies and weights of the lossless potential. Decay rates are
/// ignored. Throws DegenerateDecomposition when mu = 0.
[[nodiscard]] PotentialDecomposition decompose_potential(const AtomParams& atom);

/// Evaluates the decomposed form at a (real or complex) energy.
[[nodiscard]] ComplexEnergy decomposed_potential(Complex energy, const PotentialDecomposition& d,
                                                 double g);

/// Full widths at half maximum of the two decay-broadened potential peaks.
/// zeta is the first-order expansion coefficient and must be supplied by the caller.
struct HalfWidths {
    double first = 0.0;
    double second = 0.0;
};
[[nodiscard]] HalfWidths fwhm(const AtomParams& atom, double zeta);

}  // namespace cavarray

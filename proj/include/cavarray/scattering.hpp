#pragma once

// Closed-form single-photon reflection and transmission through one or two
// nodes of the cavity array.
//
// Direction convention: the incident wave is e^{ikj}, travelling toward +j
// (positive group velocity 2t sin k). The reflected wave is r e^{-ikj} for
// j < 0 and the transmitted wave s e^{ikj} beyond the last node, with phases
// referenced to the first node at j = 0. The finite-chain linear solve in
// lattice_oracle uses the same convention.

#include <cstdint>
#include <vector>

#include "cavarray/core_model.hpp"

namespace cavarray {

struct ScatteringResult {
    double k = 0.0;
    double energy = 0.0;
    ComplexAmplitude r;
    ComplexAmplitude s;
    double R = 0.0;
    double T = 0.0;
    double xi = 0.0;  ///< loss ratio 1 - (R + T)
    bool singular = false;  ///< a node potential diverged; analytic limit substituted
};

/// Two nodes: atom1 at site 0, atom2 at site D >= 1.
struct TwoNodeConfig {
    AtomParams atom1;
    AtomParams atom2;
    int D = 1;

    void validate() const;
};

/// Phase convention of the two-node amplitudes.
///
/// Physical is the repository convention described above. Printed evaluates
/// the textbook closed form with the incident wave written as e^{-ikj}; it is
/// the Physical result at momentum -k and differs in phase (for lossless nodes
/// it is the complex conjugate) but not in magnitude.
enum class Convention { physical, printed };

struct ScatterOptions {
    double singular_tolerance = kDefaultSingularTolerance;
    /// Relative threshold for a vanishing two-node denominator.
    double resonance_tolerance = 1e-14;
};

[[nodiscard]] ScatteringResult single_node_scatter(double k, const AtomParams& atom,
                                                   const LatticeParams& lat,
                                                   const ScatterOptions& opts = {});

[[nodiscard]] double loss_ratio(double k, const AtomParams& atom, const LatticeParams& lat,
                                const ScatterOptions& opts = {});

/// Two separated nodes. Throws ResonanceDenominator when the common
/// denominator vanishes at this real momentum.
[[nodiscard]] ScatteringResult two_node_scatter(double k, const TwoNodeConfig& cfg,
                                                const LatticeParams& lat,
                                                Convention convention = Convention::physical,
                                                const ScatterOptions& opts = {});

/// Pieces of the two-node closed form after clearing the potential
/// denominators (V_m = N_m / Q_m). Entire in k, which makes it suitable for
/// complex-momentum root finding.
struct TwoNodeTerms {
    Complex w;            ///< 2 i t sin k
    Complex phase;        ///< e^{2ikD}
    PotentialTerms node1;
    PotentialTerms node2;
    Complex denominator;  ///< (wQ1 - N1)(wQ2 - N2) - N1 N2 e^{2ikD}
    Complex r_numerator;  ///< N1 (wQ2 - N2) + N2 e^{2ikD} (wQ1 + N1)
    Complex s_numerator;  ///< w^2 Q1 Q2
    double scale = 0.0;   ///< |(wQ1 - N1)(wQ2 - N2)| + |N1 N2 e^{2ikD}|
};

/// Physical-convention terms at complex momentum.
[[nodiscard]] TwoNodeTerms two_node_terms(Complex k, const TwoNodeConfig& cfg,
                                          const LatticeParams& lat);

enum class EnergyRegime { high, low };

struct LimitWindow {
    double high = 0.2;  ///< |k - pi/2| bound for the high-energy form
    double low = 0.2;   ///< upper k bound for the low-energy form
};

/// Lineshape in the high-energy (k near pi/2, linear dispersion) or
/// low-energy (k near 0, quadratic dispersion) limit. The node potential is
/// the exact form evaluated at the linearised energy. Throws WindowError
/// outside the configured vicinity.
[[nodiscard]] ScatteringResult limit_scatter(double k, EnergyRegime regime, const AtomParams& atom,
                                             const LatticeParams& lat, const LimitWindow& window = {},
                                             const ScatterOptions& opts = {});

/// Linearised energy used by limit_scatter.
[[nodiscard]] double limit_energy(double k, EnergyRegime regime, const LatticeParams& lat);

enum class FreeParameter { Omega, delta };

/// Values of the free parameter that place the node resonance (E - omega_e)(E - delta) = Omega^2
/// at the given energy. Omega is returned as a non-negative magnitude.
/// Throws NoSolution when no real value exists.
[[nodiscard]] std::vector<double> solve_resonance_parameter(double energy, const AtomParams& atom,
                                                            FreeParameter free);

/// Same as solve_resonance_parameter at E(target_k). Requires a lossless node.
[[nodiscard]] std::vector<double> find_perfect_reflection(double target_k, const AtomParams& atom,
                                                          FreeParameter free,
                                                          const LatticeParams& lat);

/// Momentum of the two-photon resonance E = delta (r = 0). Throws OutOfBand.
[[nodiscard]] double find_perfect_transmission(const AtomParams& atom, const LatticeParams& lat);

}  // namespace cavarray

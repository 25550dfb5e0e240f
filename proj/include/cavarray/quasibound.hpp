#pragma once

// Photon modes trapped between two nodes: complex-momentum roots of the
// two-node scattering denominator, the quantised momenta of the perfectly
// resonant limit, and the standing-wave profile between the nodes.

#include <optional>
#include <string>
#include <vector>

#include "cavarray/core_model.hpp"
#include "cavarray/scattering.hpp"

namespace cavarray {

struct QuasiboundMode {
    Complex k;
    ComplexEnergy energy;
    /// -2 Im E: decay rate of the trapped probability.
    double leakage = 0.0;
    /// Nearest quantisation index round(D Re k / pi), when it lies in 1..D-1.
    std::optional<int> n;
    /// |denominator| / scale at the root (pole-free, scale-relative).
    double residual = 0.0;
};

/// Trapping condition in the repository convention:
/// e^{-2ikD} (w - V1)(w - V2) - V1 V2 with w = 2 i t sin k. Its zeros are the
/// zeros of the two-node denominator (the two differ by the factor
/// e^{-2ikD} Q1 Q2). Throws PoleError when E(k) sits on a potential pole.
[[nodiscard]] Complex quasibound_residual(Complex k, const TwoNodeConfig& cfg,
                                          const LatticeParams& lat,
                                          double pole_tolerance = kDefaultSingularTolerance);

struct SearchWindow {
    double re_min = 0.0;
    double re_max = kPi;
    double im_min = -0.5;
    double im_max = 0.05;
};

struct RootSearchOptions {
    int seeds_re = 48;
    int seeds_im = 6;
    int max_iterations = 100;
    double residual_tolerance = 1e-12;   ///< Newton stopping criterion (relative)
    double accept_tolerance = 1e-10;     ///< acceptance of a converged root (relative)
    double duplicate_distance = 1e-8;
    double edge_exclusion = 1e-6;        ///< roots this close to k = 0 or pi are dropped
};

struct SeedFailure {
    Complex seed;
    std::string reason;
};

struct QuasiboundSearch {
    std::vector<QuasiboundMode> modes;  ///< sorted by Re k, then Im k
    std::vector<SeedFailure> failures;
};

/// Grid-seeded Newton iteration with deflation of already found roots.
[[nodiscard]] QuasiboundSearch find_quasibound_modes(const TwoNodeConfig& cfg,
                                                     const LatticeParams& lat,
                                                     const SearchWindow& window = {},
                                                     const RootSearchOptions& opts = {});

/// pi n / D for n = 1 .. min(n_max, D - 1).
[[nodiscard]] std::vector<double> quantized_momenta(int D, int n_max);

/// Normalised standing wave u(j) = A sin(pi n j / D), j = 0..D, u(0) = u(D) = 0.
[[nodiscard]] std::vector<double> bound_profile(int D, int n);

}  // namespace cavarray

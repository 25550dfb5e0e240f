#pragma once

// Brute-force reference on a finite chain: the full single-excitation
// Hamiltonian (photon on any site, or one node excited to |e> or |a>), a
// stationary scattering solve that keeps every atomic amplitude, wavepacket
// propagation, and diagonalisation for trapped modes.

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "cavarray/core_model.hpp"

namespace cavarray {

struct Placement {
    int site = 0;
    AtomParams atom;
};

struct ChainSpec {
    int N = 64;                         ///< cavity sites, indices 0..N-1
    std::vector<Placement> placements;  ///< kept sorted by site
    LatticeParams lat;
    int buffer = 4;       ///< minimum distance of any node from either end
    double kappa = 0.0;   ///< uniform cavity leakage, enters as -i kappa/2 on every site

    void validate() const;
    [[nodiscard]] int dimension() const { return N + 2 * static_cast<int>(placements.size()); }
    /// Basis index of the |e> (excited) and |a> (metastable) state of node m.
    [[nodiscard]] int excited_index(std::size_t m) const { return N + 2 * static_cast<int>(m); }
    [[nodiscard]] int metastable_index(std::size_t m) const { return excited_index(m) + 1; }
};

/// Chain of N sites with the given nodes placed around the centre, first node
/// at site floor((N - span)/2).
[[nodiscard]] ChainSpec centred_chain(int N, const LatticeParams& lat,
                                      const std::vector<AtomParams>& atoms,
                                      const std::vector<int>& offsets);

/// Amplitudes over the single-excitation basis.
struct SingleExcitationState {
    Eigen::VectorXcd photon;      ///< u(j), j = 0..N-1
    Eigen::VectorXcd excited;     ///< u_e per node
    Eigen::VectorXcd metastable;  ///< u_a per node

    [[nodiscard]] double norm_squared() const;
    void normalize();
};

/// Dense single-excitation Hamiltonian. Basis: sites 0..N-1, then (|e>, |a>)
/// for each node in placement order. Decay rates put -i Gamma / -i gamma on
/// the atomic diagonal.
[[nodiscard]] Eigen::MatrixXcd build_hamiltonian(const ChainSpec& spec);

struct StationarySolution {
    ComplexAmplitude r;
    ComplexAmplitude s;
    SingleExcitationState state;  ///< unnormalised scattering state
};

/// Solves H u = E u at E = E(k) with plane-wave rows fixing
/// u(j) = e^{ikx} + r e^{-ikx} on the two leftmost sites and u(j) = s e^{ikx}
/// on the two rightmost, x measured from the first node. Requires kappa = 0.
[[nodiscard]] StationarySolution solve_stationary(const ChainSpec& spec, double k);

struct WavepacketSpec {
    double k0 = 0.5 * kPi;
    double sigma = 25.0;  ///< spatial width in sites
    double x0 = 0.0;      ///< initial centre site
    double tmax = 0.0;
    double dt = 0.0;      ///< 0 selects 0.05 / t
};

struct WavepacketResult {
    double R_meas = 0.0;  ///< probability left of the first node (of x0 when there are none)
    double T_meas = 0.0;  ///< probability right of the last node
    double atomic = 0.0;  ///< probability left on nodes and between them
    double norm_drift = 0.0;
    std::vector<double> times;
    std::vector<double> norms;
};

struct PropagationOptions {
    int history_every = 50;    ///< record the norm every this many steps
    double drift_bound = 1e-8; ///< enforced only for lossless chains
};

/// Chain and packet sized so neither the incoming, reflected nor transmitted
/// packet reaches the ends before tmax.
struct WavepacketSetup {
    ChainSpec chain;
    WavepacketSpec packet;
};
[[nodiscard]] WavepacketSetup plan_wavepacket(const LatticeParams& lat,
                                              const std::vector<AtomParams>& atoms,
                                              const std::vector<int>& offsets, double k0,
                                              double sigma);

/// Fourth-order Runge-Kutta propagation of a Gaussian packet. Throws
/// InsufficientChain when the packet would reach an end and IntegratorDrift
/// when a lossless run drifts beyond the bound.
[[nodiscard]] WavepacketResult propagate_wavepacket(const ChainSpec& spec, const WavepacketSpec& wp,
                                                    const PropagationOptions& opts = {});

struct Eigenmode {
    Complex energy;
    SingleExcitationState state;  ///< unit norm over the full basis
    double ipr = 0.0;               ///< sum |amplitude|^4 over the full basis
    double photon_fraction = 0.0;   ///< sum over sites of |u(j)|^2
    /// Share of the photonic probability strictly between the first and last
    /// node (0 with fewer than two nodes).
    double interior_weight = 0.0;
};

/// Full eigen-decomposition sorted by real energy. Uses the Hermitian solver
/// for lossless chains and the general complex solver otherwise.
[[nodiscard]] std::vector<Eigenmode> eigenmodes(const ChainSpec& spec);

/// |<profile, u>|^2 / (|u|^2 |profile|^2) over sites first..first+profile.size()-1.
[[nodiscard]] double profile_overlap(const Eigenmode& mode, int first_site,
                                     const std::vector<double>& profile);

/// Writes "site,Re,Im" rows for the photonic amplitudes.
void write_wavefunction_csv(std::ostream& out, const Eigen::VectorXcd& photon);

}  // namespace cavarray

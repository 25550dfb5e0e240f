#include "cavarray/lattice_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>

#include "cavarray/errors.hpp"
#include "cavarray/kernels.hpp"

namespace cavarray {

namespace {

constexpr Complex kI(0.0, 1.0);

}  // namespace

void ChainSpec::validate() const {
    lat.validate();
    if (N < 16) throw PlacementError("chain needs at least 16 sites, got " + std::to_string(N));
    if (buffer < 4) throw PlacementError("buffer must be >= 4 sites");
    if (!(kappa >= 0.0)) throw InvalidParameter("cavity leakage kappa must be >= 0");
    std::set<int> used;
    int previous = -1;
    for (const auto& p : placements) {
        p.atom.validate();
        if (p.site < buffer || p.site > N - 1 - buffer) {
            throw PlacementError("node at site " + std::to_string(p.site) +
                                 " is closer than " + std::to_string(buffer) +
                                 " sites to a chain end");
        }
        if (!used.insert(p.site).second) {
            throw PlacementError("two nodes on site " + std::to_string(p.site));
        }
        if (p.site < previous) throw PlacementError("placements must be sorted by site");
        previous = p.site;
    }
}

ChainSpec centred_chain(int N, const LatticeParams& lat, const std::vector<AtomParams>& atoms,
                        const std::vector<int>& offsets) {
    if (atoms.size() != offsets.size()) {
        throw InvalidParameter("centred_chain: one offset per node required");
    }
    ChainSpec spec;
    spec.N = N;
    spec.lat = lat;
    const int span = offsets.empty() ? 0 : *std::max_element(offsets.begin(), offsets.end());
    const int first = (N - 1 - span) / 2;
    for (std::size_t m = 0; m < atoms.size(); ++m) {
        spec.placements.push_back({first + offsets[m], atoms[m]});
    }
    std::sort(spec.placements.begin(), spec.placements.end(),
              [](const Placement& a, const Placement& b) { return a.site < b.site; });
    return spec;
}

double SingleExcitationState::norm_squared() const {
    return photon.squaredNorm() + excited.squaredNorm() + metastable.squaredNorm();
}

void SingleExcitationState::normalize() {
    const double n = std::sqrt(norm_squared());
    if (n == 0.0) throw NumericalFailure("cannot normalise a zero state");
    photon /= n;
    excited /= n;
    metastable /= n;
}

Eigen::MatrixXcd build_hamiltonian(const ChainSpec& spec) {
    spec.validate();
    const int dim = spec.dimension();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    const Complex onsite(spec.lat.omega, -0.5 * spec.kappa);
    for (int j = 0; j < spec.N; ++j) {
        h(j, j) = onsite;
        if (j + 1 < spec.N) {
            h(j, j + 1) = -spec.lat.t;
            h(j + 1, j) = -spec.lat.t;
        }
    }
    for (std::size_t m = 0; m < spec.placements.size(); ++m) {
        const auto& [site, atom] = spec.placements[m];
        const int e = spec.excited_index(m);
        const int a = spec.metastable_index(m);
        h(site, e) = atom.g;
        h(e, site) = atom.g;
        h(e, e) = Complex(atom.omega_e, -atom.Gamma);
        h(e, a) = atom.Omega;
        h(a, e) = atom.Omega;
        h(a, a) = Complex(atom.delta, -atom.gamma);
    }
    return h;
}

StationarySolution solve_stationary(const ChainSpec& spec, double k) {
    if (!(k > 0.0 && k < kPi)) {
        throw DomainError("momentum must lie in (0, pi), got " + std::to_string(k));
    }
    if (spec.kappa != 0.0) {
        throw InvalidParameter("stationary solve needs kappa = 0 (plane-wave boundary rows)");
    }
    const Eigen::MatrixXcd h = build_hamiltonian(spec);
    const int dim = spec.dimension();
    const int n = spec.N;
    const int r_col = dim;
    const int s_col = dim + 1;
    const double energy = dispersion_energy(k, spec.lat);
    const int origin = spec.placements.empty() ? n / 2 : spec.placements.front().site;

    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim + 2, dim + 2);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(dim + 2);

    auto wave = [&](int site, double sign) {
        return std::exp(sign * kI * k * static_cast<double>(site - origin));
    };

    int row = 0;
    // Plane-wave rows on the two leftmost and two rightmost sites.
    for (int site : {0, 1}) {
        a(row, site) = 1.0;
        a(row, r_col) = -wave(site, -1.0);
        b(row) = wave(site, 1.0);
        ++row;
    }
    for (int site : {n - 2, n - 1}) {
        a(row, site) = 1.0;
        a(row, s_col) = -wave(site, 1.0);
        ++row;
    }
    // (H - E) u = 0 on interior sites and on every atomic level.
    for (int i = 1; i < dim; ++i) {
        if (i == n - 1) continue;
        a.row(row).head(dim) = h.row(i);
        a(row, i) -= energy;
        ++row;
    }
    if (row != dim + 2) {
        throw NumericalFailure("stationary system assembled with " + std::to_string(row) +
                               " rows, expected " + std::to_string(dim + 2));
    }

    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const Eigen::VectorXcd x = lu.solve(b);
    if (!x.allFinite()) {
        throw NumericalFailure("stationary system is singular at k = " + std::to_string(k));
    }
    const double residual = (a * x - b).norm();
    if (!(residual <= 1e-8 * std::max(1.0, x.norm()))) {
        throw NumericalFailure("stationary solve residual " + std::to_string(residual) +
                               " at k = " + std::to_string(k));
    }

    StationarySolution sol;
    sol.r = x(r_col);
    sol.s = x(s_col);
    const std::size_t atoms = spec.placements.size();
    sol.state.photon = x.head(n);
    sol.state.excited.resize(static_cast<Eigen::Index>(atoms));
    sol.state.metastable.resize(static_cast<Eigen::Index>(atoms));
    for (std::size_t m = 0; m < atoms; ++m) {
        sol.state.excited(static_cast<Eigen::Index>(m)) = x(spec.excited_index(m));
        sol.state.metastable(static_cast<Eigen::Index>(m)) = x(spec.metastable_index(m));
    }
    return sol;
}

}  // namespace cavarray

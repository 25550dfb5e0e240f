// Time propagation and diagonalisation on the finite chain.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "cavarray/errors.hpp"
#include "cavarray/kernels.hpp"
#include "cavarray/lattice_oracle.hpp"

namespace cavarray {

namespace {

bool is_lossless(const ChainSpec& spec) {
    if (spec.kappa != 0.0) return false;
    return std::all_of(spec.placements.begin(), spec.placements.end(),
                       [](const Placement& p) { return p.atom.is_lossless(); });
}

/// Split-complex state: photon amplitudes as two real arrays, node levels as complex.
struct PackedState {
    std::vector<double> re;
    std::vector<double> im;
    std::vector<Complex> excited;
    std::vector<Complex> metastable;

    PackedState(std::size_t sites, std::size_t nodes)
        : re(sites, 0.0), im(sites, 0.0), excited(nodes), metastable(nodes) {}

    [[nodiscard]] double norm_squared() const {
        double sum = 0.0;
        for (std::size_t j = 0; j < re.size(); ++j) sum += re[j] * re[j] + im[j] * im[j];
        for (const auto& c : excited) sum += std::norm(c);
        for (const auto& c : metastable) sum += std::norm(c);
        return sum;
    }
};

/// dy/dt = -i (H - E0) y.
class Rhs {
public:
    Rhs(const ChainSpec& spec, double reference) : spec_(spec), reference_(reference) {}

    void operator()(const PackedState& u, PackedState& out) const {
        kernels::hop_apply(spec_.lat.omega - reference_, -0.5 * spec_.kappa, spec_.lat.t,
                           {u.re, u.im, out.re, out.im});
        const Complex minus_i(0.0, -1.0);
        for (std::size_t m = 0; m < spec_.placements.size(); ++m) {
            const auto& [site, atom] = spec_.placements[m];
            const auto j = static_cast<std::size_t>(site);
            const Complex ue = u.excited[m];
            const Complex ua = u.metastable[m];
            const Complex photon(u.re[j], u.im[j]);
            // photon row picks up g u_e
            out.re[j] += atom.g * ue.imag();
            out.im[j] -= atom.g * ue.real();
            out.excited[m] =
                minus_i * (Complex(atom.omega_e - reference_, -atom.Gamma) * ue + atom.g * photon +
                           atom.Omega * ua);
            out.metastable[m] =
                minus_i * (Complex(atom.delta - reference_, -atom.gamma) * ua + atom.Omega * ue);
        }
    }

private:
    const ChainSpec& spec_;
    double reference_;
};

/// y <- y + a x over the whole packed state.
void packed_axpy(double a, const PackedState& x, PackedState& y) {
    kernels::axpy(a, {x.re, x.im, y.re, y.im});
    for (std::size_t m = 0; m < x.excited.size(); ++m) {
        y.excited[m] += a * x.excited[m];
        y.metastable[m] += a * x.metastable[m];
    }
}

void copy_into(const PackedState& from, PackedState& to) {
    std::copy(from.re.begin(), from.re.end(), to.re.begin());
    std::copy(from.im.begin(), from.im.end(), to.im.begin());
    to.excited = from.excited;
    to.metastable = from.metastable;
}

double spread_width(double sigma, double t, double k0, double time) {
    const double curvature = 2.0 * t * std::cos(k0);
    const double growth = curvature * time / (2.0 * sigma);
    return std::sqrt(sigma * sigma + growth * growth);
}

}  // namespace

WavepacketSetup plan_wavepacket(const LatticeParams& lat, const std::vector<AtomParams>& atoms,
                                const std::vector<int>& offsets, double k0, double sigma) {
    lat.validate();
    if (!(k0 > 0.0 && k0 < kPi)) throw DomainError("carrier momentum must lie in (0, pi)");
    if (!(sigma >= 4.0)) throw InvalidParameter("packet width sigma must be >= 4 sites");
    if (atoms.size() != offsets.size()) {
        throw InvalidParameter("plan_wavepacket: one offset per node required");
    }
    const int span = offsets.empty() ? 0 : *std::max_element(offsets.begin(), offsets.end());
    const double velocity = 2.0 * lat.t * std::sin(k0);
    const double lead = 6.0 * sigma;

    // Travel until the transmitted packet sits 6 widths past the last node.
    double width = sigma;
    double tmax = 0.0;
    for (int pass = 0; pass < 4; ++pass) {
        tmax = 1.1 * (lead + span + 6.0 * width) / velocity;
        width = spread_width(sigma, lat.t, k0, tmax);
    }
    const double room = 1.1 * (span + 12.0 * width) + 8.0;
    const int first = static_cast<int>(std::ceil(std::max(room, lead + 6.0 * sigma)));
    const int n = first + static_cast<int>(std::ceil(room)) + 1;

    WavepacketSetup setup;
    setup.chain.N = n;
    setup.chain.lat = lat;
    for (std::size_t m = 0; m < atoms.size(); ++m) {
        setup.chain.placements.push_back({first + offsets[m], atoms[m]});
    }
    std::sort(setup.chain.placements.begin(), setup.chain.placements.end(),
              [](const Placement& a, const Placement& b) { return a.site < b.site; });
    setup.packet.k0 = k0;
    setup.packet.sigma = sigma;
    setup.packet.x0 = first - lead;
    setup.packet.tmax = tmax;
    return setup;
}

WavepacketResult propagate_wavepacket(const ChainSpec& spec, const WavepacketSpec& wp,
                                      const PropagationOptions& opts) {
    spec.validate();
    if (!(wp.k0 > 0.0 && wp.k0 < kPi)) throw DomainError("carrier momentum must lie in (0, pi)");
    if (!(wp.sigma >= 4.0)) throw InvalidParameter("packet width sigma must be >= 4 sites");
    if (!(wp.tmax > 0.0)) throw InvalidParameter("tmax must be positive");

    const double t = spec.lat.t;
    // Without nodes the split point is the initial packet centre.
    const bool empty = spec.placements.empty();
    const int first = empty ? static_cast<int>(std::floor(wp.x0)) + 1 : spec.placements.front().site;
    const int last = empty ? first - 1 : spec.placements.back().site;
    const double velocity = 2.0 * t * std::sin(wp.k0);
    const double width = spread_width(wp.sigma, t, wp.k0, wp.tmax);

    if (wp.x0 - 5.0 * wp.sigma < 0.0 || (!empty && wp.x0 + 5.0 * wp.sigma >= first)) {
        throw InsufficientChain("initial packet must sit 5 widths from the left end and the first node");
    }
    const double travelled = velocity * wp.tmax;
    if (wp.x0 + travelled + 5.0 * width > spec.N - 1) {
        throw InsufficientChain("transmitted packet reaches the right end before tmax");
    }
    const double reflected_centre = first - (travelled - (first - wp.x0));
    if (!empty && reflected_centre - 5.0 * width < 0.0) {
        throw InsufficientChain("reflected packet reaches the left end before tmax");
    }

    const std::size_t sites = static_cast<std::size_t>(spec.N);
    const std::size_t nodes = spec.placements.size();
    PackedState u(sites, nodes);
    for (std::size_t j = 0; j < sites; ++j) {
        const double x = static_cast<double>(j) - wp.x0;
        const double envelope = std::exp(-x * x / (4.0 * wp.sigma * wp.sigma));
        const double phase = wp.k0 * static_cast<double>(static_cast<int>(j) - first);
        u.re[j] = envelope * std::cos(phase);
        u.im[j] = envelope * std::sin(phase);
    }
    const double n0 = std::sqrt(u.norm_squared());
    for (std::size_t j = 0; j < sites; ++j) {
        u.re[j] /= n0;
        u.im[j] /= n0;
    }

    const double reference = spec.lat.omega - 2.0 * t * std::cos(wp.k0);
    const Rhs rhs(spec, reference);
    const double dt_nominal = wp.dt > 0.0 ? wp.dt : 0.05 / t;
    const auto steps = static_cast<long>(std::ceil(wp.tmax / dt_nominal));
    const double dt = wp.tmax / static_cast<double>(steps);

    PackedState k1(sites, nodes), k2(sites, nodes), k3(sites, nodes), k4(sites, nodes);
    PackedState stage(sites, nodes);

    WavepacketResult result;
    const double initial = u.norm_squared();
    result.times.push_back(0.0);
    result.norms.push_back(initial);
    double drift = 0.0;

    for (long step = 1; step <= steps; ++step) {
        rhs(u, k1);
        copy_into(u, stage);
        packed_axpy(0.5 * dt, k1, stage);
        rhs(stage, k2);
        copy_into(u, stage);
        packed_axpy(0.5 * dt, k2, stage);
        rhs(stage, k3);
        copy_into(u, stage);
        packed_axpy(dt, k3, stage);
        rhs(stage, k4);
        packed_axpy(dt / 6.0, k1, u);
        packed_axpy(dt / 3.0, k2, u);
        packed_axpy(dt / 3.0, k3, u);
        packed_axpy(dt / 6.0, k4, u);

        const double norm = u.norm_squared();
        drift = std::max(drift, std::abs(norm - initial));
        if (step % opts.history_every == 0 || step == steps) {
            result.times.push_back(dt * static_cast<double>(step));
            result.norms.push_back(norm);
        }
    }
    result.norm_drift = drift;
    if (is_lossless(spec) && drift > opts.drift_bound) {
        throw IntegratorDrift("norm drift " + std::to_string(drift) + " exceeds " +
                              std::to_string(opts.drift_bound));
    }

    for (std::size_t j = 0; j < sites; ++j) {
        const double p = u.re[j] * u.re[j] + u.im[j] * u.im[j];
        const int site = static_cast<int>(j);
        if (site < first) {
            result.R_meas += p;
        } else if (site > last) {
            result.T_meas += p;
        } else {
            result.atomic += p;
        }
    }
    for (std::size_t m = 0; m < nodes; ++m) {
        result.atomic += std::norm(u.excited[m]) + std::norm(u.metastable[m]);
    }
    return result;
}

std::vector<Eigenmode> eigenmodes(const ChainSpec& spec) {
    const Eigen::MatrixXcd h = build_hamiltonian(spec);
    const auto nodes = static_cast<Eigen::Index>(spec.placements.size());
    const Eigen::Index n = spec.N;

    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
    if (is_lossless(spec)) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
        if (solver.info() != Eigen::Success) {
            throw NumericalFailure("Hermitian eigensolver did not converge");
        }
        values = solver.eigenvalues().cast<Complex>();
        vectors = solver.eigenvectors();
    } else {
        const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h);
        if (solver.info() != Eigen::Success) {
            throw NumericalFailure("complex eigensolver did not converge");
        }
        values = solver.eigenvalues();
        vectors = solver.eigenvectors();
    }

    const int first = nodes >= 2 ? spec.placements.front().site : 0;
    const int last = nodes >= 2 ? spec.placements.back().site : 0;

    std::vector<Eigenmode> modes;
    modes.reserve(static_cast<std::size_t>(values.size()));
    for (Eigen::Index c = 0; c < values.size(); ++c) {
        Eigenmode mode;
        mode.energy = values(c);
        const Eigen::VectorXcd v = vectors.col(c).normalized();
        mode.state.photon = v.head(n);
        mode.state.excited.resize(nodes);
        mode.state.metastable.resize(nodes);
        for (Eigen::Index m = 0; m < nodes; ++m) {
            mode.state.excited(m) = v(spec.excited_index(static_cast<std::size_t>(m)));
            mode.state.metastable(m) = v(spec.metastable_index(static_cast<std::size_t>(m)));
        }
        mode.ipr = v.cwiseAbs2().cwiseAbs2().sum();
        mode.photon_fraction = mode.state.photon.squaredNorm();
        if (nodes >= 2 && mode.photon_fraction > 0.0 && last - first > 1) {
            mode.interior_weight =
                mode.state.photon.segment(first + 1, last - first - 1).squaredNorm() /
                mode.photon_fraction;
        }
        modes.push_back(std::move(mode));
    }
    std::stable_sort(modes.begin(), modes.end(), [](const Eigenmode& a, const Eigenmode& b) {
        return a.energy.real() < b.energy.real();
    });
    return modes;
}

double profile_overlap(const Eigenmode& mode, int first_site, const std::vector<double>& profile) {
    const auto& u = mode.state.photon;
    if (first_site < 0 || first_site + static_cast<int>(profile.size()) > u.size()) {
        throw InvalidParameter("profile does not fit on the chain");
    }
    Complex dot = 0.0;
    double profile_norm = 0.0;
    for (std::size_t j = 0; j < profile.size(); ++j) {
        dot += profile[j] * u(first_site + static_cast<Eigen::Index>(j));
        profile_norm += profile[j] * profile[j];
    }
    const double photon_norm = u.squaredNorm();
    if (photon_norm == 0.0 || profile_norm == 0.0) return 0.0;
    return std::norm(dot) / (photon_norm * profile_norm);
}

void write_wavefunction_csv(std::ostream& out, const Eigen::VectorXcd& photon) {
    char buffer[96];
    out << "site,Re,Im\n";
    for (Eigen::Index j = 0; j < photon.size(); ++j) {
        std::snprintf(buffer, sizeof buffer, "%ld,%.17g,%.17g\n", static_cast<long>(j),
                      photon(j).real(), photon(j).imag());
        out << buffer;
    }
}

}  // namespace cavarray

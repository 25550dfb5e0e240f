#pragma once

// Deterministic parameter sweeps over one or two axes, evaluated with the
// closed forms, the finite-chain oracle, or both.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cavarray/core_model.hpp"
#include "cavarray/scattering.hpp"

namespace cavarray {

/// Flat physical parameter bindings, e.g. {"t": 2, "omega": 1, "Omega": 1}.
///
/// Lattice: t, omega. First node: omega_e, delta (or omega_a and omega_C),
/// Omega, g, Gamma, gamma. Second node: the same names suffixed with 2,
/// defaulting to the first node's values. nodes (0, 1 or 2) and D select the
/// geometry. k or eps_k = E(k) - delta fixes the momentum when it is not swept.
/// A negative Omega is accepted and stored as |Omega|.
using ParameterMap = std::map<std::string, double, std::less<>>;

/// Every key accepted in a ParameterMap.
[[nodiscard]] const std::vector<std::string>& parameter_names();

struct Setup {
    LatticeParams lat;
    int nodes = 1;
    AtomParams atom1;
    AtomParams atom2;
    int D = 1;

    [[nodiscard]] TwoNodeConfig two_node() const { return {atom1, atom2, D}; }
};

/// Builds and validates the physical configuration. Throws InvalidParameter.
[[nodiscard]] Setup resolve_setup(const ParameterMap& params);

/// Momentum encoded in the map by k or eps_k. Throws OutOfBand / DomainError.
[[nodiscard]] double resolve_momentum(const ParameterMap& params, const Setup& setup);

enum class Quantity { R, T, xi, re_r, im_r, flux };
enum class Engine { analytic, oracle, both };

[[nodiscard]] std::string_view quantity_name(Quantity q);
[[nodiscard]] std::optional<Quantity> parse_quantity(std::string_view name);
[[nodiscard]] std::string_view engine_name(Engine e);
[[nodiscard]] std::optional<Engine> parse_engine(std::string_view name);

struct Axis {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    int count = 2;

    /// Linear grid including both end points (a single point sits at min).
    [[nodiscard]] std::vector<double> grid() const;
};

struct SweepSpec {
    std::vector<Axis> axes;  ///< one or two; row-major, the last axis varies fastest
    ParameterMap fixed;
    Quantity quantity = Quantity::R;
    Engine engine = Engine::analytic;
    Convention convention = Convention::physical;
    double singular_tolerance = kDefaultSingularTolerance;
    double resonance_tolerance = 1e-14;
    int workers = 1;
    int oracle_margin = 10;  ///< free sites on each side of the nodes in oracle chains

    /// Axis counts >= 1 (>= 2 unless min == max), known names, min <= max.
    void validate() const;
};

inline constexpr std::uint8_t kMaskSingular = 1;
inline constexpr std::uint8_t kMaskError = 2;

struct SweepResult {
    std::vector<Axis> axes;
    std::vector<std::vector<double>> grids;
    Quantity quantity = Quantity::R;
    Engine engine = Engine::analytic;

    // Per grid point, row-major.
    std::vector<double> k;
    std::vector<double> eps_k;  ///< E(k) - delta of the first node (E(k) when nodes = 0)
    std::vector<Complex> r;
    std::vector<Complex> s;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;

    // Oracle amplitudes when engine = both (r, s above are then analytic).
    std::vector<Complex> oracle_r;
    std::vector<Complex> oracle_s;

    [[nodiscard]] std::size_t size() const { return values.size(); }
    /// Axis coordinates of a flat index.
    [[nodiscard]] std::vector<double> coordinates(std::size_t index) const;
};

[[nodiscard]] double quantity_value(Quantity q, Complex r, Complex s);

/// Evaluates every grid point. Per-point failures set kMaskError and leave
/// zero values; potential poles set kMaskSingular and carry the analytic
/// limit. The output does not depend on the worker count.
[[nodiscard]] SweepResult run_sweep(const SweepSpec& spec);

struct EngineComparison {
    double max_deviation = 0.0;  ///< max over points of max(|dr|, |ds|)
    std::size_t index = 0;
    std::vector<double> location;
    std::size_t compared = 0;
};

/// Runs the sweep with both engines and reports the worst disagreement.
[[nodiscard]] EngineComparison compare_engines(const SweepSpec& spec);
[[nodiscard]] EngineComparison compare_engines(const SweepResult& both);

}  // namespace cavarray

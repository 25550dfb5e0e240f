#pragma once

#include <stdexcept>
#include <string>

namespace cavarray {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter violates the invariants of its type (t <= 0, negative decay, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Momentum outside the open interval (0, pi), or similar domain violation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Energy outside the open band |E - omega| < 2t.
class OutOfBand : public Error {
public:
    using Error::Error;
};

/// The effective potential denominator vanished: the node is a perfect mirror
/// at this energy. Not a failure; callers substitute the analytic limit.
class SingularPotential : public Error {
public:
    using Error::Error;
};

/// The double-Lorentzian form collapses to a single pole (Omega = 0, omega_e = delta).
class DegenerateDecomposition : public Error {
public:
    using Error::Error;
};

/// A resonance-condition solve has no real solution.
class NoSolution : public Error {
public:
    using Error::Error;
};

/// The two-node scattering denominator vanished at the requested momentum.
class ResonanceDenominator : public Error {
public:
    using Error::Error;
};

/// A quasibound residual was evaluated on a pole of one of the node potentials.
class PoleError : public Error {
public:
    using Error::Error;
};

/// Requested momentum lies outside the configured limit-regime window.
class WindowError : public Error {
public:
    using Error::Error;
};

/// Invalid atom placement on a finite chain.
class PlacementError : public Error {
public:
    using Error::Error;
};

/// The finite chain is too short for the requested wavepacket run.
class InsufficientChain : public Error {
public:
    using Error::Error;
};

/// Norm drift of the time integrator exceeded its contract.
class IntegratorDrift : public Error {
public:
    using Error::Error;
};

/// Linear solve or eigen-decomposition failure.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Invalid configuration key or value (command-line front end).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace cavarray

#pragma once

// Data-parallel inner loops with a scalar reference and SIMD variants chosen
// at run time. Every variant performs the same IEEE operations in the same
// order (no fused multiply-add), so results are bitwise identical across
// variants.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace cavarray::kernels {

enum class Isa { scalar, avx2 };

[[nodiscard]] std::string_view isa_name(Isa isa);
[[nodiscard]] std::optional<Isa> parse_isa(std::string_view name);

/// True when the variant was compiled in and the CPU supports it.
[[nodiscard]] bool isa_available(Isa isa);

/// Best available variant, unless overridden by set_isa_override() or the
/// CAVARRAY_ISA environment variable ("scalar" or "avx2").
[[nodiscard]] Isa active_isa();

/// Forces a variant for subsequent dispatching calls; nullopt restores auto
/// selection. Requests for an unavailable variant fall back to scalar.
void set_isa_override(std::optional<Isa> isa);

/// Flattened single-node coefficients shared by all lanes of a batch.
struct NodeCoefficients {
    double omega = 0.0;    ///< cavity frequency
    double t = 1.0;        ///< hopping
    double omega_e = 0.0;
    double delta = 0.0;
    double Omega = 0.0;
    double g = 1.0;
    double Gamma = 0.0;
    double gamma = 0.0;
    double singular_tolerance = 1e-12;
};

/// r = N / (w Q - N), s = 1 + r, w = 2 i t sin k, with V = N / Q the node
/// potential at E = omega - 2 t cos k. Points where |Q| falls below tolerance
/// receive r = -1, s = 0 and singular = 1.
struct SingleNodeBatch {
    std::span<const double> cos_k;
    std::span<const double> sin_k;
    std::span<double> r_re;
    std::span<double> r_im;
    std::span<double> s_re;
    std::span<double> s_im;
    std::span<std::uint8_t> singular;
};

void single_node_batch(const NodeCoefficients& c, const SingleNodeBatch& batch);
void single_node_batch(Isa isa, const NodeCoefficients& c, const SingleNodeBatch& batch);

/// out = -i (onsite u - t (u[j-1] + u[j+1])) on an open chain (hard walls),
/// i.e. the free tight-binding part of the Schroedinger right-hand side.
/// Arrays are split real/imaginary and must all share one length.
struct HopBatch {
    std::span<const double> u_re;
    std::span<const double> u_im;
    std::span<double> out_re;
    std::span<double> out_im;
};

void hop_apply(double onsite_re, double onsite_im, double t, const HopBatch& batch);
void hop_apply(Isa isa, double onsite_re, double onsite_im, double t, const HopBatch& batch);

/// y <- y + a x on split complex arrays (a real).
struct AxpyBatch {
    std::span<const double> x_re;
    std::span<const double> x_im;
    std::span<double> y_re;
    std::span<double> y_im;
};

void axpy(double a, const AxpyBatch& batch);
void axpy(Isa isa, double a, const AxpyBatch& batch);

namespace detail {
// Per-variant entry points over raw ranges [begin, end).
void single_node_scalar(const NodeCoefficients& c, const SingleNodeBatch& b, std::size_t begin,
                        std::size_t end);
void hop_scalar(double on_re, double on_im, double t, const HopBatch& b, std::size_t begin,
                std::size_t end);
void axpy_scalar(double a, const AxpyBatch& b, std::size_t begin, std::size_t end);

#if defined(CAVARRAY_HAVE_AVX2)
void single_node_avx2(const NodeCoefficients& c, const SingleNodeBatch& b);
void hop_avx2(double on_re, double on_im, double t, const HopBatch& b);
void axpy_avx2(double a, const AxpyBatch& b);
#endif
}  // namespace detail

}  // namespace cavarray::kernels

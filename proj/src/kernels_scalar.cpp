#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>

#include "cavarray/kernels.hpp"

namespace cavarray::kernels {

namespace {

std::optional<Isa> g_override;
std::once_flag g_env_once;
std::optional<Isa> g_env_choice;

void check_same_length(std::size_t expected, std::size_t got, const char* what) {
    if (expected != got) {
        throw std::invalid_argument(std::string("kernel span length mismatch: ") + what);
    }
}

void check(const SingleNodeBatch& b) {
    const std::size_t n = b.cos_k.size();
    check_same_length(n, b.sin_k.size(), "sin_k");
    check_same_length(n, b.r_re.size(), "r_re");
    check_same_length(n, b.r_im.size(), "r_im");
    check_same_length(n, b.s_re.size(), "s_re");
    check_same_length(n, b.s_im.size(), "s_im");
    check_same_length(n, b.singular.size(), "singular");
}

void check(const HopBatch& b) {
    const std::size_t n = b.u_re.size();
    check_same_length(n, b.u_im.size(), "u_im");
    check_same_length(n, b.out_re.size(), "out_re");
    check_same_length(n, b.out_im.size(), "out_im");
}

void check(const AxpyBatch& b) {
    const std::size_t n = b.x_re.size();
    check_same_length(n, b.x_im.size(), "x_im");
    check_same_length(n, b.y_re.size(), "y_re");
    check_same_length(n, b.y_im.size(), "y_im");
}

Isa resolve(Isa requested) { return isa_available(requested) ? requested : Isa::scalar; }

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    return std::nullopt;
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(CAVARRAY_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() {
    if (g_override) return resolve(*g_override);
    std::call_once(g_env_once, [] {
        if (const char* env = std::getenv("CAVARRAY_ISA")) g_env_choice = parse_isa(env);
    });
    if (g_env_choice) return resolve(*g_env_choice);
    return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

void set_isa_override(std::optional<Isa> isa) { g_override = isa; }

namespace detail {

void single_node_scalar(const NodeCoefficients& c, const SingleNodeBatch& b, std::size_t begin,
                        std::size_t end) {
    const double two_t = 2.0 * c.t;
    const double g2 = c.g * c.g;
    const double omega2 = c.Omega * c.Omega;
    const bool two_level = c.Omega == 0.0;
    const double tol = c.singular_tolerance * (two_level ? c.g : g2);
    const double tol2 = tol * tol;
    for (std::size_t i = begin; i < end; ++i) {
        const double energy = c.omega - two_t * b.cos_k[i];
        const double w_im = two_t * b.sin_k[i];
        const double x_re = energy - c.omega_e;
        double n_re, n_im, q_re, q_im;
        if (two_level) {
            n_re = g2;
            n_im = 0.0;
            q_re = x_re;
            q_im = c.Gamma;
        } else {
            const double m_re = energy - c.delta;
            n_re = g2 * m_re;
            n_im = g2 * c.gamma;
            q_re = x_re * m_re - c.Gamma * c.gamma - omega2;
            q_im = x_re * c.gamma + c.Gamma * m_re;
        }
        if (q_re * q_re + q_im * q_im < tol2) {
            b.r_re[i] = -1.0;
            b.r_im[i] = 0.0;
            b.s_re[i] = 0.0;
            b.s_im[i] = 0.0;
            b.singular[i] = 1;
            continue;
        }
        // den = i w Q - N
        const double d_re = -(w_im * q_im + n_re);
        const double d_im = w_im * q_re - n_im;
        const double dd = d_re * d_re + d_im * d_im;
        const double r_re = (n_re * d_re + n_im * d_im) / dd;
        const double r_im = (n_im * d_re - n_re * d_im) / dd;
        b.r_re[i] = r_re;
        b.r_im[i] = r_im;
        b.s_re[i] = 1.0 + r_re;
        b.s_im[i] = r_im;
        b.singular[i] = 0;
    }
}

void hop_scalar(double on_re, double on_im, double t, const HopBatch& b, std::size_t begin,
                std::size_t end) {
    const std::size_t n = b.u_re.size();
    for (std::size_t j = begin; j < end; ++j) {
        const double l_re = j > 0 ? b.u_re[j - 1] : 0.0;
        const double l_im = j > 0 ? b.u_im[j - 1] : 0.0;
        const double r_re = j + 1 < n ? b.u_re[j + 1] : 0.0;
        const double r_im = j + 1 < n ? b.u_im[j + 1] : 0.0;
        const double nb_re = l_re + r_re;
        const double nb_im = l_im + r_im;
        const double h_re = (on_re * b.u_re[j] - on_im * b.u_im[j]) - t * nb_re;
        const double h_im = (on_re * b.u_im[j] + on_im * b.u_re[j]) - t * nb_im;
        b.out_re[j] = h_im;
        b.out_im[j] = -h_re;
    }
}

void axpy_scalar(double a, const AxpyBatch& b, std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
        b.y_re[j] = b.y_re[j] + a * b.x_re[j];
        b.y_im[j] = b.y_im[j] + a * b.x_im[j];
    }
}

}  // namespace detail

void single_node_batch(Isa isa, const NodeCoefficients& c, const SingleNodeBatch& batch) {
    check(batch);
#if defined(CAVARRAY_HAVE_AVX2)
    if (resolve(isa) == Isa::avx2) {
        detail::single_node_avx2(c, batch);
        return;
    }
#endif
    (void)isa;
    detail::single_node_scalar(c, batch, 0, batch.cos_k.size());
}

void single_node_batch(const NodeCoefficients& c, const SingleNodeBatch& batch) {
    single_node_batch(active_isa(), c, batch);
}

void hop_apply(Isa isa, double onsite_re, double onsite_im, double t, const HopBatch& batch) {
    check(batch);
#if defined(CAVARRAY_HAVE_AVX2)
    if (resolve(isa) == Isa::avx2) {
        detail::hop_avx2(onsite_re, onsite_im, t, batch);
        return;
    }
#endif
    (void)isa;
    detail::hop_scalar(onsite_re, onsite_im, t, batch, 0, batch.u_re.size());
}

void hop_apply(double onsite_re, double onsite_im, double t, const HopBatch& batch) {
    hop_apply(active_isa(), onsite_re, onsite_im, t, batch);
}

void axpy(Isa isa, double a, const AxpyBatch& batch) {
    check(batch);
#if defined(CAVARRAY_HAVE_AVX2)
    if (resolve(isa) == Isa::avx2) {
        detail::axpy_avx2(a, batch);
        return;
    }
#endif
    (void)isa;
    detail::axpy_scalar(a, batch, 0, batch.x_re.size());
}

void axpy(double a, const AxpyBatch& batch) { axpy(active_isa(), a, batch); }

}  // namespace cavarray::kernels

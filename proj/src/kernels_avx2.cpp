// AVX2 variants, compiled with -mavx2 only.

#include <immintrin.h>

#include "cavarray/kernels.hpp"

namespace cavarray::kernels::detail {

namespace {

constexpr std::size_t kLanes = 4;

inline __m256d negate(__m256d x) { return _mm256_xor_pd(x, _mm256_set1_pd(-0.0)); }

}  // namespace

void single_node_avx2(const NodeCoefficients& c, const SingleNodeBatch& b) {
    const std::size_t n = b.cos_k.size();
    const std::size_t vec_end = n - n % kLanes;

    const double two_t_s = 2.0 * c.t;
    const double g2_s = c.g * c.g;
    const bool two_level = c.Omega == 0.0;
    const double tol_s = c.singular_tolerance * (two_level ? c.g : g2_s);

    const __m256d omega = _mm256_set1_pd(c.omega);
    const __m256d two_t = _mm256_set1_pd(two_t_s);
    const __m256d omega_e = _mm256_set1_pd(c.omega_e);
    const __m256d delta = _mm256_set1_pd(c.delta);
    const __m256d g2 = _mm256_set1_pd(g2_s);
    const __m256d omega2 = _mm256_set1_pd(c.Omega * c.Omega);
    const __m256d gam_big = _mm256_set1_pd(c.Gamma);
    const __m256d gam_small = _mm256_set1_pd(c.gamma);
    const __m256d gg = _mm256_set1_pd(c.Gamma * c.gamma);
    const __m256d tol2 = _mm256_set1_pd(tol_s * tol_s);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d minus_one = _mm256_set1_pd(-1.0);

    for (std::size_t i = 0; i < vec_end; i += kLanes) {
        const __m256d cos_k = _mm256_loadu_pd(&b.cos_k[i]);
        const __m256d sin_k = _mm256_loadu_pd(&b.sin_k[i]);
        const __m256d energy = _mm256_sub_pd(omega, _mm256_mul_pd(two_t, cos_k));
        const __m256d w_im = _mm256_mul_pd(two_t, sin_k);
        const __m256d x_re = _mm256_sub_pd(energy, omega_e);

        __m256d n_re, n_im, q_re, q_im;
        if (two_level) {
            n_re = g2;
            n_im = zero;
            q_re = x_re;
            q_im = gam_big;
        } else {
            const __m256d m_re = _mm256_sub_pd(energy, delta);
            n_re = _mm256_mul_pd(g2, m_re);
            n_im = _mm256_mul_pd(g2, gam_small);
            q_re = _mm256_sub_pd(_mm256_sub_pd(_mm256_mul_pd(x_re, m_re), gg), omega2);
            q_im = _mm256_add_pd(_mm256_mul_pd(x_re, gam_small), _mm256_mul_pd(gam_big, m_re));
        }
        const __m256d q_abs2 = _mm256_add_pd(_mm256_mul_pd(q_re, q_re), _mm256_mul_pd(q_im, q_im));
        const __m256d singular = _mm256_cmp_pd(q_abs2, tol2, _CMP_LT_OQ);

        const __m256d d_re = negate(_mm256_add_pd(_mm256_mul_pd(w_im, q_im), n_re));
        const __m256d d_im = _mm256_sub_pd(_mm256_mul_pd(w_im, q_re), n_im);
        const __m256d dd = _mm256_add_pd(_mm256_mul_pd(d_re, d_re), _mm256_mul_pd(d_im, d_im));
        __m256d r_re = _mm256_div_pd(
            _mm256_add_pd(_mm256_mul_pd(n_re, d_re), _mm256_mul_pd(n_im, d_im)), dd);
        __m256d r_im = _mm256_div_pd(
            _mm256_sub_pd(_mm256_mul_pd(n_im, d_re), _mm256_mul_pd(n_re, d_im)), dd);
        __m256d s_re = _mm256_add_pd(one, r_re);
        __m256d s_im = r_im;

        r_re = _mm256_blendv_pd(r_re, minus_one, singular);
        r_im = _mm256_blendv_pd(r_im, zero, singular);
        s_re = _mm256_blendv_pd(s_re, zero, singular);
        s_im = _mm256_blendv_pd(s_im, zero, singular);

        _mm256_storeu_pd(&b.r_re[i], r_re);
        _mm256_storeu_pd(&b.r_im[i], r_im);
        _mm256_storeu_pd(&b.s_re[i], s_re);
        _mm256_storeu_pd(&b.s_im[i], s_im);
        const int mask = _mm256_movemask_pd(singular);
        for (std::size_t lane = 0; lane < kLanes; ++lane) {
            b.singular[i + lane] = static_cast<std::uint8_t>((mask >> lane) & 1);
        }
    }
    single_node_scalar(c, b, vec_end, n);
}

void hop_avx2(double on_re_s, double on_im_s, double t_s, const HopBatch& b) {
    const std::size_t n = b.u_re.size();
    if (n < kLanes + 2) {
        hop_scalar(on_re_s, on_im_s, t_s, b, 0, n);
        return;
    }
    hop_scalar(on_re_s, on_im_s, t_s, b, 0, 1);

    const __m256d on_re = _mm256_set1_pd(on_re_s);
    const __m256d on_im = _mm256_set1_pd(on_im_s);
    const __m256d t = _mm256_set1_pd(t_s);
    const double* ure = b.u_re.data();
    const double* uim = b.u_im.data();

    std::size_t j = 1;
    for (; j + kLanes <= n - 1; j += kLanes) {
        const __m256d u_re = _mm256_loadu_pd(ure + j);
        const __m256d u_im = _mm256_loadu_pd(uim + j);
        const __m256d nb_re = _mm256_add_pd(_mm256_loadu_pd(ure + j - 1), _mm256_loadu_pd(ure + j + 1));
        const __m256d nb_im = _mm256_add_pd(_mm256_loadu_pd(uim + j - 1), _mm256_loadu_pd(uim + j + 1));
        const __m256d h_re = _mm256_sub_pd(
            _mm256_sub_pd(_mm256_mul_pd(on_re, u_re), _mm256_mul_pd(on_im, u_im)),
            _mm256_mul_pd(t, nb_re));
        const __m256d h_im = _mm256_sub_pd(
            _mm256_add_pd(_mm256_mul_pd(on_re, u_im), _mm256_mul_pd(on_im, u_re)),
            _mm256_mul_pd(t, nb_im));
        _mm256_storeu_pd(&b.out_re[j], h_im);
        _mm256_storeu_pd(&b.out_im[j], negate(h_re));
    }
    hop_scalar(on_re_s, on_im_s, t_s, b, j, n);
}

void axpy_avx2(double a_s, const AxpyBatch& b) {
    const std::size_t n = b.x_re.size();
    const std::size_t vec_end = n - n % kLanes;
    const __m256d a = _mm256_set1_pd(a_s);
    for (std::size_t j = 0; j < vec_end; j += kLanes) {
        const __m256d y_re = _mm256_loadu_pd(&b.y_re[j]);
        const __m256d y_im = _mm256_loadu_pd(&b.y_im[j]);
        _mm256_storeu_pd(&b.y_re[j], _mm256_add_pd(y_re, _mm256_mul_pd(a, _mm256_loadu_pd(&b.x_re[j]))));
        _mm256_storeu_pd(&b.y_im[j], _mm256_add_pd(y_im, _mm256_mul_pd(a, _mm256_loadu_pd(&b.x_im[j]))));
    }
    axpy_scalar(a_s, b, vec_end, n);
}

}  // namespace cavarray::kernels::detail

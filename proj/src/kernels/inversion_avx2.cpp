#include "levystop/kernels/inversion_kernel.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define LEVYSTOP_HAVE_AVX2_KERNEL 1
#endif

namespace levystop::kernels {

#ifdef LEVYSTOP_HAVE_AVX2_KERNEL

// No FMA on purpose: plain mul/add in the scalar order gives bit-identical lanes.
__attribute__((target("avx2"))) static void invert_block4(const SnExponent& e, double shift, double q, double df0,
                                                          const TalbotNodes& nodes, const double* x, double* f,
                                                          double* df, double* d2f, double* mag) {
    const std::size_t m = nodes.w_re.size();
    const double* wre = nodes.w_re.data();
    const double* wim = nodes.w_im.data();
    const double* cre = nodes.c_re.data();
    const double* cim = nodes.c_im.data();

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d sign = _mm256_set1_pd(-0.0);
    const __m256d vshift = _mm256_set1_pd(shift);
    const __m256d vdrift = _mm256_set1_pd(e.drift);
    const __m256d vhv = _mm256_set1_pd(e.half_var);
    const __m256d vjr = _mm256_set1_pd(e.jump_rate);
    const __m256d veta = _mm256_set1_pd(e.eta);
    const __m256d vq = _mm256_set1_pd(q);
    const __m256d vdf0 = _mm256_set1_pd(df0);

    __m256d vx = _mm256_loadu_pd(x);
    __m256d inv = _mm256_div_pd(one, vx);
    __m256d scale = _mm256_mul_pd(_mm256_set1_pd(static_cast<double>(nodes.n)), inv);
    __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, am = a0;

    for (std::size_t k = 0; k < m; ++k) {
        __m256d zr = _mm256_mul_pd(scale, _mm256_set1_pd(wre[k]));
        __m256d zi = _mm256_mul_pd(scale, _mm256_set1_pd(wim[k]));
        __m256d sr = _mm256_add_pd(zr, vshift);
        __m256d si = zi;
        __m256d s2r = _mm256_sub_pd(_mm256_mul_pd(sr, sr), _mm256_mul_pd(si, si));
        __m256d s2i = _mm256_mul_pd(_mm256_mul_pd(two, sr), si);
        __m256d pr = _mm256_add_pd(_mm256_mul_pd(vdrift, sr), _mm256_mul_pd(vhv, s2r));
        __m256d pim = _mm256_add_pd(_mm256_mul_pd(vdrift, si), _mm256_mul_pd(vhv, s2i));
        __m256d dr = _mm256_add_pd(veta, sr);
        __m256d den = _mm256_add_pd(_mm256_mul_pd(dr, dr), _mm256_mul_pd(si, si));
        __m256d qr = _mm256_div_pd(_mm256_add_pd(_mm256_mul_pd(sr, dr), _mm256_mul_pd(si, si)), den);
        __m256d qi = _mm256_div_pd(_mm256_sub_pd(_mm256_mul_pd(si, dr), _mm256_mul_pd(sr, si)), den);
        pr = _mm256_sub_pd(_mm256_sub_pd(pr, _mm256_mul_pd(vjr, qr)), vq);
        pim = _mm256_sub_pd(pim, _mm256_mul_pd(vjr, qi));
        __m256d m2 = _mm256_add_pd(_mm256_mul_pd(pr, pr), _mm256_mul_pd(pim, pim));
        __m256d fr = _mm256_div_pd(pr, m2);
        __m256d fi = _mm256_div_pd(_mm256_xor_pd(pim, sign), m2);
        __m256d vcr = _mm256_set1_pd(cre[k]);
        __m256d vci = _mm256_set1_pd(cim[k]);
        __m256d t0 = _mm256_add_pd(_mm256_mul_pd(vcr, fi), _mm256_mul_pd(vci, fr));
        __m256d zfr = _mm256_sub_pd(_mm256_mul_pd(zr, fr), _mm256_mul_pd(zi, fi));
        __m256d zfi = _mm256_add_pd(_mm256_mul_pd(zr, fi), _mm256_mul_pd(zi, fr));
        __m256d t1 = _mm256_add_pd(_mm256_mul_pd(vcr, zfi), _mm256_mul_pd(vci, zfr));
        __m256d z2r = _mm256_sub_pd(_mm256_sub_pd(_mm256_mul_pd(zr, zfr), _mm256_mul_pd(zi, zfi)), vdf0);
        __m256d z2i = _mm256_add_pd(_mm256_mul_pd(zr, zfi), _mm256_mul_pd(zi, zfr));
        __m256d t2 = _mm256_add_pd(_mm256_mul_pd(vcr, z2i), _mm256_mul_pd(vci, z2r));
        a0 = _mm256_add_pd(a0, t0);
        a1 = _mm256_add_pd(a1, t1);
        a2 = _mm256_add_pd(a2, t2);
        am = _mm256_add_pd(am, _mm256_andnot_pd(sign, t0));
    }
    _mm256_storeu_pd(f, _mm256_mul_pd(a0, inv));
    _mm256_storeu_pd(df, _mm256_mul_pd(a1, inv));
    _mm256_storeu_pd(d2f, _mm256_mul_pd(a2, inv));
    _mm256_storeu_pd(mag, _mm256_mul_pd(am, inv));
}

void invert_sn_avx2(const SnExponent& e, double shift, double q, double df0, const TalbotNodes& nodes,
                    const InversionBatch& b) {
    std::size_t i = 0;
    for (; i + 4 <= b.count; i += 4)
        invert_block4(e, shift, q, df0, nodes, b.x + i, b.f + i, b.df + i, b.d2f + i, b.mag + i);
    if (i < b.count) {
        InversionBatch rest{b.x + i, b.count - i, b.f + i, b.df + i, b.d2f + i, b.mag + i};
        invert_sn_scalar(e, shift, q, df0, nodes, rest);
    }
}

#else

void invert_sn_avx2(const SnExponent& e, double shift, double q, double df0, const TalbotNodes& nodes,
                    const InversionBatch& b) {
    invert_sn_scalar(e, shift, q, df0, nodes, b);
}

#endif

}  // namespace levystop::kernels

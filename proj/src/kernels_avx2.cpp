// AVX2+FMA kernels.  This TU is the only one compiled with -mavx2 -mfma;
// it is reached solely through the runtime dispatch table after a CPUID
// feature check, so the rest of the binary stays baseline-ISA clean.
#include "qhe/kernels.hpp"

#include <immintrin.h>

namespace qhe::kernels {

namespace {

// Complex multiply-accumulate on interleaved storage: 2 complex per vector.
// For a = ar + i*ai and x = xr + i*xi:
//   re += ar*xr - ai*xi
//   im += ar*xi + ai*xr
// fmaddsub computes ar*x -/+ (ai * swapped(x)) in the right lane pattern.
inline __m256d cmadd(__m256d x, __m256d ar, __m256d ai, __m256d acc) {
    const __m256d xswap = _mm256_permute_pd(x, 0b0101);
    return _mm256_add_pd(acc, _mm256_fmaddsub_pd(ar, x, _mm256_mul_pd(ai, xswap)));
}

void caxpy_avx2(std::size_t n, cplx a, const cplx* x, cplx* y) {
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    const double* xp = reinterpret_cast<const double*>(x);
    double* yp = reinterpret_cast<double*>(y);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
        const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
        _mm256_storeu_pd(yp + 2 * i, cmadd(xv, ar, ai, yv));
    }
    if (i < n) { // odd tail: one complex
        const double xr = xp[2 * i], xi = xp[2 * i + 1];
        yp[2 * i] += a.real() * xr - a.imag() * xi;
        yp[2 * i + 1] += a.real() * xi + a.imag() * xr;
    }
}

void cxpay_avx2(std::size_t n, const cplx* x, cplx a, const cplx* k, cplx* y) {
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    const double* xp = reinterpret_cast<const double*>(x);
    const double* kp = reinterpret_cast<const double*>(k);
    double* yp = reinterpret_cast<double*>(y);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d kv = _mm256_loadu_pd(kp + 2 * i);
        const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
        _mm256_storeu_pd(yp + 2 * i, cmadd(kv, ar, ai, xv));
    }
    if (i < n) {
        const double kr = kp[2 * i], ki = kp[2 * i + 1];
        yp[2 * i] = xp[2 * i] + a.real() * kr - a.imag() * ki;
        yp[2 * i + 1] = xp[2 * i + 1] + a.real() * ki + a.imag() * kr;
    }
}

cplx csum_avx2(std::size_t n, const cplx* x) {
    const double* xp = reinterpret_cast<const double*>(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(xp + 2 * i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sr = lanes[0] + lanes[2], si = lanes[1] + lanes[3];
    if (i < n) {
        sr += xp[2 * i];
        si += xp[2 * i + 1];
    }
    return {sr, si};
}

cplx cdotw_avx2(std::size_t n, const double* w, const cplx* x) {
    const double* xp = reinterpret_cast<const double*>(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        // broadcast [w0, w1] -> [w0, w0, w1, w1] to match interleaved re/im
        const __m128d wv = _mm_loadu_pd(w + i);
        const __m256d wd = _mm256_permute4x64_pd(_mm256_castpd128_pd256(wv), 0x50);
        acc = _mm256_fmadd_pd(wd, _mm256_loadu_pd(xp + 2 * i), acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sr = lanes[0] + lanes[2], si = lanes[1] + lanes[3];
    if (i < n) {
        sr += w[i] * xp[2 * i];
        si += w[i] * xp[2 * i + 1];
    }
    return {sr, si};
}

} // namespace

const Ops avx2_ops{"avx2", caxpy_avx2, cxpay_avx2, csum_avx2, cdotw_avx2};

} // namespace qhe::kernels

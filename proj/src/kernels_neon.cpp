// NEON kernels (AArch64).  One complex<double> per 128-bit vector.
#include "qhe/kernels.hpp"

#if defined(__ARM_NEON)
#include <arm_neon.h>

namespace qhe::kernels {

namespace {

inline float64x2_t cmadd(float64x2_t x, double ar, double ai, float64x2_t acc) {
    // acc += (ar + i*ai) * x, x = [re, im]
    const float64x2_t xswap = vextq_f64(x, x, 1); // [im, re]
    float64x2_t t = vfmaq_n_f64(acc, x, ar);
    // [-ai*im + ..., +ai*re + ...]
    const float64x2_t sign = {-ai, ai};
    return vfmaq_f64(t, sign, xswap);
}

void caxpy_neon(std::size_t n, cplx a, const cplx* x, cplx* y) {
    const double* xp = reinterpret_cast<const double*>(x);
    double* yp = reinterpret_cast<double*>(y);
    for (std::size_t i = 0; i < n; ++i) {
        const float64x2_t xv = vld1q_f64(xp + 2 * i);
        vst1q_f64(yp + 2 * i, cmadd(xv, a.real(), a.imag(), vld1q_f64(yp + 2 * i)));
    }
}

void cxpay_neon(std::size_t n, const cplx* x, cplx a, const cplx* k, cplx* y) {
    const double* xp = reinterpret_cast<const double*>(x);
    const double* kp = reinterpret_cast<const double*>(k);
    double* yp = reinterpret_cast<double*>(y);
    for (std::size_t i = 0; i < n; ++i) {
        const float64x2_t kv = vld1q_f64(kp + 2 * i);
        vst1q_f64(yp + 2 * i, cmadd(kv, a.real(), a.imag(), vld1q_f64(xp + 2 * i)));
    }
}

cplx csum_neon(std::size_t n, const cplx* x) {
    const double* xp = reinterpret_cast<const double*>(x);
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < n; ++i)
        acc = vaddq_f64(acc, vld1q_f64(xp + 2 * i));
    return {vgetq_lane_f64(acc, 0), vgetq_lane_f64(acc, 1)};
}

cplx cdotw_neon(std::size_t n, const double* w, const cplx* x) {
    const double* xp = reinterpret_cast<const double*>(x);
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t i = 0; i < n; ++i)
        acc = vfmaq_n_f64(acc, vld1q_f64(xp + 2 * i), w[i]);
    return {vgetq_lane_f64(acc, 0), vgetq_lane_f64(acc, 1)};
}

} // namespace

const Ops neon_ops{"neon", caxpy_neon, cxpay_neon, csum_neon, cdotw_neon};

} // namespace qhe::kernels
#endif // __ARM_NEON

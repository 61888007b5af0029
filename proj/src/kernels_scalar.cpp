// Scalar reference kernels.  These define the semantics the SIMD variants
// must reproduce (up to floating-point reassociation in the reductions).
#include "qhe/kernels.hpp"

namespace qhe::kernels {

namespace {

void caxpy_scalar(std::size_t n, cplx a, const cplx* x, cplx* y) {
    const double ar = a.real(), ai = a.imag();
    const double* xp = reinterpret_cast<const double*>(x);
    double* yp = reinterpret_cast<double*>(y);
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = xp[2 * i], xi = xp[2 * i + 1];
        yp[2 * i] += ar * xr - ai * xi;
        yp[2 * i + 1] += ar * xi + ai * xr;
    }
}

void cxpay_scalar(std::size_t n, const cplx* x, cplx a, const cplx* k, cplx* y) {
    const double ar = a.real(), ai = a.imag();
    const double* xp = reinterpret_cast<const double*>(x);
    const double* kp = reinterpret_cast<const double*>(k);
    double* yp = reinterpret_cast<double*>(y);
    for (std::size_t i = 0; i < n; ++i) {
        const double kr = kp[2 * i], ki = kp[2 * i + 1];
        yp[2 * i] = xp[2 * i] + ar * kr - ai * ki;
        yp[2 * i + 1] = xp[2 * i + 1] + ar * ki + ai * kr;
    }
}

cplx csum_scalar(std::size_t n, const cplx* x) {
    double sr = 0.0, si = 0.0;
    const double* xp = reinterpret_cast<const double*>(x);
    for (std::size_t i = 0; i < n; ++i) {
        sr += xp[2 * i];
        si += xp[2 * i + 1];
    }
    return {sr, si};
}

cplx cdotw_scalar(std::size_t n, const double* w, const cplx* x) {
    double sr = 0.0, si = 0.0;
    const double* xp = reinterpret_cast<const double*>(x);
    for (std::size_t i = 0; i < n; ++i) {
        sr += w[i] * xp[2 * i];
        si += w[i] * xp[2 * i + 1];
    }
    return {sr, si};
}

} // namespace

const Ops scalar_ops{"scalar", caxpy_scalar, cxpay_scalar, csum_scalar, cdotw_scalar};

} // namespace qhe::kernels

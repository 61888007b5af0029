// Vectorised primitives for interleaved complex<double> arrays.
//
// A scalar reference implementation is always available; an AVX2 variant
// (x86) or NEON variant (ARM) is selected at runtime when the CPU supports
// it.  The active table can be forced with the environment variable
// QHE_KERNELS=scalar|avx2|neon (used by the equivalence tests).
#pragma once

#include "qhe/common.hpp"

#include <cstddef>

namespace qhe::kernels {

struct Ops {
    const char* name;
    // y[i] += a * x[i]
    void (*caxpy)(std::size_t n, cplx a, const cplx* x, cplx* y);
    // y[i] = x[i] + a * k[i]   (RK4 stage formation; y may alias neither input)
    void (*cxpay)(std::size_t n, const cplx* x, cplx a, const cplx* k, cplx* y);
    // sum_i x[i]
    cplx (*csum)(std::size_t n, const cplx* x);
    // sum_i w[i] * x[i]  with real weights
    cplx (*cdotw)(std::size_t n, const double* w, const cplx* x);
};

extern const Ops scalar_ops;
#if defined(QHE_KERNELS_HAVE_AVX2)
extern const Ops avx2_ops;
#endif
#if defined(__ARM_NEON)
extern const Ops neon_ops;
#endif

// Runtime-dispatched table (CPUID probe + QHE_KERNELS override, resolved once).
const Ops& ops();

// All tables compiled into this binary that the running CPU can execute.
std::vector<const Ops*> available_ops();

} // namespace qhe::kernels

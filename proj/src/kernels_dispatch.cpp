// Runtime selection of the kernel table.
#include "qhe/kernels.hpp"

#include <cstdlib>
#include <cstring>

#if defined(__x86_64__) || defined(__i386__)
#include <cpuid.h>
#endif

namespace qhe::kernels {

namespace {

#if defined(__x86_64__) || defined(__i386__)
// raw xgetbv(0): the intrinsic needs -mxsave, which this TU must not assume
unsigned xgetbv0() {
    unsigned lo, hi;
    __asm__ volatile(".byte 0x0f, 0x01, 0xd0" : "=a"(lo), "=d"(hi) : "c"(0));
    return lo;
}
#endif

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
    unsigned eax, ebx, ecx, edx;
    if (!__get_cpuid(1, &eax, &ebx, &ecx, &edx)) return false;
    const bool fma = ecx & (1u << 12);
    const bool osxsave = ecx & (1u << 27);
    if (!fma || !osxsave) return false;
    // OS must enable YMM state
    const unsigned xcr0 = xgetbv0();
    if ((xcr0 & 0x6) != 0x6) return false;
    if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
    return (ebx & (1u << 5)) != 0; // AVX2
#else
    return false;
#endif
}

const Ops* pick() {
    if (const char* env = std::getenv("QHE_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_ops;
#if defined(QHE_KERNELS_HAVE_AVX2)
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2_fma()) return &avx2_ops;
#endif
#if defined(__ARM_NEON)
        if (std::strcmp(env, "neon") == 0) return &neon_ops;
#endif
        return &scalar_ops; // unknown/unsupported request: safe fallback
    }
#if defined(QHE_KERNELS_HAVE_AVX2)
    if (cpu_has_avx2_fma()) return &avx2_ops;
#endif
#if defined(__ARM_NEON)
    return &neon_ops;
#endif
    return &scalar_ops;
}

} // namespace

const Ops& ops() {
    static const Ops* active = pick();
    return *active;
}

std::vector<const Ops*> available_ops() {
    std::vector<const Ops*> v{&scalar_ops};
#if defined(QHE_KERNELS_HAVE_AVX2)
    if (cpu_has_avx2_fma()) v.push_back(&avx2_ops);
#endif
#if defined(__ARM_NEON)
    v.push_back(&neon_ops);
#endif
    return v;
}

} // namespace qhe::kernels

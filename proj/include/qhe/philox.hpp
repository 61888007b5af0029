// Counter-based random numbers for reproducible Monte Carlo.
//
// Philox-4x32-10: four 32-bit counter words and a 64-bit key map to four
// output words through ten rounds of multiply-hi/lo mixing (multipliers
// 0xD2511F53, 0xCD9E8D57; Weyl key schedule 0x9E3779B9, 0xBB67AE85).  There
// is no sequential state: any (key, counter) block can be generated in
// isolation, so per-trial streams are disjoint counter ranges and results
// are independent of scheduling or thread count.
#pragma once

#include <array>
#include <cstdint>

namespace qhe::rng {

inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                               std::array<std::uint32_t, 4> ctr) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        if (round) {
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        const std::uint64_t m0 = 0xD2511F53ull * ctr[0];
        const std::uint64_t m1 = 0xCD9E8D57ull * ctr[2];
        ctr = {static_cast<std::uint32_t>(m1 >> 32) ^ ctr[1] ^ k0,
               static_cast<std::uint32_t>(m1),
               static_cast<std::uint32_t>(m0 >> 32) ^ ctr[3] ^ k1,
               static_cast<std::uint32_t>(m0)};
    }
    return ctr;
}

// Uniform doubles for one Monte Carlo trial.  Counter layout:
// (draw block, trial low word, trial high word, salt); each block yields two
// 53-bit uniforms in [0, 1).
class TrialStream {
public:
    TrialStream(std::uint64_t seed, std::uint64_t trial, std::uint32_t salt = 0)
        : key_(seed), base_{0, static_cast<std::uint32_t>(trial),
                            static_cast<std::uint32_t>(trial >> 32), salt} {}

    double uniform() {
        if (have_ == 0) {
            auto ctr = base_;
            ctr[0] = draw_++;
            buf_ = philox4x32(key_, ctr);
            have_ = 2;
        }
        const int off = have_ == 2 ? 0 : 2;
        --have_;
        const std::uint64_t hi = buf_[off] >> 5;      // 27 bits
        const std::uint64_t lo = buf_[off + 1] >> 6;  // 26 bits
        return static_cast<double>((hi << 26) | lo) * 0x1p-53;
    }

private:
    std::uint64_t key_;
    std::array<std::uint32_t, 4> base_;
    std::uint32_t draw_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int have_ = 0;
};

} // namespace qhe::rng

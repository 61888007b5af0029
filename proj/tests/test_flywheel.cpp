#include "doctest.h"

#include "qhe/flywheel.hpp"
#include "qhe/philox.hpp"

#include <array>
#include <cmath>

using namespace qhe::flywheel;
using qhe::rng::philox4x32;
using qhe::rng::TrialStream;

TEST_CASE("philox 4x32-10 known-answer vectors") {
    // reference vectors for the all-zeros, all-ones, and pi-digit blocks
    auto zeros = philox4x32(0ull, {0u, 0u, 0u, 0u});
    CHECK(zeros == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
                                                0x9b00dbd8u});

    auto ones = philox4x32(0xffffffffffffffffull,
                           {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
    CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u,
                                               0x6d5451fdu});

    auto pi_block = philox4x32(0x299f31d0a4093822ull,
                               {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
    CHECK(pi_block == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u,
                                                   0x24126ea1u});
}

TEST_CASE("trial streams are deterministic, disjoint, and uniform") {
    TrialStream a(42, 7), b(42, 7), c(42, 8), d(42, 7, 1);
    // same (seed, trial, salt): identical sequence
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    // different trial or salt: different draws
    TrialStream a2(42, 7);
    CHECK(a2.uniform() != c.uniform());
    TrialStream a3(42, 7);
    CHECK(a3.uniform() != d.uniform());

    // first block feeds two uniforms from words (0,1) then (2,3)
    auto block = philox4x32(42ull, {0u, 7u, 0u, 0u});
    auto from_words = [](std::uint32_t w0, std::uint32_t w1) {
        return static_cast<double>((static_cast<std::uint64_t>(w0 >> 5) << 26) |
                                   (w1 >> 6)) *
               0x1p-53;
    };
    TrialStream s(42, 7);
    CHECK(s.uniform() == from_words(block[0], block[1]));
    CHECK(s.uniform() == from_words(block[2], block[3]));

    // range and crude uniformity
    TrialStream u(1, 0);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        sum += x;
    }
    CHECK(std::abs(sum / 20000.0 - 0.5) < 0.01);
}

TEST_CASE("bias parametrisation recovers the bath split") {
    auto pr = params_from_bias(2.0, 0.6);
    CHECK(pr.chi() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(pr.p1() == doctest::Approx(0.0771242869236528).epsilon(1e-12));
    CHECK(pr.p2() == doctest::Approx(0.381761949305959).epsilon(1e-12));
    CHECK(pr.beta1 > pr.beta2); // positive-temperature engine branch

    auto dist = step_distribution(pr);
    CHECK(dist.p_plus == doctest::Approx(0.352318831191153).epsilon(1e-12));
    CHECK(dist.p_minus == doctest::Approx(0.047681168808847).epsilon(1e-12));
    CHECK(dist.p_zero == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(dist.p_plus / dist.p_minus == doctest::Approx(std::exp(2.0)).epsilon(1e-12));

    SUBCASE("domain guards") {
        CHECK_THROWS_AS(params_from_bias(0.0, 0.3), std::invalid_argument); // no split
        CHECK_THROWS_AS(params_from_bias(2.0, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(params_from_bias(2.0, -0.1), std::invalid_argument);
        CHECK_NOTHROW(params_from_bias(0.0, 0.6)); // q = 0 but split exists
    }

    SUBCASE("validate and warnings") {
        FlywheelParams bad = pr;
        bad.d = 0.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = pr;
        bad.omega0 = -1.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = pr;
        bad.N = -1;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

        FlywheelParams marginal = pr;
        marginal.omega_z = 5.0; // slow qubit: kick picture marginal
        CHECK(!marginal.warnings().empty());
        std::swap(marginal.beta1, marginal.beta2); // reverse bias
        CHECK(marginal.warnings().size() >= 2);
        CHECK(pr.warnings().empty());
    }
}

TEST_CASE("generating function: normalisation and detailed-balance tilt") {
    auto dist = step_distribution(params_from_bias(2.0, 0.6));
    CHECK(generating_function(dist, 0.0) == 1.0);
    // tilting by -chi/(2d) swaps p+ and p-, so G1 returns to exactly 1
    CHECK(generating_function(dist, -2.0 / (2.0 * dist.d)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // convexity in s
    CHECK(generating_function(dist, 1.0) + generating_function(dist, -1.0) > 2.0);
}

TEST_CASE("walk cumulants against exact trinomial enumeration") {
    auto dist = step_distribution(params_from_bias(2.0, 0.6));
    for (long N : {1L, 2L, 3L, 7L}) {
        CAPTURE(N);
        // exact moments by summing the multinomial distribution of
        // (#up, #down) over N kicks
        double logfactN = std::lgamma(static_cast<double>(N) + 1.0);
        double e1 = 0, e2 = 0, e3 = 0, e4 = 0;
        for (long up = 0; up <= N; ++up) {
            for (long down = 0; down + up <= N; ++down) {
                const long zero = N - up - down;
                const double logw = logfactN - std::lgamma(up + 1.0) -
                                    std::lgamma(down + 1.0) - std::lgamma(zero + 1.0) +
                                    up * std::log(dist.p_plus) +
                                    down * std::log(dist.p_minus) +
                                    (zero ? zero * std::log(dist.p_zero) : 0.0);
                const double w = std::exp(logw);
                const double alpha = 2.0 * dist.d * static_cast<double>(up - down);
                e1 += w * alpha;
                e2 += w * alpha * alpha;
                e3 += w * alpha * alpha * alpha;
                e4 += w * alpha * alpha * alpha * alpha;
            }
        }
        auto mo = moments(dist, N);
        CHECK(mo.mean_alpha == doctest::Approx(e1).epsilon(1e-12));
        CHECK(mo.e_alpha2 == doctest::Approx(e2).epsilon(1e-12));
        CHECK(mo.e_alpha4 == doctest::Approx(e4).epsilon(1e-12));
        CHECK(mo.var_alpha == doctest::Approx(e2 - e1 * e1).epsilon(1e-11));
        CHECK(mo.K3 == doctest::Approx(e3 - 3.0 * e2 * e1 + 2.0 * e1 * e1 * e1)
                           .epsilon(1e-10));
        CHECK(mo.mean_n == doctest::Approx(e2).epsilon(1e-12));
        CHECK(mo.mean_n2 == doctest::Approx(e4 + e2).epsilon(1e-12));
    }
}

TEST_CASE("frozen walk numbers at chi = 2, p0 = 0.6") {
    auto pr = params_from_bias(2.0, 0.6);
    auto dist = step_distribution(pr);
    auto mo = moments(dist, 1);
    CHECK(mo.K1 == doctest::Approx(0.0609275324764612).epsilon(1e-11));
    CHECK(mo.K2 == doctest::Approx(0.0122878357863).epsilon(1e-10));
    CHECK(mo.K3 == doctest::Approx(-3.5074248439e-5).epsilon(1e-9));
    CHECK(mo.K4 == doctest::Approx(-9.18917240581e-5).epsilon(1e-9));

    CHECK(tur_ratio_flywheel(pr) == doctest::Approx(6.05038573870215).epsilon(1e-11));
    CHECK(tur_ratio_fock(pr) == doctest::Approx(2.01679524623405).epsilon(1e-11));
    CHECK(tur_ratio_ct(2.0) == doctest::Approx(2.62607057099866).epsilon(1e-11));

    auto asym = asymptotic_work_fluct_entropy(pr);
    const double q = dist.p_plus - dist.p_minus;
    const double m = dist.p_plus + dist.p_minus;
    const double n = static_cast<double>(pr.N);
    CHECK(asym.Sigma_N / n == doctest::Approx(0.609275324764612).epsilon(1e-11));
    CHECK(asym.W_N ==
          doctest::Approx(4.0 * pr.omega0 * pr.d * pr.d * q * q * n * n).epsilon(1e-14));
    CHECK(asym.Delta_WN == doctest::Approx(64.0 * pr.omega0 * pr.omega0 *
                                           std::pow(pr.d, 4) * q * q * (m - q * q) * n *
                                           n * n)
                               .epsilon(1e-14));
}

TEST_CASE("TUR ratio relations") {
    // exact factor three, ordering against the continuous-time curve, and the
    // vanishing-affinity limit
    for (double chi : {0.2, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        CAPTURE(chi);
        const double p0 = 0.6;
        auto pr = params_from_bias(chi, p0);
        const double fock = tur_ratio_fock(pr);
        CHECK(tur_ratio_flywheel(pr) == doctest::Approx(3.0 * fock).epsilon(1e-15));
        CHECK(fock <= tur_ratio_ct(chi));
        CHECK(fock > 0.0);
    }
    CHECK(tur_ratio_ct(0.0) == 2.0);
    auto tiny = params_from_bias(1e-8, 0.6);
    CHECK(tur_ratio_fock(tiny) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("cycle thermodynamics: first law and asymptotic consistency") {
    auto pr = params_from_bias(2.0, 0.6);
    auto dist = step_distribution(pr);
    const double q = dist.p_plus - dist.p_minus;

    for (double X : {0.0, 0.5, 2.0, 10.0}) {
        auto ct = cycle_thermodynamics(pr, X);
        CHECK(ct.Q1 + ct.Q2 == doctest::Approx(ct.W_cyc).epsilon(1e-14));
        CHECK(ct.W_cyc ==
              doctest::Approx(2.0 * pr.omega0 * pr.d * q * X).epsilon(1e-13));
    }
    // cold bath absorbs, hot bath supplies at small displacement
    auto ct = cycle_thermodynamics(pr, 0.5);
    CHECK(ct.Q1 < 0.0);
    CHECK(ct.Q2 > 0.0);

    // cycle-to-cycle work increment equals one cycle's work at the midpoint
    // mean displacement <a + a^dag> = 2 * 2dq (N + 1/2)
    for (long N : {10L, 100L}) {
        FlywheelParams a = pr, b = pr;
        a.N = N;
        b.N = N + 1;
        const double dW = asymptotic_work_fluct_entropy(b).W_N -
                          asymptotic_work_fluct_entropy(a).W_N;
        const double X_mid = 2.0 * 2.0 * pr.d * q * (static_cast<double>(N) + 0.5);
        CHECK(cycle_thermodynamics(pr, X_mid).W_cyc == doctest::Approx(dW).epsilon(1e-12));
    }
}

TEST_CASE("monte carlo agrees with the exact moments") {
    auto pr = params_from_bias(2.0, 0.6);
    pr.N = 200;
    McConfig cfg;
    cfg.trials = 20000;
    cfg.seed = 1;
    auto res = monte_carlo_walk(pr, cfg);
    CHECK(res.trials == 20000);
    CHECK(res.max_abs_z <= 4.0);
    CHECK(res.mean_alpha.se > 0.0);
    CHECK(res.mean_n.value > 0.0);
}

TEST_CASE("monte carlo is bitwise reproducible and job-count independent") {
    auto pr = params_from_bias(2.0, 0.6);
    pr.N = 50;
    McConfig cfg;
    cfg.trials = 5000; // spans two accumulation blocks
    cfg.seed = 7;

    auto r1 = monte_carlo_walk(pr, cfg);
    auto r2 = monte_carlo_walk(pr, cfg);
    cfg.jobs = 3;
    auto r3 = monte_carlo_walk(pr, cfg);
    CHECK(r1.mean_alpha.value == r2.mean_alpha.value);
    CHECK(r1.e_alpha4.value == r2.e_alpha4.value);
    CHECK(r1.mean_alpha.value == r3.mean_alpha.value);
    CHECK(r1.var_alpha.value == r3.var_alpha.value);
    CHECK(r1.mean_n2.value == r3.mean_n2.value);

    cfg.jobs = 1;
    cfg.seed = 8;
    auto r4 = monte_carlo_walk(pr, cfg);
    CHECK(r1.mean_alpha.value != r4.mean_alpha.value);

    SUBCASE("zero cycles is a degenerate exact walk") {
        pr.N = 0;
        McConfig tiny;
        tiny.trials = 100;
        auto r = monte_carlo_walk(pr, tiny);
        CHECK(r.max_abs_z == 0.0);
        CHECK(r.mean_n.value == 0.0);
    }
}

TEST_CASE("truncated displacement channel reproduces the walk moments") {
    auto pr = params_from_bias(2.0, 0.6);
    auto chk = quantum_map_check(pr); // n_max = 60, 20 cycles
    CHECK(chk.rel_dev_n < 1e-8);
    CHECK(chk.rel_dev_n2 < 1e-8);
    CHECK(chk.trace_dev < 1e-12);
    CHECK(chk.top_population < 1e-8);
    CHECK(chk.mean_n_map > 0.0);

    SUBCASE("guards") {
        CHECK_THROWS_AS(quantum_map_check(pr, 60, 51), std::invalid_argument);
        CHECK_THROWS_AS(quantum_map_check(pr, 0, 5), std::invalid_argument);
        // heavy truncation must be detected, not silently absorbed
        CHECK_THROWS_AS(quantum_map_check(pr, 2, 40), std::runtime_error);
    }

    SUBCASE("zero cycles leaves the ground state") {
        auto idchk = quantum_map_check(pr, 10, 0);
        CHECK(idchk.mean_n_map == 0.0);
        CHECK(idchk.rel_dev_n == 0.0);
    }
}

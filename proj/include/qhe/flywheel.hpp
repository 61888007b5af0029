// Spin-oscillator Otto engine ("flywheel"): per-cycle thermodynamics and the
// discrete-time random walk its phase-space displacement performs.
//
// Each engine cycle (duration 2 pi / omega_0) kicks the oscillator's
// displacement by +2d, -2d, or not at all:
//     p+ = p2 (1 - p1),   p- = p1 (1 - p2),   p0 = 1 - p+ - p-,
// where p_j = 1 / (1 + e^{beta_j omega_z}) are the excited-state populations
// the baths imprint, and p+/p- = e^chi with chi = (beta1 - beta2) omega_z.
// Everything downstream — work, fluctuations, entropy, TUR ratios — is
// walk combinatorics, implemented here in closed form, by Monte Carlo, and
// (as a cross-check) as a truncated-Fock quantum channel.
#pragma once

#include "qhe/common.hpp"

#include <cstdint>

namespace qhe::flywheel {

struct FlywheelParams {
    double omega_z = 20.0; // qubit splitting
    double omega0 = 1.0;   // oscillator frequency; cycle time 2 pi / omega0
    double d = 0.1;        // qubit-oscillator coupling (kick per cycle = 2d)
    double beta1 = 0.0;    // cold bath
    double beta2 = 0.0;    // hot bath
    long N = 1000;         // number of engine cycles

    double chi() const { return (beta1 - beta2) * omega_z; }
    double cycle_time() const { return 2.0 * pi / omega0; }
    // excited-state population a bath at beta imprints on the qubit
    double p1() const { return 1.0 / (1.0 + std::exp(beta1 * omega_z)); }
    double p2() const { return 1.0 / (1.0 + std::exp(beta2 * omega_z)); }

    void validate() const;                  // throws on nonpositive omega/d or N < 0
    std::vector<std::string> warnings() const; // regime advisories
};

// The figure-style parametrisation (chi, p0) fixes the walk completely; the
// underlying (beta1, beta2) split is recovered on the positive-temperature
// branch p_j < 1/2 (any other split consistent with (chi, p0) gives the
// same walk).
FlywheelParams params_from_bias(double chi, double p_zero, double omega_z = 20.0,
                                double omega0 = 1.0, double d = 0.1, long N = 1000);

struct StepDistribution {
    double p_plus = 0.0;
    double p_minus = 0.0;
    double p_zero = 1.0;
    double d = 0.0; // step size is 2d
};

StepDistribution step_distribution(const FlywheelParams& pr);

// one-cycle moment generating function G1(s) = E[e^{s alpha_1}]
double generating_function(const StepDistribution& dist, double s);

// Exact finite-N moments of the displacement alpha_N (sum of N independent
// kicks), via per-step cumulants:
//   k1 = 2dq, k2 = 4d^2(m - q^2), k3 = 8d^3 q(1 - 3m + 2q^2),
//   k4 = 16d^4 (m - 4q^2 - 3m^2 + 12mq^2 - 6q^4),  q = p+ - p-, m = p+ + p-,
// and the normal-ordering identities <n> = E[alpha^2],
// <n^2> = E[alpha^4] + E[alpha^2] for the coherent-state mixture.
struct WalkMoments {
    double K1 = 0.0, K2 = 0.0, K3 = 0.0, K4 = 0.0; // cumulants of alpha_N
    double mean_alpha = 0.0;
    double var_alpha = 0.0;
    double e_alpha2 = 0.0;
    double e_alpha4 = 0.0;
    double mean_n = 0.0;
    double mean_n2 = 0.0;
    double var_n = 0.0;
};
WalkMoments moments(const StepDistribution& dist, long N);

// heat taken from each bath and work delivered to the flywheel over one
// cycle at mean displacement X = <a + a^dag>; Q1 + Q2 = W_cyc identically
struct CycleThermo {
    double Q1 = 0.0;
    double Q2 = 0.0;
    double W_cyc = 0.0;
};
CycleThermo cycle_thermodynamics(const FlywheelParams& pr, double displacement);

// leading-order cumulative quantities after N cycles:
//   W_N = 4 w0 d^2 q^2 N^2,  Delta_WN = 64 w0^2 d^4 q^2 (m - q^2) N^3,
//   Sigma_N = chi q N
struct Asymptotics {
    double W_N = 0.0;
    double Delta_WN = 0.0;
    double Sigma_N = 0.0;
};
Asymptotics asymptotic_work_fluct_entropy(const FlywheelParams& pr);

// N -> infinity TUR ratios: the coherent-state flywheel, the Fock-register
// variant (exactly one third of it), and the continuous-time classical bound
double tur_ratio_flywheel(const FlywheelParams& pr); // 3 chi [coth(chi/2) - q]
double tur_ratio_fock(const FlywheelParams& pr);     //   chi [coth(chi/2) - q]
double tur_ratio_ct(double chi);                     //   chi  coth(chi/2)

// ---- Monte Carlo -----------------------------------------------------------
struct McConfig {
    long trials = 100000;
    std::uint64_t seed = 1;
    int jobs = 1; // worker threads; results are identical for any value
};

struct McMoment {
    double value = 0.0;    // empirical estimate
    double se = 0.0;       // standard error (delta method where needed)
    double analytic = 0.0; // closed-form counterpart
    double z = 0.0;        // (value - analytic) / se
};

struct McResult {
    McMoment mean_alpha;
    McMoment var_alpha;
    McMoment mean_n;  // = E[alpha^2]
    McMoment e_alpha4;
    McMoment mean_n2; // = E[alpha^4] + E[alpha^2]
    double max_abs_z = 0.0;
    long trials = 0;
    long cycles = 0;
    std::uint64_t seed = 0;
};

// Samples `trials` independent walks of pr.N cycles.  Trials use disjoint
// counter-based streams and are accumulated in fixed 4096-trial blocks, so
// the result is bitwise identical for any seed-fixed rerun and any `jobs`.
McResult monte_carlo_walk(const FlywheelParams& pr, const McConfig& cfg);

// ---- truncated-Fock quantum channel cross-check ----------------------------
struct MapCheck {
    double mean_n_map = 0.0;
    double mean_n2_map = 0.0;
    double mean_n_walk = 0.0;
    double mean_n2_walk = 0.0;
    double rel_dev_n = 0.0;
    double rel_dev_n2 = 0.0;
    double trace_dev = 0.0;
    double top_population = 0.0; // occupation of the highest retained level
};

// Iterates rho -> p0 rho + p+ D(2d) rho D(2d)^+ + p- D(-2d) rho D(-2d)^+
// from the oscillator ground state on a Fock space truncated at n_max and
// compares <n>, <n^2> against the walk moments.  Throws when the truncation
// leaks (top-level population >= 1e-8) or n_cycles > 50.
MapCheck quantum_map_check(const FlywheelParams& pr, int n_max = 60, int n_cycles = 20);

} // namespace qhe::flywheel

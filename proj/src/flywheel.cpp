#include "qhe/flywheel.hpp"

#include "qhe/closedform.hpp"
#include "qhe/philox.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

namespace qhe::flywheel {

void FlywheelParams::validate() const {
    if (!(omega_z > 0.0) || !(omega0 > 0.0))
        throw std::invalid_argument("flywheel: omega_z and omega0 must be positive");
    if (!(d > 0.0)) throw std::invalid_argument("flywheel: coupling d must be positive");
    if (N < 0) throw std::invalid_argument("flywheel: cycle count must be nonnegative");
}

std::vector<std::string> FlywheelParams::warnings() const {
    std::vector<std::string> w;
    if (omega_z / omega0 < 10.0)
        w.push_back("omega_z/omega0 < 10: cycle-averaged kick picture is marginal");
    if (d > 0.2) w.push_back("d > 0.2: weak-coupling displacement picture is marginal");
    if (chi() < 0.0) w.push_back("chi < 0: reverse bias, the walk drifts backwards");
    return w;
}

FlywheelParams params_from_bias(double chi, double p_zero, double omega_z, double omega0,
                                double d, long N) {
    if (!(p_zero >= 0.0 && p_zero < 1.0))
        throw std::invalid_argument("params_from_bias: need 0 <= p0 < 1");
    const double p_minus = (1.0 - p_zero) / (1.0 + std::exp(chi));
    const double p_plus = (1.0 - p_zero) - p_minus; // = p_minus e^chi
    const double q = p_plus - p_minus;
    // p2 (1 - p1) = p+, p1 (1 - p2) = p-, p2 = p1 + q  =>
    // p1^2 - (1 - q) p1 + p- = 0; the smaller root is the positive-temperature
    // branch (p_j < 1/2)
    const double disc = (1.0 - q) * (1.0 - q) - 4.0 * p_minus;
    if (disc < 0.0)
        throw std::invalid_argument(
            "params_from_bias: no positive-temperature bath split gives this (chi, p0)");
    const double p1 = 0.5 * ((1.0 - q) - std::sqrt(disc));
    const double p2 = p1 + q;
    if (!(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0))
        throw std::invalid_argument("params_from_bias: recovered populations leave (0, 1)");
    FlywheelParams pr;
    pr.omega_z = omega_z;
    pr.omega0 = omega0;
    pr.d = d;
    pr.N = N;
    pr.beta1 = std::log(1.0 / p1 - 1.0) / omega_z;
    pr.beta2 = std::log(1.0 / p2 - 1.0) / omega_z;
    pr.validate();
    return pr;
}

StepDistribution step_distribution(const FlywheelParams& pr) {
    pr.validate();
    StepDistribution dist;
    const double p1 = pr.p1(), p2 = pr.p2();
    dist.p_plus = p2 * (1.0 - p1);
    dist.p_minus = p1 * (1.0 - p2);
    dist.p_zero = 1.0 - dist.p_plus - dist.p_minus;
    dist.d = pr.d;
    return dist;
}

double generating_function(const StepDistribution& dist, double s) {
    return dist.p_zero + dist.p_plus * std::exp(2.0 * dist.d * s) +
           dist.p_minus * std::exp(-2.0 * dist.d * s);
}

WalkMoments moments(const StepDistribution& dist, long N) {
    const double q = dist.p_plus - dist.p_minus;
    const double m = dist.p_plus + dist.p_minus;
    const double d = dist.d;
    const double d2 = d * d;
    // cumulants of one +-2d/0 kick
    const double k1 = 2.0 * d * q;
    const double k2 = 4.0 * d2 * (m - q * q);
    const double k3 = 8.0 * d2 * d * q * (1.0 - 3.0 * m + 2.0 * q * q);
    const double k4 =
        16.0 * d2 * d2 * (m - 4.0 * q * q - 3.0 * m * m + 12.0 * m * q * q - 6.0 * q * q * q * q);
    WalkMoments out;
    const double n = static_cast<double>(N);
    out.K1 = n * k1;
    out.K2 = n * k2;
    out.K3 = n * k3;
    out.K4 = n * k4;
    out.mean_alpha = out.K1;
    out.var_alpha = out.K2;
    out.e_alpha2 = out.K2 + out.K1 * out.K1;
    out.e_alpha4 = out.K4 + 4.0 * out.K3 * out.K1 + 3.0 * out.K2 * out.K2 +
                   6.0 * out.K2 * out.K1 * out.K1 + out.K1 * out.K1 * out.K1 * out.K1;
    out.mean_n = out.e_alpha2;
    out.mean_n2 = out.e_alpha4 + out.e_alpha2;
    out.var_n = out.mean_n2 - out.mean_n * out.mean_n;
    return out;
}

CycleThermo cycle_thermodynamics(const FlywheelParams& pr, double displacement) {
    pr.validate();
    const double p1 = pr.p1(), p2 = pr.p2();
    CycleThermo out;
    out.Q1 = (p1 - p2) * (pr.omega_z - pr.omega0 * pr.d * displacement);
    out.Q2 = (p2 - p1) * (pr.omega_z + pr.omega0 * pr.d * displacement);
    out.W_cyc = out.Q1 + out.Q2; // = 2 omega0 d (p2 - p1) X identically
    return out;
}

Asymptotics asymptotic_work_fluct_entropy(const FlywheelParams& pr) {
    const StepDistribution dist = step_distribution(pr);
    const double q = dist.p_plus - dist.p_minus;
    const double m = dist.p_plus + dist.p_minus;
    const double n = static_cast<double>(pr.N);
    const double d2 = pr.d * pr.d;
    Asymptotics out;
    out.W_N = 4.0 * pr.omega0 * d2 * q * q * n * n;
    out.Delta_WN = 64.0 * pr.omega0 * pr.omega0 * d2 * d2 * q * q * (m - q * q) * n * n * n;
    out.Sigma_N = pr.chi() * q * n;
    return out;
}

double tur_ratio_fock(const FlywheelParams& pr) {
    const StepDistribution dist = step_distribution(pr);
    const double q = dist.p_plus - dist.p_minus;
    // chi [coth(chi/2) - q], with the chi coth(chi/2) part evaluated through
    // its small-bias series so chi -> 0 tends to 2 cleanly
    return closedform::chi_coth_half(pr.chi()) - pr.chi() * q;
}

double tur_ratio_flywheel(const FlywheelParams& pr) { return 3.0 * tur_ratio_fock(pr); }

double tur_ratio_ct(double chi) { return closedform::chi_coth_half(chi); }

// ---- Monte Carlo -----------------------------------------------------------

namespace {

constexpr long kBlock = 4096; // trials per accumulation block (fixed: results
                              // must not depend on trial count rounding or jobs)

using Sums = std::array<double, 8>; // sums of alpha^1 .. alpha^8

Sums run_block(const FlywheelParams& pr, const StepDistribution& dist, std::uint64_t seed,
               long t0, long t1) {
    Sums s{};
    const double two_d = 2.0 * dist.d;
    const double a = dist.p_plus;
    const double b = dist.p_plus + dist.p_minus;
    for (long t = t0; t < t1; ++t) {
        rng::TrialStream stream(seed, static_cast<std::uint64_t>(t));
        long k = 0;
        for (long c = 0; c < pr.N; ++c) {
            const double u = stream.uniform();
            if (u < a)
                ++k;
            else if (u < b)
                --k;
        }
        const double alpha = two_d * static_cast<double>(k);
        double p = 1.0;
        for (int j = 0; j < 8; ++j) {
            p *= alpha;
            s[j] += p;
        }
    }
    return s;
}

McMoment make_moment(double value, double se_sq, double analytic, long trials) {
    McMoment m;
    m.value = value;
    m.se = std::sqrt(std::max(0.0, se_sq) / static_cast<double>(trials));
    m.analytic = analytic;
    const double diff = value - analytic;
    if (m.se > 0.0)
        m.z = diff / m.se;
    else
        m.z = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return m;
}

} // namespace

McResult monte_carlo_walk(const FlywheelParams& pr, const McConfig& cfg) {
    pr.validate();
    if (cfg.trials <= 0) throw std::invalid_argument("monte_carlo_walk: trials must be positive");
    const StepDistribution dist = step_distribution(pr);
    const long T = cfg.trials;
    const long nblocks = (T + kBlock - 1) / kBlock;
    std::vector<Sums> partial(static_cast<std::size_t>(nblocks));

    const int jobs = std::max(1, cfg.jobs);
    auto work = [&](int worker) {
        for (long blk = worker; blk < nblocks; blk += jobs) {
            const long t0 = blk * kBlock;
            const long t1 = std::min(T, t0 + kBlock);
            partial[static_cast<std::size_t>(blk)] = run_block(pr, dist, cfg.seed, t0, t1);
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    Sums s{};
    for (const auto& blk : partial) // fixed block order: deterministic totals
        for (int j = 0; j < 8; ++j) s[j] += blk[j];
    std::array<double, 9> m{};
    m[0] = 1.0;
    for (int j = 1; j <= 8; ++j) m[j] = s[j - 1] / static_cast<double>(T);

    const WalkMoments an = moments(dist, pr.N);
    McResult out;
    out.trials = T;
    out.cycles = pr.N;
    out.seed = cfg.seed;
    out.mean_alpha = make_moment(m[1], m[2] - m[1] * m[1], an.mean_alpha, T);
    // delta method for var = m2 - m1^2 with gradient (-2 m1, 1)
    const double var_se_sq = 4.0 * m[1] * m[1] * (m[2] - m[1] * m[1]) -
                             4.0 * m[1] * (m[3] - m[1] * m[2]) + (m[4] - m[2] * m[2]);
    out.var_alpha = make_moment(m[2] - m[1] * m[1], var_se_sq, an.var_alpha, T);
    out.mean_n = make_moment(m[2], m[4] - m[2] * m[2], an.mean_n, T);
    out.e_alpha4 = make_moment(m[4], m[8] - m[4] * m[4], an.e_alpha4, T);
    const double n2_se_sq =
        (m[8] - m[4] * m[4]) + 2.0 * (m[6] - m[2] * m[4]) + (m[4] - m[2] * m[2]);
    out.mean_n2 = make_moment(m[4] + m[2], n2_se_sq, an.mean_n2, T);
    for (const McMoment* mm :
         {&out.mean_alpha, &out.var_alpha, &out.mean_n, &out.e_alpha4, &out.mean_n2})
        out.max_abs_z = std::max(out.max_abs_z, std::abs(mm->z));
    return out;
}

// ---- quantum-map cross-check ------------------------------------------------

MapCheck quantum_map_check(const FlywheelParams& pr, int n_max, int n_cycles) {
    pr.validate();
    if (n_cycles < 0 || n_cycles > 50)
        throw std::invalid_argument("quantum_map_check: supported range is 0..50 cycles");
    if (n_max < 1) throw std::invalid_argument("quantum_map_check: need n_max >= 1");
    const StepDistribution dist = step_distribution(pr);
    const int M = n_max + 1;

    // D(x) = exp(x (a^dag - a)) for real x: the generator is skew-hermitian,
    // so diagonalise H = -i x (a^dag - a) and exponentiate the phases
    const double x = 2.0 * pr.d;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(M, M);
    for (int n = 0; n + 1 < M; ++n) {
        const double w = x * std::sqrt(static_cast<double>(n + 1));
        H(n + 1, n) = cplx(0.0, -w);
        H(n, n + 1) = cplx(0.0, w);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    Eigen::VectorXcd phases(M);
    for (int i = 0; i < M; ++i) phases[i] = std::exp(cplx(0.0, es.eigenvalues()[i]));
    const Eigen::MatrixXcd Dp =
        es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    const Eigen::MatrixXcd Dm = Dp.adjoint(); // D(-x) = D(x)^dag

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(M, M);
    rho(0, 0) = 1.0;
    for (int c = 0; c < n_cycles; ++c)
        rho = dist.p_zero * rho + dist.p_plus * (Dp * rho * Dm) + dist.p_minus * (Dm * rho * Dp);

    MapCheck out;
    out.top_population = rho(M - 1, M - 1).real();
    if (!(out.top_population < 1e-8)) {
        std::ostringstream os;
        os << "quantum_map_check: truncation leak, top-level population " << out.top_population
           << " at n_max = " << n_max;
        throw std::runtime_error(os.str());
    }
    out.trace_dev = std::abs(rho.trace() - cplx(1.0, 0.0));
    for (int n = 0; n < M; ++n) {
        const double pop = rho(n, n).real();
        out.mean_n_map += n * pop;
        out.mean_n2_map += static_cast<double>(n) * n * pop;
    }
    const WalkMoments an = moments(dist, n_cycles);
    out.mean_n_walk = an.mean_n;
    out.mean_n2_walk = an.mean_n2;
    out.rel_dev_n = rel_dev(out.mean_n_map, out.mean_n_walk, 1e-12);
    out.rel_dev_n2 = rel_dev(out.mean_n2_map, out.mean_n2_walk, 1e-12);
    return out;
}

} // namespace qhe::flywheel

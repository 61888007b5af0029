#include "qhe/closedform.hpp"

#include <limits>

namespace qhe::closedform {

namespace {
constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

// coupling-optimised coefficient c_max entering bound_curve
double curve_coefficient(ModelKind kind) {
    switch (kind) {
        case ModelKind::Reset2QE: return 1.0 / 3.0;   // f_max/2 = (2/3)/2
        case ModelKind::Local2QE: return 25.0 / 64.0; // f_max/2 = (25/32)/2
        case ModelKind::Effective3QE:
        case ModelKind::Full3QE: return 3.0 / 4.0;    // exact factor, no /2
    }
    throw std::logic_error("curve_coefficient: bad kind");
}

template <class F>
CurveMin golden_min(F&& f, double a, double b, double xtol) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    const double xs = 0.5 * (a + b);
    return {xs, f(xs)};
}

} // namespace

double chi_coth_half(double chi) {
    const double x = chi / 2.0;
    if (std::abs(x) < 1e-6) {
        // 2x coth x = 2(1 + x^2/3 - x^4/45 + ...)
        const double x2 = x * x;
        return 2.0 * (1.0 + x2 / 3.0 - x2 * x2 / 45.0);
    }
    return chi / std::tanh(x);
}

VirtualQubit eq_virtual(const EngineParams& pr) {
    const double t1 = std::tanh(pr.beta1 * pr.E1 / 2.0);
    const double t2 = std::tanh(pr.beta2 * pr.E2 / 2.0);
    VirtualQubit v;
    v.chi = pr.chi();
    v.Tv = pr.Tv();
    v.Neq = 0.5 * (1.0 - t1 * t2);
    v.Zeq = std::tanh(v.chi / 2.0) * v.Neq;
    v.Seq = -0.5 * (t1 + t2);
    v.bias3 = std::tanh(v.chi / 2.0);
    return v;
}

double Gamma2(double g, double p) { return g * g * p / (p * p + 2.0 * g * g); }
double Gamma2_local(double g, double p) { return 2.0 * g * g * p / (p * p + 4.0 * g * g); }
double Gamma3(double g, double p) { return 4.0 * g * g * p / (p * p + 8.0 * g * g); }

double tur_coherence_form(ModelKind kind, double chi, double Neq, double meanN, double meanC) {
    const double cc = chi_coth_half(chi);
    switch (kind) {
        case ModelKind::Reset2QE:
            return cc * (meanN - 3.0 * meanC * meanC) / Neq;
        case ModelKind::Local2QE:
            return cc * (meanN - 2.0 * meanC * meanC) / Neq;
        case ModelKind::Effective3QE:
        case ModelKind::Full3QE:
            return cc * (1.0 - 1.5 * meanC * meanC);
    }
    throw std::logic_error("tur_coherence_form: bad kind");
}

namespace {

AnalyticReport common_fields(ModelKind kind, const EngineParams& pr, double Gamma, double bias) {
    AnalyticReport r{};
    r.model = kind;
    r.Gamma = Gamma;
    r.W_dot = Gamma * pr.Ev() * bias;
    r.Sigma_dot = pr.chi() * Gamma * bias;
    r.Q1_dot = -pr.E1 / pr.Ev() * r.W_dot;
    r.Q2_dot = pr.E2 / pr.Ev() * r.W_dot;
    r.eta = 1.0 - pr.E1 / pr.E2;
    r.eta_C = 1.0 - pr.beta2 / pr.beta1;
    return r;
}

} // namespace

AnalyticReport ness_2qe_reset(const EngineParams& pr) {
    pr.validate(ModelKind::Reset2QE);
    const VirtualQubit v = eq_virtual(pr);
    const double g = pr.g, p = pr.p, q = p * p + 2.0 * g * g;
    AnalyticReport r = common_fields(ModelKind::Reset2QE, pr, Gamma2(g, p), v.Zeq);
    r.mean_C = g * p / q * v.Zeq;
    r.mean_Z = p * p / q * v.Zeq;
    r.mean_N = v.Neq - g * g / q * v.Zeq * v.Zeq;
    r.mean_S = v.Seq;
    r.DeltaW_dot = r.Gamma * pr.Ev() * pr.Ev() * (r.mean_N - 3.0 * r.mean_C * r.mean_C);
    r.tur_ratio = tur_coherence_form(r.model, v.chi, v.Neq, r.mean_N, r.mean_C);
    return r;
}

AnalyticReport ness_2qe_local(const EngineParams& pr) {
    pr.validate(ModelKind::Local2QE);
    const VirtualQubit v = eq_virtual(pr);
    const double g = pr.g, p = pr.p, q = p * p + 4.0 * g * g;
    AnalyticReport r = common_fields(ModelKind::Local2QE, pr, Gamma2_local(g, p), v.Zeq);
    r.mean_C = 2.0 * g * p / q * v.Zeq;
    r.mean_Z = p * p / q * v.Zeq;
    r.mean_N = v.Neq - 2.0 * g * g / q * v.Zeq * v.Zeq;
    r.mean_S = v.Seq;
    r.DeltaW_dot = r.Gamma * pr.Ev() * pr.Ev() * (r.mean_N - 2.0 * r.mean_C * r.mean_C);
    r.tur_ratio = tur_coherence_form(r.model, v.chi, v.Neq, r.mean_N, r.mean_C);
    return r;
}

AnalyticReport ness_3qe(const EngineParams& pr) {
    pr.validate(ModelKind::Effective3QE);
    const VirtualQubit v = eq_virtual(pr);
    const double g = pr.g, p = pr.p, q = p * p + 8.0 * g * g;
    AnalyticReport r = common_fields(ModelKind::Effective3QE, pr, Gamma3(g, p), v.bias3);
    r.mean_C = 4.0 * g * p / q * v.bias3;
    r.mean_Z = p * p / q * v.bias3;
    r.mean_N = 1.0;
    r.mean_S = nan_v;
    r.DeltaW_dot = r.Gamma * pr.Ev() * pr.Ev() * (1.0 - 1.5 * r.mean_C * r.mean_C);
    r.tur_ratio = tur_coherence_form(r.model, v.chi, v.Neq, r.mean_N, r.mean_C);
    return r;
}

AnalyticReport ness_for(ModelKind kind, const EngineParams& pr) {
    switch (kind) {
        case ModelKind::Reset2QE: return ness_2qe_reset(pr);
        case ModelKind::Local2QE: return ness_2qe_local(pr);
        case ModelKind::Effective3QE: return ness_3qe(pr);
        case ModelKind::Full3QE: {
            // weak-coupling oracle: the eliminated model at rate p_eff
            EngineParams eff = pr;
            eff.p = models::effective_rates_from_full(pr).p_eff;
            AnalyticReport r = ness_3qe(eff);
            r.model = ModelKind::Full3QE;
            return r;
        }
    }
    throw std::logic_error("ness_for: bad kind");
}

double bound_function(ModelKind kind, double r) {
    const double u = r * r;
    switch (kind) {
        case ModelKind::Reset2QE: {
            const double d = 1.0 + 2.0 * u;
            return 2.0 * u * (2.0 + u) / (d * d);
        }
        case ModelKind::Local2QE: {
            const double d = 1.0 + 4.0 * u;
            return 2.0 * u * (5.0 + 4.0 * u) / (d * d);
        }
        case ModelKind::Effective3QE:
        case ModelKind::Full3QE: {
            const double d = 1.0 + 8.0 * u;
            return 24.0 * u / (d * d);
        }
    }
    throw std::logic_error("bound_function: bad kind");
}

BoundMax bound_function_max(ModelKind kind) {
    switch (kind) {
        case ModelKind::Reset2QE: return {1.0, 2.0 / 3.0};
        case ModelKind::Local2QE: return {std::sqrt(5.0 / 12.0), 25.0 / 32.0};
        case ModelKind::Effective3QE:
        case ModelKind::Full3QE: return {0.5 / std::sqrt(2.0), 3.0 / 4.0};
    }
    throw std::logic_error("bound_function_max: bad kind");
}

double bound_curve(ModelKind kind, double chi) {
    const double t = std::tanh(chi / 2.0);
    return chi_coth_half(chi) * (1.0 - curve_coefficient(kind) * t * t);
}

CurveMin bound_curve_min(ModelKind kind, double chi_lo, double chi_hi, double chi_tol) {
    return golden_min([kind](double c) { return bound_curve(kind, c); }, chi_lo, chi_hi, chi_tol);
}

} // namespace qhe::closedform

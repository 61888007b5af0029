// Closed-form steady-state results and TUR bounds.
//
// Every quantity here is an independent analytic oracle for the simulator:
// nothing in this module integrates an equation of motion.
//
// Steady-state rate constants:
//   reset model:  Gamma2  = g^2 p / (p^2 + 2 g^2)
//   local model:  Gamma2L = 2 g^2 p / (p^2 + 4 g^2)
//   three-qubit:  Gamma3  = 4 g^2 p / (p^2 + 8 g^2)
// with work rate  W_dot = Gamma * Ev * bias  (bias = Z_eq for the two-qubit
// engines, tanh(chi/2) for the three-qubit engine) and entropy production
// Sigma_dot = chi * W_dot / Ev.
#pragma once

#include "qhe/params.hpp"

namespace qhe::closedform {

using models::EngineParams;
using models::ModelKind;

// chi * coth(chi/2), series branch near chi = 0 (limit value 2).
double chi_coth_half(double chi);

// ---- virtual-qubit equilibrium -----------------------------------------
struct VirtualQubit {
    double chi;    // beta1 E1 - beta2 E2
    double Tv;     // -Ev/chi (unbounded marker at chi = 0)
    double Neq;    // (1 - tanh(b1E1/2) tanh(b2E2/2)) / 2
    double Zeq;    // tanh(chi/2) * Neq
    double Seq;    // -(tanh(b1E1/2) + tanh(b2E2/2)) / 2
    double bias3;  // tanh(chi/2): three-qubit engine's equilibrium <sigma3_z>
};
VirtualQubit eq_virtual(const EngineParams& pr);

double Gamma2(double g, double p);
double Gamma2_local(double g, double p);
double Gamma3(double g, double p);

// ---- full steady-state report --------------------------------------------
struct AnalyticReport {
    ModelKind model;
    double Gamma;      // model rate constant at (g, p)
    double W_dot;      // load energy gain rate
    double DeltaW_dot; // load energy variance growth rate
    double Sigma_dot;  // entropy production rate
    double Q1_dot;     // heat from bath 1 (= -E1 W_dot / Ev)
    double Q2_dot;     // heat from bath 2 (= +E2 W_dot / Ev)
    double eta;        // W_dot / Q2_dot = 1 - E1/E2
    double eta_C;      // 1 - T1/T2
    double tur_ratio;  // DeltaW_dot * Sigma_dot / W_dot^2 (limit value at chi=0)
    double mean_C;     // NESS current
    double mean_Z;     // NESS bias (virtual qubit or sigma3_z)
    double mean_N;     // NESS virtual-transition norm (identically 1 for 3QE)
    double mean_S;     // NESS <S> (2QE models; NaN otherwise)
};

AnalyticReport ness_2qe_reset(const EngineParams& pr);
AnalyticReport ness_2qe_local(const EngineParams& pr);
AnalyticReport ness_3qe(const EngineParams& pr); // effective (p, g) parametrisation

// Dispatch on kind; Full3QE maps to ness_3qe at the adiabatically eliminated
// rate p_eff (weak-coupling oracle).
AnalyticReport ness_for(ModelKind kind, const EngineParams& pr);

// TUR ratio rewritten in the NESS means ("coherence form"):
//   reset:  chi coth(chi/2) (<N> - 3<C>^2) / Neq
//   local:  chi coth(chi/2) (<N> - 2<C>^2) / Neq
//   3QE:    chi coth(chi/2) (1   - 3/2 <C>^2)
// Must agree with AnalyticReport::tur_ratio to 1e-10.
double tur_coherence_form(ModelKind kind, double chi, double Neq, double meanN, double meanC);

// ---- coupling factor and lower-bound curves -------------------------------
// f(r), r = g/p, entering the bound chain
//   TUR(params) >= chi coth(chi/2) [1 - c(r) tanh^2(chi/2)] >= bound_curve(chi)
// with c(r) = f(r)/2 for the two-qubit engines (uses Z_eq <= tanh(chi/2)/2)
// and c(r) = f(r) for the three-qubit engine (exact in tanh(chi/2)):
//   reset: f = 2r^2(2+r^2)/(1+2r^2)^2      max 2/3   at r = 1
//   local: f = 2r^2(5+4r^2)/(1+4r^2)^2     max 25/32 at r = sqrt(5/12)
//   3QE:   f = 24 r^2/(1+8r^2)^2           max 3/4   at r = 1/(2 sqrt 2)
double bound_function(ModelKind kind, double r);

struct BoundMax {
    double r_star;
    double f_max;
};
BoundMax bound_function_max(ModelKind kind);

// chi coth(chi/2) [1 - c_max tanh^2(chi/2)], the coupling-optimised curve
double bound_curve(ModelKind kind, double chi);

struct CurveMin {
    double chi_star;
    double value;
};
// Golden-section minimum of bound_curve over chi in [chi_lo, chi_hi].
// The reset curve is monotone increasing, so its minimum sits at the left
// edge with limit value 2.
CurveMin bound_curve_min(ModelKind kind, double chi_lo = 1e-9, double chi_hi = 30.0,
                         double chi_tol = 1e-7);

} // namespace qhe::closedform

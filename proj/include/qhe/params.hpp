// Engine parameter set shared by the model builders, the closed-form
// oracle, and the evolution layer.
//
// Conventions: qubit 1 couples to the cold bath (T1), qubit 2 to the hot
// bath (T2); the load quantum is Ev = E2 - E1; the virtual-qubit affinity is
// chi = beta1*E1 - beta2*E2 (engine regime for chi > 0, refrigerator below).
#pragma once

#include "qhe/common.hpp"

#include <string>
#include <vector>

namespace qhe::models {

enum class ModelKind {
    Reset2QE,     // two qubits + load, reset (thermalisation-map) dissipators
    Local2QE,     // same but local Lindblad +/- channels only (no dephasing)
    Effective3QE, // single qubit + load, effective virtual bath
    Full3QE,      // three qubits + load, reset baths on qubits 1,2 at p_prime
};

const char* model_name(ModelKind kind);
ModelKind model_from_name(const std::string& name); // throws on unknown name

struct EngineParams {
    double E1 = 1.0;
    double E2 = 2.0;
    double beta1 = 3.0;
    double beta2 = 0.5;
    double p = 1.0;        // bath/reset rate (effective rate for Effective3QE)
    double g = 1.0;        // load coupling
    double k = 0.1;        // qubit-qubit coupling (Full3QE)
    double p_prime = 10.0; // physical reset rate (Full3QE)

    double Ev() const { return E2 - E1; }
    double chi() const { return beta1 * E1 - beta2 * E2; }
    // virtual temperature Tv = -Ev/chi; +/-inf marker at chi = 0
    double Tv() const;
    double Z1() const { return 2.0 * std::cosh(beta1 * E1 / 2.0); }
    double Z2() const { return 2.0 * std::cosh(beta2 * E2 / 2.0); }

    // reset-model Lindblad rates for qubit j (1 or 2) at bath rate `rate`:
    // gamma+- = rate * e^{-+ beta_j E_j / 2} / Z_j, gamma_z = rate / 4
    double gamma_plus(int j, double rate) const;
    double gamma_minus(int j, double rate) const;
    static double gamma_z(double rate) { return rate / 4.0; }

    // sanity: throws on nonpositive rates/couplings or Ev <= 0
    void validate(ModelKind kind) const;
    // non-fatal regime notes (refrigerator regime, weak-coupling violations)
    std::vector<std::string> warnings(ModelKind kind) const;
};

// Adiabatic elimination of the full three-qubit engine: the virtual bath
// rates seen by qubit 3 when k, g << p_prime,
//   gamma+- = k^2 e^{+-chi/2} / (p_prime Z1 Z2),   p_eff = gamma+ + gamma-.
struct EffectiveRates {
    double gamma_plus;
    double gamma_minus;
    double p_eff;
};
EffectiveRates effective_rates_from_full(const EngineParams& pr);

} // namespace qhe::models

// Engine model builders: Hamiltonians, dissipators, observables.
//
// Every model lives on a [qubits..., Ladder] layout (ladder last, hence
// fastest index).  Operators are kept in a structured form — sums of
//   (qubit-space block Q) (x) (rung shift s) with polynomial rung weight —
// which is the single source of truth: the dense/sparse reference path and
// the banded production integrator are both lowered from it.
#pragma once

#include "qhe/hilbert.hpp"
#include "qhe/params.hpp"

#include <map>
#include <string>

namespace qhe::models {

// <q', n+s | term | q, n> = Q[q',q] * (w0 + w1*n + w2*n^2), rows and columns
// clipped to the ladder window (so e.g. the lowering shift annihilates the
// bottom rung).  n is the physical rung number, not the array index.
struct OpTerm {
    Eigen::MatrixXcd q;
    int shift = 0;
    double w0 = 1.0, w1 = 0.0, w2 = 0.0;
};
using StructuredOp = std::vector<OpTerm>;

// Jump operator acting on the qubit space only (all engine baths are local).
struct Channel {
    Eigen::MatrixXcd q;
    double rate = 0.0;
    int bath = 0; // 1, 2: physical baths; 3: virtual/effective bath
};

struct ModelBundle {
    ModelKind kind;
    EngineParams params;
    hilbert::SpaceLayout layout;
    int n_qubits = 0;
    int qdim = 0;  // 2^n_qubits
    int rungs = 0; // ladder window size
    int n_min = 0;

    StructuredOp h0;         // free part (qubit splittings + load energy W)
    StructuredOp h_coupling; // resonant couplings (H_int, and V for Full3QE)
    std::vector<Channel> channels;
    std::map<std::string, StructuredOp> observables;

    // default initial state: per-factor blocks (thermal qubits / maximally
    // mixed undamped qubit / load at rung n = 0)
    std::vector<Eigen::MatrixXcd> init_blocks;

    // step-size and horizon rules:
    //   dt   = 0.05 / max_total_rate   (spectral-abscissa estimate)
    //   t_end = 20 / char_rate         (model rate constant Gamma)
    double max_total_rate = 0.0;
    double char_rate = 0.0;

    std::vector<std::string> warnings;

    hilbert::DensityState default_initial_state() const;
};

// Lower a structured operator to a sparse matrix on the bundle's layout.
hilbert::OperatorMatrix to_sparse(const StructuredOp& op, const ModelBundle& bundle);
// Full Hamiltonian (h0 + h_coupling), lowered.
hilbert::OperatorMatrix hamiltonian(const ModelBundle& bundle);

// ---- builders -------------------------------------------------------------
// Two qubits + load; reset dissipators (gamma+-, gamma_z = p/4 per qubit).
ModelBundle build_2qe_reset(const EngineParams& pr, int n_min = -40, int n_max = 40);
// Two qubits + load; local Lindblad dissipators (gamma+- only).
ModelBundle build_2qe_local(const EngineParams& pr, int n_min = -40, int n_max = 40);
// One qubit + load; virtual bath with gamma+/gamma- = e^chi, gamma+ + gamma- = p.
ModelBundle build_3qe_effective(const EngineParams& pr, int n_min = -40, int n_max = 40);
// Three qubits + load; reset baths at p_prime on qubits 1,2; qubit 3 undamped.
ModelBundle build_3qe_full(const EngineParams& pr, int n_min = -40, int n_max = 40);

ModelBundle build_model(ModelKind kind, const EngineParams& pr, int n_min = -40,
                        int n_max = 40);

// Half-width of a load window that keeps the work walk clear of the band
// edges over a horizon T, given gamma_t = char_rate * T: ballistic drift
// bound gamma_t plus a ten-sigma diffusive allowance and a fixed margin for
// coherence spread. The auto-resolved horizon has gamma_t = 20.
int suggested_load_window(double gamma_t);

} // namespace qhe::models

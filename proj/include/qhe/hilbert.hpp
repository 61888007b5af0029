// Composite Hilbert spaces for few-qubit + load systems.
//
// Index conventions (fixed; every operator and golden value in the test
// suite assumes them):
//  * Tensor factors are ordered first-factor-slowest: the full basis index
//    is built as idx = ((i0*d1 + i1)*d2 + i2)*...
//  * Qubit factors enumerate the excited state first: local index 0 is the
//    excited level |1> (sigma_z eigenvalue +1), local index 1 is the ground
//    level |0> (sigma_z eigenvalue -1).  Hence sigma_z = diag(+1,-1) and
//    sigma_plus = |1><0| is upper-triangular.
//  * Ladder factors enumerate rungs in ascending order, n_min first; the
//    lowering operator A maps |n> -> |n-1> with unit weight and annihilates
//    the bottom rung.  Fock oscillators start at n = 0 with the usual
//    sqrt(n) weights.
#pragma once

#include "qhe/common.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <optional>
#include <variant>
#include <vector>

namespace qhe::hilbert {

using OperatorMatrix = Eigen::SparseMatrix<cplx>;
using DenseMatrix = Eigen::MatrixXcd;

struct Qubit {};

// Truncated energy ladder with rungs n_min..n_max and level spacing Ev.
struct Ladder {
    int n_min = 0;
    int n_max = 0;
    double Ev = 1.0;
};

// Harmonic oscillator truncated at n_max (n = 0..n_max), frequency omega0.
struct FockOscillator {
    int n_max = 0;
    double omega0 = 1.0;
};

using Factor = std::variant<Qubit, Ladder, FockOscillator>;

int factor_dim(const Factor& f);

struct SpaceLayout {
    std::vector<Factor> factors;
    std::vector<int> dims;    // per-factor dimensions
    std::vector<int> strides; // first factor slowest
    int dim = 0;              // product dimension

    int num_factors() const { return static_cast<int>(factors.size()); }
};

SpaceLayout build_space(std::vector<Factor> factors);

// ---- local operators --------------------------------------------------
DenseMatrix sigma_z();
DenseMatrix sigma_plus();
DenseMatrix sigma_minus();
DenseMatrix qubit_identity();
// Thermal qubit state at dimensionless inverse temperature betaE:
// populations (e^{-betaE/2}, e^{+betaE/2})/Z in (excited, ground) order,
// so <sigma_z> = -tanh(betaE/2).
DenseMatrix thermal_qubit(double betaE);

// ---- embedding and composite operators ---------------------------------
// I (x) ... (x) local (x) ... (x) I with `local` acting on factor_idx.
// Throws std::invalid_argument on dimension mismatch or bad index.
OperatorMatrix embed(const DenseMatrix& local, int factor_idx, const SpaceLayout& layout);

OperatorMatrix identity_op(const SpaceLayout& layout);

// (W, A) for a Ladder factor: W = sum_n n*Ev |n><n| and A = sum |n-1><n|
// with A|n_min> = 0.  Throws if the factor is not a Ladder.
struct LadderOps {
    OperatorMatrix W;
    OperatorMatrix A;
};
LadderOps ladder_ops(const SpaceLayout& layout, int factor_idx);

// Embedded lowering operator for a FockOscillator factor (sqrt(n) weights),
// plus its number operator.
struct FockOps {
    OperatorMatrix a;
    OperatorMatrix n;
};
FockOps fock_ops(const SpaceLayout& layout, int factor_idx);

// Drop entries below 1e-15 in magnitude (sparse hygiene after products).
void prune(OperatorMatrix& m, double tol = 1e-15);

// ---- states -------------------------------------------------------------
struct DensityState {
    SpaceLayout layout;
    DenseMatrix rho;

    // trace within 1e-10 of one, hermiticity within 1e-12;
    // positivity (eigenvalues >= -tol) only when check_positivity is set.
    void validate(bool check_positivity = false, double positivity_tol = 1e-10) const;
};

// rho = factor_0 (x) factor_1 (x) ... ; each block must match its factor dim.
DensityState product_state(const SpaceLayout& layout, const std::vector<DenseMatrix>& blocks);

// <O> = Tr(O rho)
cplx expectation(const OperatorMatrix& op, const DensityState& state);
cplx expectation(const OperatorMatrix& op, const DenseMatrix& rho);

// Reduced state over the kept factors (ascending, non-empty, unique).
DensityState partial_trace(const DensityState& state, const std::vector<int>& keep);

} // namespace qhe::hilbert

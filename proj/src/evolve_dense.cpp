// Dense reference integrator.
//
// Straightforward RK4 on the full density matrix with Eigen matrix algebra.
// It accepts arbitrary initial states and exists as the independent
// counterpart to the banded-stencil path: same frames, same sampling
// contract, same bookkeeping, no shared generator code.  Costs grow with
// dim^3, so it is meant for small load windows (tests, cross-checks).

#include "qhe/evolve.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qhe::evolve {

namespace {

using Eigen::MatrixXcd;
using models::ModelBundle;

struct DenseChannel {
    MatrixXcd L;
    MatrixXcd M; // L^dag L
    double rate;
    int bath;
};

struct DenseProgram {
    MatrixXcd h_comm; // Hamiltonian entering the commutator (frame-dependent)
    MatrixXcd h_full; // physical Hamiltonian, for heat currents
    std::vector<DenseChannel> channels;
    std::vector<int> baths; // distinct ids, ascending
    std::map<std::string, MatrixXcd> obs;
    std::vector<int> leak_idx; // diagonal indices of the outer rung bands
    int dim = 0;
};

DenseProgram build(const ModelBundle& bundle, Frame frame) {
    DenseProgram prog;
    prog.dim = static_cast<int>(bundle.layout.dim);
    auto lower = [&](const models::StructuredOp& op) {
        return MatrixXcd(models::to_sparse(op, bundle));
    };
    const MatrixXcd h0 = lower(bundle.h0);
    const MatrixXcd hc = lower(bundle.h_coupling);
    prog.h_full = h0 + hc;
    prog.h_comm = frame == Frame::Lab ? prog.h_full : hc;
    for (const auto& ch : bundle.channels) {
        models::StructuredOp wrap{models::OpTerm{ch.q, 0, 1.0, 0.0, 0.0}};
        MatrixXcd L = lower(wrap);
        MatrixXcd M = L.adjoint() * L;
        prog.channels.push_back({std::move(L), std::move(M), ch.rate, ch.bath});
        if (std::find(prog.baths.begin(), prog.baths.end(), ch.bath) == prog.baths.end())
            prog.baths.push_back(ch.bath);
    }
    std::sort(prog.baths.begin(), prog.baths.end());
    for (const auto& [name, op] : bundle.observables) prog.obs[name] = lower(op);

    const int R = bundle.rungs;
    const int band = std::min(5, std::max(1, R / 6));
    for (int q = 0; q < bundle.qdim; ++q)
        for (int i = 0; i < R; ++i)
            if (i < band || i >= R - band) prog.leak_idx.push_back(q * R + i);
    return prog;
}

MatrixXcd dissipator(const DenseProgram& prog, int bath, const MatrixXcd& rho) {
    MatrixXcd out = MatrixXcd::Zero(prog.dim, prog.dim);
    for (const auto& ch : prog.channels) {
        if (bath >= 0 && ch.bath != bath) continue;
        out.noalias() += ch.rate * (ch.L * rho * ch.L.adjoint());
        out.noalias() -= (0.5 * ch.rate) * (ch.M * rho + rho * ch.M);
    }
    return out;
}

MatrixXcd rhs(const DenseProgram& prog, const MatrixXcd& rho) {
    const cplx mi(0.0, -1.0);
    MatrixXcd out = mi * (prog.h_comm * rho - rho * prog.h_comm);
    out += dissipator(prog, -1, rho);
    return out;
}

// Tr(O rho) without forming the product
cplx tr_prod(const MatrixXcd& op, const MatrixXcd& rho) {
    return (op.transpose().cwiseProduct(rho)).sum();
}

[[noreturn]] void abort_integration(const ModelBundle& bundle, double t, const std::string& what) {
    std::ostringstream os;
    os << model_name(bundle.kind) << " integration aborted at t=" << t << ": " << what;
    throw NumericalAbort(os.str());
}

void check_positive(const ModelBundle& bundle, const MatrixXcd& rho, double t) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (rho + rho.adjoint()),
                                                Eigen::EigenvaluesOnly);
    const double lam = es.eigenvalues().minCoeff();
    if (lam < -1e-8) abort_integration(bundle, t, "negative eigenvalue " + std::to_string(lam));
}

} // namespace

ObservableSeries integrate_dense(const models::ModelBundle& bundle, const IntegrationConfig& cfg0,
                                 const hilbert::DensityState& rho0) {
    const IntegrationConfig cfg = IntegrationConfig::resolve(bundle, cfg0);
    if (rho0.layout.dim != bundle.layout.dim)
        throw std::invalid_argument("initial state dimension does not match the model space");
    rho0.validate();
    const DenseProgram prog = build(bundle, cfg.frame);

    MatrixXcd y = rho0.rho;
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-12)));
    const double dt = cfg.t_end / static_cast<double>(steps);
    const long stride =
        cfg.sample_stride > 0 ? cfg.sample_stride : std::max<long>(1, steps / 4000);

    ObservableSeries series;
    series.dt = dt;
    series.t_end = cfg.t_end;
    series.steps = steps;
    series.frame = cfg.frame;
    for (const auto& kv : prog.obs) series.obs[kv.first];
    for (int b : prog.baths) series.obs["Qdot" + std::to_string(b)];

    auto sample = [&](long step) {
        const double t = step * dt;
        const cplx tr = y.trace();
        if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag()))
            abort_integration(bundle, t, "state is no longer finite");
        const double trace_dev = std::abs(tr - cplx(1.0, 0.0));
        series.max_trace_dev = std::max(series.max_trace_dev, trace_dev);
        if (trace_dev > cfg.trace_tol)
            abort_integration(bundle, t, "trace drift " + std::to_string(trace_dev));
        double leak = 0.0;
        for (int idx : prog.leak_idx) leak += y(idx, idx).real();
        leak = std::abs(leak);
        series.max_leak = std::max(series.max_leak, leak);
        if (leak > cfg.leak_tol)
            abort_integration(bundle, t,
                              "boundary rung population " + std::to_string(leak) +
                                  "; widen the load window");
        series.max_herm_dev =
            std::max(series.max_herm_dev, (y - y.adjoint().eval()).cwiseAbs().maxCoeff());
        series.t.push_back(t);
        for (const auto& [name, op] : prog.obs) {
            const cplx v = tr_prod(op, y);
            series.max_imag_dev = std::max(series.max_imag_dev, std::abs(v.imag()));
            series.obs[name].push_back(v.real());
        }
        for (int b : prog.baths) {
            const MatrixXcd db = dissipator(prog, b, y);
            series.obs["Qdot" + std::to_string(b)].push_back(tr_prod(prog.h_full, db).real());
        }
    };

    if (cfg.check_positivity) check_positive(bundle, y, 0.0);
    sample(0);
    MatrixXcd k1, k2, k3, k4;
    for (long step = 1; step <= steps; ++step) {
        k1 = rhs(prog, y);
        k2 = rhs(prog, y + (0.5 * dt) * k1);
        k3 = rhs(prog, y + (0.5 * dt) * k2);
        k4 = rhs(prog, y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (step % stride == 0 || step == steps) sample(step);
    }
    if (cfg.check_positivity) check_positive(bundle, y, cfg.t_end);
    return series;
}

ObservableSeries integrate_dense(const models::ModelBundle& bundle, const IntegrationConfig& cfg) {
    return integrate_dense(bundle, cfg, bundle.default_initial_state());
}

} // namespace qhe::evolve

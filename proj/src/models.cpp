#include "qhe/models.hpp"

#include "qhe/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qhe::models {

using hilbert::DenseMatrix;

const char* model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Reset2QE: return "2qe-reset";
        case ModelKind::Local2QE: return "2qe-local";
        case ModelKind::Effective3QE: return "3qe-effective";
        case ModelKind::Full3QE: return "3qe-full";
    }
    return "?";
}

ModelKind model_from_name(const std::string& name) {
    if (name == "2qe-reset") return ModelKind::Reset2QE;
    if (name == "2qe-local") return ModelKind::Local2QE;
    if (name == "3qe-effective") return ModelKind::Effective3QE;
    if (name == "3qe-full") return ModelKind::Full3QE;
    throw std::invalid_argument("unknown model: " + name);
}

double EngineParams::Tv() const {
    const double c = chi();
    if (c == 0.0) return std::numeric_limits<double>::infinity();
    return -Ev() / c;
}

double EngineParams::gamma_plus(int j, double rate) const {
    const double bE = (j == 1) ? beta1 * E1 : beta2 * E2;
    const double Z = (j == 1) ? Z1() : Z2();
    return rate * std::exp(-bE / 2.0) / Z;
}

double EngineParams::gamma_minus(int j, double rate) const {
    const double bE = (j == 1) ? beta1 * E1 : beta2 * E2;
    const double Z = (j == 1) ? Z1() : Z2();
    return rate * std::exp(+bE / 2.0) / Z;
}

void EngineParams::validate(ModelKind kind) const {
    auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
    if (!(E1 > 0.0)) fail("EngineParams: E1 must be positive");
    if (!(E2 > E1)) fail("EngineParams: need E2 > E1 (Ev = E2 - E1 > 0)");
    if (!(beta1 > 0.0) || !(beta2 > 0.0)) fail("EngineParams: inverse temperatures must be positive");
    if (!(g > 0.0)) fail("EngineParams: g must be positive");
    if (kind == ModelKind::Full3QE) {
        if (!(p_prime > 0.0)) fail("EngineParams: p_prime must be positive");
        if (!(k > 0.0)) fail("EngineParams: k must be positive");
    } else {
        if (!(p > 0.0)) fail("EngineParams: p must be positive");
    }
}

std::vector<std::string> EngineParams::warnings(ModelKind kind) const {
    std::vector<std::string> w;
    char buf[160];
    if (chi() < 0.0) {
        std::snprintf(buf, sizeof buf,
                      "chi = %.6g < 0: refrigerator regime (work flows into the load reservoir)",
                      chi());
        w.emplace_back(buf);
    }
    if (kind == ModelKind::Full3QE) {
        if (k / p_prime > 0.1) {
            std::snprintf(buf, sizeof buf,
                          "k/p' = %.3g > 0.1: adiabatic elimination of qubits 1,2 is inaccurate",
                          k / p_prime);
            w.emplace_back(buf);
        }
        if (g / p_prime > 0.1) {
            std::snprintf(buf, sizeof buf,
                          "g/p' = %.3g > 0.1: adiabatic elimination of qubits 1,2 is inaccurate",
                          g / p_prime);
            w.emplace_back(buf);
        }
    }
    return w;
}

EffectiveRates effective_rates_from_full(const EngineParams& pr) {
    const double denom = pr.p_prime * pr.Z1() * pr.Z2();
    const double k2 = pr.k * pr.k;
    EffectiveRates r;
    r.gamma_plus = k2 * std::exp(+pr.chi() / 2.0) / denom;
    r.gamma_minus = k2 * std::exp(-pr.chi() / 2.0) / denom;
    r.p_eff = r.gamma_plus + r.gamma_minus;
    return r;
}

namespace {

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c)
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
}

// I (x) ... (x) local (x) ... (x) I over n_qubits factors
DenseMatrix qubit_op(int n_qubits, int which, const DenseMatrix& local) {
    DenseMatrix acc = DenseMatrix::Ones(1, 1);
    for (int i = 0; i < n_qubits; ++i)
        acc = kron(acc, i == which ? local : hilbert::qubit_identity());
    return acc;
}

constexpr cplx iu{0.0, 1.0};

struct Frame {
    ModelBundle b;
    int nq;

    Frame(ModelKind kind, const EngineParams& pr, int n_qubits, int n_min, int n_max) {
        pr.validate(kind);
        if (n_max - n_min < 10)
            throw std::invalid_argument("build_model: ladder window too small");
        if (n_min > 0 || n_max < 0)
            throw std::invalid_argument("build_model: ladder window must contain rung 0");
        nq = n_qubits;
        b.kind = kind;
        b.params = pr;
        b.n_qubits = n_qubits;
        b.qdim = 1 << n_qubits;
        b.n_min = n_min;
        b.rungs = n_max - n_min + 1;
        std::vector<hilbert::Factor> factors;
        for (int i = 0; i < n_qubits; ++i) factors.emplace_back(hilbert::Qubit{});
        factors.emplace_back(hilbert::Ladder{n_min, n_max, pr.Ev()});
        b.layout = hilbert::build_space(std::move(factors));
        b.warnings = pr.warnings(kind);
    }

    DenseMatrix sz(int j) const { return qubit_op(nq, j, hilbert::sigma_z()); }
    DenseMatrix sp(int j) const { return qubit_op(nq, j, hilbert::sigma_plus()); }
    DenseMatrix sm(int j) const { return qubit_op(nq, j, hilbert::sigma_minus()); }
    DenseMatrix qid() const { return DenseMatrix::Identity(b.qdim, b.qdim); }

    // qubit splittings + load energy; labels j are 0-based factor indices
    void set_h0(const std::vector<double>& E) {
        DenseMatrix q = DenseMatrix::Zero(b.qdim, b.qdim);
        for (int j = 0; j < nq; ++j) q += 0.5 * E[j] * sz(j);
        b.h0.push_back({q, 0, 1.0, 0.0, 0.0});
        b.h0.push_back({qid(), 0, 0.0, b.params.Ev(), 0.0}); // W = sum_n n Ev
    }

    void add_reset_channels(int j, double rate, bool with_dephasing) {
        const EngineParams& pr = b.params;
        b.channels.push_back({sp(j), pr.gamma_plus(j + 1, rate), j + 1});
        b.channels.push_back({sm(j), pr.gamma_minus(j + 1, rate), j + 1});
        if (with_dephasing) b.channels.push_back({sz(j), EngineParams::gamma_z(rate), j + 1});
    }

    void add_common_observables() {
        b.observables["W"] = {{qid(), 0, 0.0, b.params.Ev(), 0.0}};
        b.observables["W2"] = {{qid(), 0, 0.0, 0.0, b.params.Ev() * b.params.Ev()}};
        b.observables["Hint"] = b.h_coupling;
    }
};

} // namespace

hilbert::DensityState ModelBundle::default_initial_state() const {
    return hilbert::product_state(layout, init_blocks);
}

hilbert::OperatorMatrix to_sparse(const StructuredOp& op, const ModelBundle& bundle) {
    const int R = bundle.rungs;
    std::vector<Eigen::Triplet<cplx>> trips;
    for (const OpTerm& t : op) {
        if (t.q.rows() != bundle.qdim || t.q.cols() != bundle.qdim)
            throw std::invalid_argument("to_sparse: qubit block dimension mismatch");
        for (int qr = 0; qr < bundle.qdim; ++qr)
            for (int qc = 0; qc < bundle.qdim; ++qc) {
                const cplx v = t.q(qr, qc);
                if (v == cplx(0.0, 0.0)) continue;
                for (int i = 0; i < R; ++i) {
                    const int irow = i + t.shift;
                    if (irow < 0 || irow >= R) continue;
                    const double n = bundle.n_min + i;
                    const double w = t.w0 + t.w1 * n + t.w2 * n * n;
                    if (w == 0.0) continue;
                    trips.emplace_back(qr * R + irow, qc * R + i, v * w);
                }
            }
    }
    hilbert::OperatorMatrix out(bundle.layout.dim, bundle.layout.dim);
    out.setFromTriplets(trips.begin(), trips.end());
    hilbert::prune(out);
    return out;
}

hilbert::OperatorMatrix hamiltonian(const ModelBundle& bundle) {
    StructuredOp h = bundle.h0;
    h.insert(h.end(), bundle.h_coupling.begin(), bundle.h_coupling.end());
    return to_sparse(h, bundle);
}

namespace {

ModelBundle build_2qe(ModelKind kind, const EngineParams& pr, int n_min, int n_max) {
    Frame f(kind, pr, 2, n_min, n_max);
    ModelBundle& b = f.b;

    f.set_h0({pr.E1, pr.E2});
    // H_int = g (s1+ s2- A^dag + s1- s2+ A): the virtual de-excitation of
    // qubit 2 into qubit 1 pumps one quantum into the load.
    const DenseMatrix up = f.sp(0) * f.sm(1);   // s1+ s2-
    const DenseMatrix down = f.sm(0) * f.sp(1); // s1- s2+
    b.h_coupling.push_back({pr.g * up, +1});
    b.h_coupling.push_back({pr.g * down, -1});

    f.add_reset_channels(0, pr.p, kind == ModelKind::Reset2QE);
    f.add_reset_channels(1, pr.p, kind == ModelKind::Reset2QE);

    f.add_common_observables();
    // C = i (s1- s2+ A - s1+ s2- A^dag): work current, dW/dt = g Ev <C>
    b.observables["C"] = {{iu * down, -1}, {-iu * up, +1}};
    b.observables["Z"] = {{0.5 * (f.sz(1) - f.sz(0)), 0}};
    b.observables["N"] = {{0.5 * (f.qid() - f.sz(0) * f.sz(1)), 0}};
    b.observables["S"] = {{0.5 * (f.sz(0) + f.sz(1)), 0}};

    b.init_blocks = {hilbert::thermal_qubit(pr.beta1 * pr.E1),
                     hilbert::thermal_qubit(pr.beta2 * pr.E2),
                     DenseMatrix::Zero(b.rungs, b.rungs)};
    b.init_blocks.back()(-n_min, -n_min) = 1.0; // load starts at rung n = 0

    // per-qubit relaxation at exactly p for the reset map; the local model's
    // slowest element also relaxes at p (populations)
    b.max_total_rate = 2.0 * pr.p + 2.0 * pr.g;
    b.char_rate = (kind == ModelKind::Reset2QE) ? closedform::Gamma2(pr.g, pr.p)
                                                : closedform::Gamma2_local(pr.g, pr.p);
    return b;
}

} // namespace

ModelBundle build_2qe_reset(const EngineParams& pr, int n_min, int n_max) {
    return build_2qe(ModelKind::Reset2QE, pr, n_min, n_max);
}

ModelBundle build_2qe_local(const EngineParams& pr, int n_min, int n_max) {
    return build_2qe(ModelKind::Local2QE, pr, n_min, n_max);
}

ModelBundle build_3qe_effective(const EngineParams& pr, int n_min, int n_max) {
    Frame f(ModelKind::Effective3QE, pr, 1, n_min, n_max);
    ModelBundle& b = f.b;

    f.set_h0({pr.Ev()});
    // H_int = g (s3- A^dag + s3+ A)
    b.h_coupling.push_back({pr.g * f.sm(0), +1});
    b.h_coupling.push_back({pr.g * f.sp(0), -1});

    // virtual bath: gamma+/gamma- = e^chi with gamma+ + gamma- = p
    const double chi = pr.chi();
    const double gp = pr.p / (1.0 + std::exp(-chi));
    const double gm = pr.p / (1.0 + std::exp(+chi));
    b.channels.push_back({f.sp(0), gp, 3});
    b.channels.push_back({f.sm(0), gm, 3});

    f.add_common_observables();
    b.observables["C"] = {{iu * f.sp(0), -1}, {-iu * f.sm(0), +1}};
    b.observables["sigma3z"] = {{f.sz(0), 0}};

    // qubit 3 starts maximally mixed (close to its quasi-stationary bias for
    // weak virtual baths); load at rung 0
    b.init_blocks = {0.5 * hilbert::qubit_identity(), DenseMatrix::Zero(b.rungs, b.rungs)};
    b.init_blocks.back()(-n_min, -n_min) = 1.0;

    b.max_total_rate = pr.p + 2.0 * pr.g;
    b.char_rate = closedform::Gamma3(pr.g, pr.p);
    return b;
}

ModelBundle build_3qe_full(const EngineParams& pr, int n_min, int n_max) {
    Frame f(ModelKind::Full3QE, pr, 3, n_min, n_max);
    ModelBundle& b = f.b;

    f.set_h0({pr.E1, pr.E2, pr.Ev()}); // qubit 3 resonant with the load: E3 = Ev
    // V = k (s1+ s2- s3+ + s1- s2+ s3-): virtual qubit <-> qubit 3
    const DenseMatrix vup = f.sp(0) * f.sm(1) * f.sp(2);
    b.h_coupling.push_back({pr.k * vup, 0});
    b.h_coupling.push_back({pr.k * vup.adjoint(), 0});
    // H_int = g (s3- A^dag + s3+ A)
    b.h_coupling.push_back({pr.g * f.sm(2), +1});
    b.h_coupling.push_back({pr.g * f.sp(2), -1});

    f.add_reset_channels(0, pr.p_prime, true);
    f.add_reset_channels(1, pr.p_prime, true);

    f.add_common_observables();
    b.observables["C"] = {{iu * f.sp(2), -1}, {-iu * f.sm(2), +1}};
    b.observables["sigma3z"] = {{f.sz(2), 0}};
    b.observables["V"] = {{pr.k * vup, 0}, {pr.k * vup.adjoint(), 0}};
    b.observables["Z"] = {{0.5 * (f.sz(1) - f.sz(0)), 0}};

    b.init_blocks = {hilbert::thermal_qubit(pr.beta1 * pr.E1),
                     hilbert::thermal_qubit(pr.beta2 * pr.E2),
                     0.5 * hilbert::qubit_identity(),
                     DenseMatrix::Zero(b.rungs, b.rungs)};
    b.init_blocks.back()(-n_min, -n_min) = 1.0;

    b.max_total_rate = 2.0 * pr.p_prime + 2.0 * (pr.k + pr.g);
    // horizon is set by the slow load drift Gamma3(g, p'), reached once the
    // fast reset baths have projected qubits 1,2 (rate ~ p')
    b.char_rate = closedform::Gamma3(pr.g, pr.p_prime);
    return b;
}

ModelBundle build_model(ModelKind kind, const EngineParams& pr, int n_min, int n_max) {
    switch (kind) {
        case ModelKind::Reset2QE: return build_2qe_reset(pr, n_min, n_max);
        case ModelKind::Local2QE: return build_2qe_local(pr, n_min, n_max);
        case ModelKind::Effective3QE: return build_3qe_effective(pr, n_min, n_max);
        case ModelKind::Full3QE: return build_3qe_full(pr, n_min, n_max);
    }
    throw std::logic_error("build_model: bad kind");
}

int suggested_load_window(double gamma_t) {
    const double gt = std::max(gamma_t, 0.0);
    return static_cast<int>(std::ceil(gt + 10.0 * std::sqrt(gt))) + 15;
}

} // namespace qhe::models

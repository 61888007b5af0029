// Banded-stencil integrator.
//
// The engine Lindbladians conserve a coherence grading: every Hamiltonian
// term shifts the load rung and flips qubits in a fixed combination, and
// every dissipator acts on the qubit factors alone.  Starting from a
// diagonal product state the density matrix therefore lives on a small set
// of components (row-qubit-state, col-qubit-state, rung offset), each of
// which is a single R-vector over the load window.  The set is discovered
// here by closure under the generator, and the generator itself is compiled
// into "instructions" out[dst][i] += c * in[src][i + off] acting on those
// vectors, which RK4 then replays through the runtime-selected kernels.
//
// Index conventions (see hilbert.hpp): a component (qr, qc, dn) stores
// x[i] = rho[(qr, i + dn), (qc, i)] indexed by the column rung i, so dn is
// the row-minus-column rung offset and stays fixed along the vector.

#include "qhe/evolve.hpp"
#include "qhe/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace qhe::evolve {

namespace {

using hilbert::DenseMatrix;
using models::ModelBundle;

constexpr double kCoefDrop = 1e-15; // relative drop tolerance for merged terms
constexpr int kMaxAbsDn = 8;        // closure safety cap on rung offsets
constexpr int kMaxComps = 4096;     // closure safety cap on component count

struct Comp {
    int qr, qc, dn;
};

struct Instr {
    int out0;  // flat index of first written element (comp * R + i0)
    int in0;   // flat index of first read element (comp * R + i0 + off)
    int n;     // run length
    cplx c;
};

struct Reduction {
    int base; // flat index of first element read
    int n;
    cplx coef;
    std::vector<double> w; // weight per element (physical-rung polynomial)
};

struct HermPair {
    int cbase, pbase, n; // x[cbase + j] should equal conj(x[pbase + j])
};

// one Hamiltonian term with constant weight: coefficient matrix on the qubit
// factor, rung shift s (<n+s| term |n>)
struct HamTerm {
    DenseMatrix q;
    int s;
};

struct SectorProgram {
    int qdim = 0, R = 0, ncomp = 0, n_min = 0;
    std::vector<Comp> comps;
    std::map<std::tuple<int, int, int>, int> index;
    std::vector<Instr> evo;                          // full generator
    std::map<int, std::vector<Instr>> bath_instr;    // dissipator of one bath
    std::map<std::string, std::vector<Reduction>> obs;
    std::vector<Reduction> h_red; // Tr[H .] with the physical H, for heat
    std::vector<int> diag_comps;
    std::vector<std::pair<int, int>> leak_ranges; // (flat base, length)
    std::vector<HermPair> herm_pairs;
    int max_abs_dn = 0;
    std::size_t total() const { return static_cast<std::size_t>(ncomp) * R; }
};

bool nonzero(const cplx& v) { return std::abs(v) > 0.0; }

// Hamiltonian terms entering the commutator for the chosen frame.  The free
// Hamiltonian splits into a constant qubit part (handled as a regular s = 0
// term) and a rung-linear load part handled separately: its commutator is
// diagonal per component with constant coefficient -i * w1 * dn.
struct FrameTerms {
    std::vector<HamTerm> ham;
    double rung_linear_w1 = 0.0;
};

FrameTerms frame_terms(const ModelBundle& bundle, Frame frame) {
    FrameTerms ft;
    for (const auto& t : bundle.h_coupling) {
        if (t.w1 != 0.0 || t.w2 != 0.0)
            throw std::logic_error("coupling terms must have constant rung weight");
        ft.ham.push_back({t.q * t.w0, t.shift});
    }
    if (frame == Frame::Lab) {
        for (const auto& t : bundle.h0) {
            if (t.w2 != 0.0) throw std::logic_error("free Hamiltonian has no quadratic rung term");
            if (t.w1 != 0.0) {
                if (t.shift != 0 || (t.q - DenseMatrix::Identity(t.q.rows(), t.q.cols())).norm() > 1e-14)
                    throw std::logic_error("rung-linear term must be the identity at shift 0");
                ft.rung_linear_w1 += t.w1;
            }
            if (t.w0 != 0.0) ft.ham.push_back({t.q * t.w0, t.shift});
        }
    }
    return ft;
}

std::vector<Comp> close_components(const ModelBundle& bundle, const FrameTerms& ft) {
    std::set<std::tuple<int, int, int>> seen;
    std::vector<Comp> todo;
    const int qdim = bundle.qdim;
    for (int q = 0; q < qdim; ++q) {
        seen.insert({q, q, 0});
        todo.push_back({q, q, 0});
    }
    auto visit = [&](int qr, int qc, int dn) {
        if (std::abs(dn) > kMaxAbsDn)
            throw std::logic_error("component closure exceeded the rung-offset cap; "
                                   "generator is not band-conserving");
        if (seen.insert({qr, qc, dn}).second) {
            if (static_cast<int>(seen.size()) > kMaxComps)
                throw std::logic_error("component closure exceeded the size cap");
            todo.push_back({qr, qc, dn});
        }
    };
    std::vector<Eigen::MatrixXcd> antis;
    antis.reserve(bundle.channels.size());
    for (const auto& ch : bundle.channels) antis.push_back(ch.q.adjoint() * ch.q);
    while (!todo.empty()) {
        const Comp s = todo.back();
        todo.pop_back();
        for (const auto& h : ft.ham) {
            for (int qr = 0; qr < qdim; ++qr)
                if (nonzero(h.q(qr, s.qr))) visit(qr, s.qc, s.dn + h.s);
            for (int qc = 0; qc < qdim; ++qc)
                if (nonzero(h.q(s.qc, qc))) visit(s.qr, qc, s.dn + h.s);
        }
        for (std::size_t c = 0; c < bundle.channels.size(); ++c) {
            const auto& Q = bundle.channels[c].q;
            const auto& M = antis[c];
            for (int qr = 0; qr < qdim; ++qr) {
                if (nonzero(Q(qr, s.qr)))
                    for (int qc = 0; qc < qdim; ++qc)
                        if (nonzero(Q(qc, s.qc))) visit(qr, qc, s.dn);
                if (nonzero(M(qr, s.qr))) visit(qr, s.qc, s.dn);
            }
            for (int qc = 0; qc < qdim; ++qc)
                if (nonzero(M(s.qc, qc))) visit(s.qr, qc, s.dn);
        }
    }
    std::vector<Comp> comps;
    comps.reserve(seen.size());
    for (const auto& [qr, qc, dn] : seen) comps.push_back({qr, qc, dn});
    std::sort(comps.begin(), comps.end(), [](const Comp& a, const Comp& b) {
        return std::tie(a.dn, a.qr, a.qc) < std::tie(b.dn, b.qr, b.qc);
    });
    return comps;
}

// emit merged instructions for -i[ham, .] (if any) plus the dissipators of
// the given channel subset
std::vector<Instr> emit_instructions(const SectorProgram& prog, const ModelBundle& bundle,
                                     const std::vector<HamTerm>& ham, double rung_linear_w1,
                                     const std::vector<std::size_t>& channel_ids) {
    const int qdim = prog.qdim, R = prog.R;
    std::map<std::tuple<int, int, int>, cplx> raw; // (dst, src, off) -> coef
    auto add = [&](int dst, int qr, int qc, int dn, int off, cplx coef) {
        auto it = prog.index.find({qr, qc, dn});
        if (it == prog.index.end()) return; // source outside the invariant set: identically zero
        raw[{dst, it->second, off}] += coef;
    };
    const cplx I(0.0, 1.0);
    for (int d = 0; d < prog.ncomp; ++d) {
        const Comp& dc = prog.comps[d];
        for (const auto& h : ham) {
            for (int q = 0; q < qdim; ++q) {
                // left product: -i (T rho)
                if (nonzero(h.q(dc.qr, q))) add(d, q, dc.qc, dc.dn - h.s, 0, -I * h.q(dc.qr, q));
                // right product: +i (rho T)
                if (nonzero(h.q(q, dc.qc))) add(d, dc.qr, q, dc.dn - h.s, h.s, I * h.q(q, dc.qc));
            }
        }
        if (rung_linear_w1 != 0.0 && dc.dn != 0)
            add(d, dc.qr, dc.qc, dc.dn, 0, -I * rung_linear_w1 * static_cast<double>(dc.dn));
        for (std::size_t c : channel_ids) {
            const auto& ch = bundle.channels[c];
            const Eigen::MatrixXcd M = ch.q.adjoint() * ch.q;
            for (int a = 0; a < qdim; ++a) {
                if (nonzero(ch.q(dc.qr, a)))
                    for (int b = 0; b < qdim; ++b)
                        if (nonzero(ch.q(dc.qc, b)))
                            add(d, a, b, dc.dn, 0,
                                ch.rate * ch.q(dc.qr, a) * std::conj(ch.q(dc.qc, b)));
                if (nonzero(M(dc.qr, a))) add(d, a, dc.qc, dc.dn, 0, -0.5 * ch.rate * M(dc.qr, a));
                if (nonzero(M(a, dc.qc))) add(d, dc.qr, a, dc.dn, 0, -0.5 * ch.rate * M(a, dc.qc));
            }
        }
    }
    double maxc = 0.0;
    for (const auto& [key, c] : raw) maxc = std::max(maxc, std::abs(c));
    std::vector<Instr> out;
    out.reserve(raw.size());
    for (const auto& [key, c] : raw) {
        if (std::abs(c) <= kCoefDrop * maxc) continue;
        const auto [dst, src, off] = key;
        const int ddn = prog.comps[dst].dn, sdn = prog.comps[src].dn;
        // every referenced rung index must lie inside the window; this
        // reproduces the truncation of the shift operators exactly
        const int i0 = std::max({0, -ddn, -off, -off - sdn});
        const int i1 = std::min({R - 1, R - 1 - ddn, R - 1 - off, R - 1 - off - sdn});
        if (i0 > i1) continue;
        out.push_back({dst * R + i0, src * R + i0 + off, i1 - i0 + 1, c});
    }
    return out;
}

std::vector<Reduction> build_reductions(const SectorProgram& prog, const models::StructuredOp& op) {
    std::vector<Reduction> reds;
    const int R = prog.R;
    for (const auto& t : op) {
        for (int row = 0; row < prog.qdim; ++row) {
            for (int col = 0; col < prog.qdim; ++col) {
                if (!nonzero(t.q(row, col))) continue;
                // Tr(T rho) term reads rho[(col, n), (row, n + s)]: that is
                // component (col, row, -s) at column index i = n + s - n_min
                auto it = prog.index.find({col, row, -t.shift});
                if (it == prog.index.end()) continue;
                const int i0 = std::max(0, t.shift);
                const int i1 = std::min(R - 1, R - 1 + t.shift);
                if (i0 > i1) continue;
                Reduction r;
                r.base = it->second * R + i0;
                r.n = i1 - i0 + 1;
                r.coef = t.q(row, col);
                r.w.resize(r.n);
                for (int i = i0; i <= i1; ++i) {
                    const double n = prog.n_min + i - t.shift;
                    r.w[i - i0] = t.w0 + t.w1 * n + t.w2 * n * n;
                }
                reds.push_back(std::move(r));
            }
        }
    }
    return reds;
}

SectorProgram compile(const ModelBundle& bundle, Frame frame) {
    SectorProgram prog;
    prog.qdim = bundle.qdim;
    prog.R = bundle.rungs;
    prog.n_min = bundle.n_min;
    const FrameTerms ft = frame_terms(bundle, frame);
    prog.comps = close_components(bundle, ft);
    prog.ncomp = static_cast<int>(prog.comps.size());
    for (int i = 0; i < prog.ncomp; ++i) {
        const Comp& c = prog.comps[i];
        prog.index[{c.qr, c.qc, c.dn}] = i;
        prog.max_abs_dn = std::max(prog.max_abs_dn, std::abs(c.dn));
        if (c.qr == c.qc && c.dn == 0) prog.diag_comps.push_back(i);
    }
    // the set must be closed under hermitian conjugation for the state to
    // stay hermitian; record the pairs for the runtime defect check
    for (int i = 0; i < prog.ncomp; ++i) {
        const Comp& c = prog.comps[i];
        auto it = prog.index.find({c.qc, c.qr, -c.dn});
        if (it == prog.index.end())
            throw std::logic_error("component closure is not conjugation symmetric");
        const int p = it->second;
        if (p < i) continue;
        const int i0 = std::max(0, -c.dn);
        const int i1 = std::min(prog.R - 1, prog.R - 1 - c.dn);
        if (i0 > i1) continue;
        prog.herm_pairs.push_back({i * prog.R + i0, p * prog.R + i0 + c.dn, i1 - i0 + 1});
    }

    std::vector<std::size_t> all_channels(bundle.channels.size());
    for (std::size_t c = 0; c < all_channels.size(); ++c) all_channels[c] = c;
    prog.evo = emit_instructions(prog, bundle, ft.ham, ft.rung_linear_w1, all_channels);

    std::map<int, std::vector<std::size_t>> by_bath;
    for (std::size_t c = 0; c < bundle.channels.size(); ++c)
        by_bath[bundle.channels[c].bath].push_back(c);
    for (const auto& [bath, ids] : by_bath)
        prog.bath_instr[bath] = emit_instructions(prog, bundle, {}, 0.0, ids);

    for (const auto& [name, op] : bundle.observables) prog.obs[name] = build_reductions(prog, op);

    models::StructuredOp h_full = bundle.h0;
    h_full.insert(h_full.end(), bundle.h_coupling.begin(), bundle.h_coupling.end());
    prog.h_red = build_reductions(prog, h_full);

    const int band = std::min(5, std::max(1, prog.R / 6));
    for (int d : prog.diag_comps) {
        prog.leak_ranges.push_back({d * prog.R, band});
        prog.leak_ranges.push_back({d * prog.R + prog.R - band, band});
    }
    return prog;
}

std::vector<cplx> initial_vector(const ModelBundle& bundle, const SectorProgram& prog) {
    const int nq = bundle.n_qubits;
    if (static_cast<int>(bundle.init_blocks.size()) != nq + 1)
        throw std::logic_error("initial blocks do not match the factor list");
    for (const auto& b : bundle.init_blocks) {
        const DenseMatrix off = b - DenseMatrix(b.diagonal().asDiagonal());
        if (off.norm() > 1e-14 * (b.norm() + 1.0))
            throw std::invalid_argument(
                "banded integrator requires a diagonal initial product state");
    }
    std::vector<double> wq(static_cast<std::size_t>(prog.qdim), 1.0);
    for (int q = 0; q < prog.qdim; ++q)
        for (int f = 0; f < nq; ++f)
            wq[q] *= bundle.init_blocks[f].diagonal()[(q >> (nq - 1 - f)) & 1].real();
    const auto lad = bundle.init_blocks[nq].diagonal();
    std::vector<cplx> x(prog.total(), cplx(0.0, 0.0));
    for (int q = 0; q < prog.qdim; ++q) {
        const int comp = prog.index.at({q, q, 0});
        for (int i = 0; i < prog.R; ++i) x[comp * prog.R + i] = wq[q] * lad[i].real();
    }
    return x;
}

void rhs(const SectorProgram& prog, const std::vector<Instr>& instrs, const kernels::Ops& K,
         const cplx* in, cplx* out, std::size_t n) {
    std::fill(out, out + n, cplx(0.0, 0.0));
    for (const auto& ins : instrs) K.caxpy(ins.n, ins.c, in + ins.in0, out + ins.out0);
    (void)prog;
}

[[noreturn]] void abort_integration(const ModelBundle& bundle, double t, const std::string& what) {
    std::ostringstream os;
    os << model_name(bundle.kind) << " integration aborted at t=" << t << ": " << what;
    throw NumericalAbort(os.str());
}

} // namespace

SectorInfo sector_info(const models::ModelBundle& bundle, Frame frame) {
    const SectorProgram prog = compile(bundle, frame);
    return {prog.ncomp, prog.max_abs_dn, prog.evo.size()};
}

ObservableSeries integrate(const models::ModelBundle& bundle, const IntegrationConfig& cfg0) {
    const IntegrationConfig cfg = IntegrationConfig::resolve(bundle, cfg0);
    const SectorProgram prog = compile(bundle, cfg.frame);
    const kernels::Ops& K = kernels::ops();
    const std::size_t N = prog.total();

    std::vector<cplx> y = initial_vector(bundle, prog);
    std::vector<cplx> k(N), st(N), acc(N), scratch(N);

    const long steps = std::max<long>(1, static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-12)));
    const double dt = cfg.t_end / static_cast<double>(steps);
    const long stride =
        cfg.sample_stride > 0 ? cfg.sample_stride : std::max<long>(1, steps / 4000);

    ObservableSeries series;
    series.dt = dt;
    series.t_end = cfg.t_end;
    series.steps = steps;
    series.frame = cfg.frame;
    for (const auto& kv : prog.obs) series.obs[kv.first]; // fixed key order
    for (const auto& kv : prog.bath_instr) series.obs["Qdot" + std::to_string(kv.first)];

    auto sample = [&](long step) {
        const double t = step * dt;
        cplx tr(0.0, 0.0);
        for (int d : prog.diag_comps) tr += K.csum(prog.R, y.data() + d * prog.R);
        if (!std::isfinite(tr.real()) || !std::isfinite(tr.imag()))
            abort_integration(bundle, t, "state is no longer finite");
        const double trace_dev = std::abs(tr - cplx(1.0, 0.0));
        series.max_trace_dev = std::max(series.max_trace_dev, trace_dev);
        if (trace_dev > cfg.trace_tol)
            abort_integration(bundle, t, "trace drift " + std::to_string(trace_dev));
        double leak = 0.0;
        for (const auto& [base, n] : prog.leak_ranges) leak += K.csum(n, y.data() + base).real();
        leak = std::abs(leak);
        series.max_leak = std::max(series.max_leak, leak);
        if (leak > cfg.leak_tol)
            abort_integration(bundle, t,
                              "boundary rung population " + std::to_string(leak) +
                                  "; widen the load window");
        for (const auto& hp : prog.herm_pairs) {
            double dev = 0.0;
            for (int j = 0; j < hp.n; ++j)
                dev = std::max(dev, std::abs(y[hp.cbase + j] - std::conj(y[hp.pbase + j])));
            series.max_herm_dev = std::max(series.max_herm_dev, dev);
        }
        series.t.push_back(t);
        for (const auto& [name, reds] : prog.obs) {
            cplx v(0.0, 0.0);
            for (const auto& r : reds) v += r.coef * K.cdotw(r.n, r.w.data(), y.data() + r.base);
            series.max_imag_dev = std::max(series.max_imag_dev, std::abs(v.imag()));
            series.obs[name].push_back(v.real());
        }
        for (const auto& [bath, instrs] : prog.bath_instr) {
            rhs(prog, instrs, K, y.data(), scratch.data(), N);
            cplx q(0.0, 0.0);
            for (const auto& r : prog.h_red)
                q += r.coef * K.cdotw(r.n, r.w.data(), scratch.data() + r.base);
            series.obs["Qdot" + std::to_string(bath)].push_back(q.real());
        }
    };

    sample(0);
    for (long step = 1; step <= steps; ++step) {
        rhs(prog, prog.evo, K, y.data(), k.data(), N); // k1
        K.cxpay(N, y.data(), dt / 6.0, k.data(), acc.data());
        K.cxpay(N, y.data(), dt / 2.0, k.data(), st.data());
        rhs(prog, prog.evo, K, st.data(), k.data(), N); // k2
        K.caxpy(N, dt / 3.0, k.data(), acc.data());
        K.cxpay(N, y.data(), dt / 2.0, k.data(), st.data());
        rhs(prog, prog.evo, K, st.data(), k.data(), N); // k3
        K.caxpy(N, dt / 3.0, k.data(), acc.data());
        K.cxpay(N, y.data(), dt, k.data(), st.data());
        rhs(prog, prog.evo, K, st.data(), k.data(), N); // k4
        K.caxpy(N, dt / 6.0, k.data(), acc.data());
        y.swap(acc);
        if (step % stride == 0 || step == steps) sample(step);
    }
    return series;
}

} // namespace qhe::evolve

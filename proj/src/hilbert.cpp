#include "qhe/hilbert.hpp"

#include <algorithm>
#include <cstdio>

namespace qhe::hilbert {

int factor_dim(const Factor& f) {
    return std::visit(
        [](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Qubit>) {
                return 2;
            } else if constexpr (std::is_same_v<T, Ladder>) {
                if (v.n_max < v.n_min)
                    throw std::invalid_argument("Ladder: n_max < n_min");
                return v.n_max - v.n_min + 1;
            } else {
                if (v.n_max < 0)
                    throw std::invalid_argument("FockOscillator: n_max < 0");
                return v.n_max + 1;
            }
        },
        f);
}

SpaceLayout build_space(std::vector<Factor> factors) {
    if (factors.empty()) throw std::invalid_argument("build_space: no factors");
    SpaceLayout l;
    l.factors = std::move(factors);
    l.dims.resize(l.factors.size());
    l.strides.resize(l.factors.size());
    long long dim = 1;
    for (std::size_t i = 0; i < l.factors.size(); ++i) {
        l.dims[i] = factor_dim(l.factors[i]);
        dim *= l.dims[i];
        if (dim > (1 << 22))
            throw std::invalid_argument("build_space: dimension too large");
    }
    l.dim = static_cast<int>(dim);
    int stride = l.dim;
    for (std::size_t i = 0; i < l.factors.size(); ++i) {
        stride /= l.dims[i];
        l.strides[i] = stride;
    }
    return l;
}

DenseMatrix sigma_z() {
    DenseMatrix m = DenseMatrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

DenseMatrix sigma_plus() {
    DenseMatrix m = DenseMatrix::Zero(2, 2);
    m(0, 1) = 1.0; // |excited><ground|
    return m;
}

DenseMatrix sigma_minus() {
    DenseMatrix m = DenseMatrix::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}

DenseMatrix qubit_identity() { return DenseMatrix::Identity(2, 2); }

DenseMatrix thermal_qubit(double betaE) {
    const double z = 2.0 * std::cosh(betaE / 2.0);
    DenseMatrix m = DenseMatrix::Zero(2, 2);
    m(0, 0) = std::exp(-betaE / 2.0) / z; // excited
    m(1, 1) = std::exp(+betaE / 2.0) / z; // ground
    return m;
}

OperatorMatrix embed(const DenseMatrix& local, int factor_idx, const SpaceLayout& layout) {
    if (factor_idx < 0 || factor_idx >= layout.num_factors())
        throw std::invalid_argument("embed: factor index out of range");
    const int dloc = layout.dims[factor_idx];
    if (local.rows() != dloc || local.cols() != dloc)
        throw std::invalid_argument("embed: local operator dimension mismatch");

    int dpre = 1;
    for (int i = 0; i < factor_idx; ++i) dpre *= layout.dims[i];
    const int dpost = layout.strides[factor_idx];

    std::vector<Eigen::Triplet<cplx>> trips;
    for (int r = 0; r < dloc; ++r)
        for (int c = 0; c < dloc; ++c) {
            const cplx v = local(r, c);
            if (v == cplx(0.0, 0.0)) continue;
            for (int a = 0; a < dpre; ++a)
                for (int b = 0; b < dpost; ++b)
                    trips.emplace_back((a * dloc + r) * dpost + b, (a * dloc + c) * dpost + b, v);
        }
    OperatorMatrix out(layout.dim, layout.dim);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

OperatorMatrix identity_op(const SpaceLayout& layout) {
    OperatorMatrix id(layout.dim, layout.dim);
    id.setIdentity();
    return id;
}

LadderOps ladder_ops(const SpaceLayout& layout, int factor_idx) {
    if (factor_idx < 0 || factor_idx >= layout.num_factors())
        throw std::invalid_argument("ladder_ops: factor index out of range");
    const Ladder* lad = std::get_if<Ladder>(&layout.factors[factor_idx]);
    if (!lad) throw std::invalid_argument("ladder_ops: factor is not a Ladder");
    const int d = layout.dims[factor_idx];

    DenseMatrix w = DenseMatrix::Zero(d, d);
    DenseMatrix a = DenseMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        w(i, i) = (lad->n_min + i) * lad->Ev;
        if (i > 0) a(i - 1, i) = 1.0; // |n-1><n|, bottom rung annihilated
    }
    return {embed(w, factor_idx, layout), embed(a, factor_idx, layout)};
}

FockOps fock_ops(const SpaceLayout& layout, int factor_idx) {
    if (factor_idx < 0 || factor_idx >= layout.num_factors())
        throw std::invalid_argument("fock_ops: factor index out of range");
    const FockOscillator* osc = std::get_if<FockOscillator>(&layout.factors[factor_idx]);
    if (!osc) throw std::invalid_argument("fock_ops: factor is not a FockOscillator");
    const int d = layout.dims[factor_idx];

    DenseMatrix a = DenseMatrix::Zero(d, d);
    DenseMatrix n = DenseMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        n(i, i) = i;
        if (i > 0) a(i - 1, i) = std::sqrt(static_cast<double>(i));
    }
    return {embed(a, factor_idx, layout), embed(n, factor_idx, layout)};
}

void prune(OperatorMatrix& m, double tol) {
    m.prune([tol](int, int, const cplx& v) { return std::abs(v) >= tol; });
}

void DensityState::validate(bool check_positivity, double positivity_tol) const {
    if (rho.rows() != layout.dim || rho.cols() != layout.dim)
        throw std::runtime_error("DensityState: dimension mismatch");
    const double tr_err = std::abs(rho.trace() - cplx(1.0, 0.0));
    if (tr_err > 1e-10) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "DensityState: trace deviates by %.3e", tr_err);
        throw std::runtime_error(buf);
    }
    const double herm_err = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm_err > 1e-12) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "DensityState: hermiticity violated by %.3e", herm_err);
        throw std::runtime_error(buf);
    }
    if (check_positivity) {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (rho + rho.adjoint()),
                                                      Eigen::EigenvaluesOnly);
        const double lam_min = es.eigenvalues().minCoeff();
        if (lam_min < -positivity_tol) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "DensityState: negative eigenvalue %.3e", lam_min);
            throw std::runtime_error(buf);
        }
    }
}

DensityState product_state(const SpaceLayout& layout, const std::vector<DenseMatrix>& blocks) {
    if (static_cast<int>(blocks.size()) != layout.num_factors())
        throw std::invalid_argument("product_state: block count mismatch");
    DenseMatrix acc = DenseMatrix::Ones(1, 1);
    for (int i = 0; i < layout.num_factors(); ++i) {
        const DenseMatrix& b = blocks[i];
        if (b.rows() != layout.dims[i] || b.cols() != layout.dims[i])
            throw std::invalid_argument("product_state: block dimension mismatch");
        DenseMatrix next(acc.rows() * b.rows(), acc.cols() * b.cols());
        for (int r = 0; r < acc.rows(); ++r)
            for (int c = 0; c < acc.cols(); ++c)
                next.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = acc(r, c) * b;
        acc = std::move(next);
    }
    return DensityState{layout, std::move(acc)};
}

cplx expectation(const OperatorMatrix& op, const DenseMatrix& rho) {
    if (op.rows() != rho.rows() || op.cols() != rho.cols())
        throw std::invalid_argument("expectation: dimension mismatch");
    cplx acc{0.0, 0.0};
    for (int k = 0; k < op.outerSize(); ++k)
        for (OperatorMatrix::InnerIterator it(op, k); it; ++it)
            acc += it.value() * rho(it.col(), it.row());
    return acc;
}

cplx expectation(const OperatorMatrix& op, const DensityState& state) {
    return expectation(op, state.rho);
}

DensityState partial_trace(const DensityState& state, const std::vector<int>& keep) {
    const SpaceLayout& l = state.layout;
    if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
    if (!std::is_sorted(keep.begin(), keep.end()) ||
        std::adjacent_find(keep.begin(), keep.end()) != keep.end())
        throw std::invalid_argument("partial_trace: keep set must be ascending and unique");
    for (int k : keep)
        if (k < 0 || k >= l.num_factors())
            throw std::invalid_argument("partial_trace: keep index out of range");

    std::vector<int> traced;
    for (int i = 0; i < l.num_factors(); ++i)
        if (!std::binary_search(keep.begin(), keep.end(), i)) traced.push_back(i);

    std::vector<Factor> kept_factors;
    for (int k : keep) kept_factors.push_back(l.factors[k]);
    SpaceLayout sub = build_space(std::move(kept_factors));

    int dt = 1;
    for (int t : traced) dt *= l.dims[t];

    // decompose a reduced index into per-factor indices, then recompose the
    // full-space index together with a traced-index tuple
    auto full_index = [&](int reduced, int traced_tuple) {
        int idx = 0;
        int rr = reduced, tt = traced_tuple;
        std::vector<int> local(l.num_factors(), 0);
        for (int k = static_cast<int>(keep.size()) - 1; k >= 0; --k) {
            local[keep[k]] = rr % l.dims[keep[k]];
            rr /= l.dims[keep[k]];
        }
        for (int k = static_cast<int>(traced.size()) - 1; k >= 0; --k) {
            local[traced[k]] = tt % l.dims[traced[k]];
            tt /= l.dims[traced[k]];
        }
        for (int f = 0; f < l.num_factors(); ++f) idx += local[f] * l.strides[f];
        return idx;
    };

    DenseMatrix out = DenseMatrix::Zero(sub.dim, sub.dim);
    for (int r = 0; r < sub.dim; ++r)
        for (int c = 0; c < sub.dim; ++c) {
            cplx acc{0.0, 0.0};
            for (int t = 0; t < dt; ++t) acc += state.rho(full_index(r, t), full_index(c, t));
            out(r, c) = acc;
        }
    return DensityState{std::move(sub), std::move(out)};
}

} // namespace qhe::hilbert

#include "doctest.h"

#include "qhe/hilbert.hpp"

#include <cmath>
#include <stdexcept>

using namespace qhe::hilbert;
using qhe::cplx;

namespace {

DenseMatrix dense(const OperatorMatrix& m) { return DenseMatrix(m); }

bool matrix_near(const DenseMatrix& a, const DenseMatrix& b, double tol = 1e-14) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a - b).cwiseAbs().maxCoeff() <= tol;
}

} // namespace

TEST_CASE("factor dimensions and layout strides") {
    SpaceLayout two_qubits_ladder =
        build_space({Qubit{}, Qubit{}, Ladder{-2, 2, 1.0}});
    CHECK(two_qubits_ladder.dim == 2 * 2 * 5);
    // first factor slowest
    CHECK(two_qubits_ladder.strides == std::vector<int>({10, 5, 1}));
    CHECK(factor_dim(FockOscillator{60, 1.0}) == 61);
    CHECK(build_space({FockOscillator{60, 1.0}}).dim == 61);
}

TEST_CASE("embedding on two qubits: excited state comes first") {
    SpaceLayout layout = build_space({Qubit{}, Qubit{}});
    // basis order: |1 1>, |1 0>, |0 1>, |0 0> (physical labels)
    DenseMatrix z0 = dense(embed(sigma_z(), 0, layout));
    DenseMatrix expect0 = DenseMatrix::Zero(4, 4);
    expect0.diagonal() << 1, 1, -1, -1;
    CHECK(matrix_near(z0, expect0));

    DenseMatrix z1 = dense(embed(sigma_z(), 1, layout));
    DenseMatrix expect1 = DenseMatrix::Zero(4, 4);
    expect1.diagonal() << 1, -1, 1, -1;
    CHECK(matrix_near(z1, expect1));

    // sigma_plus on factor 1 maps |x 0> -> |x 1>: entries (0,1) and (2,3)
    DenseMatrix p1 = dense(embed(sigma_plus(), 1, layout));
    DenseMatrix expectp = DenseMatrix::Zero(4, 4);
    expectp(0, 1) = 1;
    expectp(2, 3) = 1;
    CHECK(matrix_near(p1, expectp));

    CHECK_THROWS_AS(embed(sigma_z(), 2, layout), std::invalid_argument);
    CHECK_THROWS_AS(embed(DenseMatrix::Identity(3, 3), 0, layout),
                    std::invalid_argument);
}

TEST_CASE("ladder operators: W spectrum, flat lowering amplitudes") {
    SpaceLayout layout = build_space({Ladder{-1, 1, 2.0}});
    auto [W, A] = ladder_ops(layout, 0);

    DenseMatrix expectW = DenseMatrix::Zero(3, 3);
    expectW.diagonal() << -2, 0, 2; // n * Ev, ascending rungs
    CHECK(matrix_near(dense(W), expectW));

    DenseMatrix Ad = dense(A);
    DenseMatrix expectA = DenseMatrix::Zero(3, 3);
    expectA(0, 1) = 1;
    expectA(1, 2) = 1;
    CHECK(matrix_near(Ad, expectA));

    // A^dag A = I - |n_min><n_min|  (unit amplitudes, annihilates the bottom)
    DenseMatrix AdA = Ad.adjoint() * Ad;
    DenseMatrix expectP = DenseMatrix::Identity(3, 3);
    expectP(0, 0) = 0;
    CHECK(matrix_near(AdA, expectP));

    // [W, A] = -Ev A exactly on the truncated window
    DenseMatrix Wd = dense(W);
    CHECK(matrix_near(Wd * Ad - Ad * Wd, -2.0 * Ad));

    CHECK_THROWS_AS(ladder_ops(build_space({Qubit{}}), 0), std::invalid_argument);
}

TEST_CASE("fock operators carry sqrt(n) amplitudes") {
    SpaceLayout layout = build_space({FockOscillator{3, 1.0}});
    auto ops = fock_ops(layout, 0);
    DenseMatrix a = dense(ops.a);
    CHECK(a(0, 1) == cplx(1, 0));
    CHECK(std::abs(a(1, 2) - cplx(std::sqrt(2.0), 0)) < 1e-15);
    CHECK(std::abs(a(2, 3) - cplx(std::sqrt(3.0), 0)) < 1e-15);
    DenseMatrix n = dense(ops.n);
    DenseMatrix expectN = DenseMatrix::Zero(4, 4);
    expectN.diagonal() << 0, 1, 2, 3;
    CHECK(matrix_near(n, expectN));
    // a^dag a = n on the truncated space except the top level
    CHECK(matrix_near((a.adjoint() * a).topLeftCorner(3, 3), expectN.topLeftCorner(3, 3),
                      1e-14));
}

TEST_CASE("thermal qubit populations") {
    const double betaE = 3.0;
    DenseMatrix rho = thermal_qubit(betaE);
    CHECK(std::abs(rho.trace() - cplx(1, 0)) < 1e-14);
    // <sigma_z> = -tanh(betaE/2): excited population is the smaller one
    const double z = (rho(0, 0) - rho(1, 1)).real();
    CHECK(z == doctest::Approx(-std::tanh(1.5)).epsilon(1e-12));
    CHECK(rho(0, 1) == cplx(0, 0));
}

TEST_CASE("product state, expectation, partial trace") {
    SpaceLayout layout = build_space({Qubit{}, Qubit{}});
    DensityState rho = product_state(layout, {thermal_qubit(3.0), thermal_qubit(1.0)});
    rho.validate(true);

    auto z0 = embed(sigma_z(), 0, layout);
    auto z1 = embed(sigma_z(), 1, layout);
    CHECK(expectation(z0, rho).real() == doctest::Approx(-std::tanh(1.5)).epsilon(1e-12));
    CHECK(expectation(z1, rho).real() == doctest::Approx(-std::tanh(0.5)).epsilon(1e-12));
    CHECK(std::abs(expectation(z0, rho).imag()) < 1e-14);

    DensityState reduced = partial_trace(rho, {0});
    CHECK(reduced.layout.dim == 2);
    CHECK(matrix_near(reduced.rho, thermal_qubit(3.0), 1e-14));
}

TEST_CASE("partial trace of an entangled state is maximally mixed") {
    SpaceLayout layout = build_space({Qubit{}, Qubit{}});
    Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0); // (|11> + |00>)/sqrt(2)
    DensityState rho{layout, bell * bell.adjoint()};
    rho.validate(true);

    for (int keep : {0, 1}) {
        DensityState red = partial_trace(rho, {keep});
        CHECK(matrix_near(red.rho, 0.5 * DenseMatrix::Identity(2, 2), 1e-14));
    }
}

TEST_CASE("density state validation catches defects") {
    SpaceLayout layout = build_space({Qubit{}});
    DensityState bad_trace{layout, 2.0 * thermal_qubit(1.0)};
    CHECK_THROWS(bad_trace.validate());

    DenseMatrix nh(2, 2);
    nh << cplx(0.5, 0), cplx(0.3, 0.1), cplx(0.0, 0.0), cplx(0.5, 0);
    DensityState non_hermitian{layout, nh};
    CHECK_THROWS(non_hermitian.validate());

    DenseMatrix neg(2, 2);
    neg << cplx(1.2, 0), cplx(0, 0), cplx(0, 0), cplx(-0.2, 0);
    DensityState negative{layout, neg};
    negative.validate(false);                  // trace and hermiticity are fine
    CHECK_THROWS(negative.validate(true));     // positivity is not
}

TEST_CASE("product state rejects mismatched blocks") {
    SpaceLayout layout = build_space({Qubit{}, Ladder{-1, 1, 1.0}});
    CHECK_THROWS_AS(product_state(layout, {thermal_qubit(1.0)}), std::invalid_argument);
    CHECK_THROWS_AS(product_state(layout, {thermal_qubit(1.0), thermal_qubit(1.0)}),
                    std::invalid_argument);
}

TEST_CASE("prune drops rounding-level entries") {
    SpaceLayout layout = build_space({Qubit{}});
    OperatorMatrix m = embed(sigma_z(), 0, layout);
    DenseMatrix d = dense(m);
    d(0, 1) = cplx(1e-17, 0);
    OperatorMatrix sparse = d.sparseView(0.0, 0.0); // keep everything
    prune(sparse);
    CHECK(sparse.nonZeros() == 2);
}

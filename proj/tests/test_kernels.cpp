#include "doctest.h"

#include "qhe/kernels.hpp"
#include "qhe/philox.hpp"

#include <cmath>
#include <string>
#include <vector>

using qhe::cplx;
namespace kernels = qhe::kernels;

namespace {

// deterministic test data in [-1, 1) + i[-1, 1)
std::vector<cplx> random_vec(std::size_t n, std::uint64_t trial) {
    qhe::rng::TrialStream rng(/*seed=*/42, trial);
    std::vector<cplx> v(n);
    for (auto& z : v) z = cplx(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
    return v;
}

std::vector<double> random_weights(std::size_t n, std::uint64_t trial) {
    qhe::rng::TrialStream rng(/*seed=*/7, trial, /*salt=*/1);
    std::vector<double> w(n);
    for (auto& x : w) x = 2.0 * rng.uniform() - 1.0;
    return w;
}

void check_close(cplx a, cplx b, double tol) {
    CHECK(std::abs(a - b) <= tol * (1.0 + std::abs(b)));
}

} // namespace

TEST_CASE("scalar caxpy matches hand computation") {
    // y += a x with a = 1 + 2i
    const cplx a(1.0, 2.0);
    std::vector<cplx> x = {cplx(1, 0), cplx(0, 1)};
    std::vector<cplx> y = {cplx(0, 0), cplx(1, 1)};
    kernels::scalar_ops.caxpy(2, a, x.data(), y.data());
    CHECK(y[0] == cplx(1, 2));  // (1+2i)(1)
    CHECK(y[1] == cplx(-1, 2)); // (1+2i)(i) = -2 + i, plus (1+1i)
}

TEST_CASE("scalar cxpay matches hand computation") {
    const cplx a(0.0, -1.0);
    std::vector<cplx> x = {cplx(1, 1), cplx(2, 0)};
    std::vector<cplx> k = {cplx(0, 3), cplx(1, 1)};
    std::vector<cplx> y(2);
    kernels::scalar_ops.cxpay(2, x.data(), a, k.data(), y.data());
    CHECK(y[0] == cplx(4, 1)); // (1+i) + (-i)(3i) = 4 + i
    CHECK(y[1] == cplx(3, -1));
}

TEST_CASE("scalar csum and cdotw basics") {
    std::vector<cplx> x = {cplx(1, 2), cplx(-0.5, 0.25), cplx(3, -3)};
    CHECK(kernels::scalar_ops.csum(0, x.data()) == cplx(0, 0));
    check_close(kernels::scalar_ops.csum(3, x.data()), cplx(3.5, -0.75), 1e-15);
    std::vector<double> ones = {1.0, 1.0, 1.0};
    check_close(kernels::scalar_ops.cdotw(3, ones.data(), x.data()),
                kernels::scalar_ops.csum(3, x.data()), 1e-15);
    std::vector<double> w = {2.0, 0.0, -1.0};
    check_close(kernels::scalar_ops.cdotw(3, w.data(), x.data()), cplx(-1, 7), 1e-15);
}

TEST_CASE("every available table agrees with the scalar reference") {
    const auto tables = kernels::available_ops();
    REQUIRE(!tables.empty());

    // odd lengths exercise the vector tails
    const std::size_t sizes[] = {0, 1, 2, 3, 5, 8, 13, 81, 256, 1003};
    std::uint64_t trial = 0;
    for (std::size_t n : sizes) {
        const auto x = random_vec(n, ++trial);
        const auto k = random_vec(n, ++trial);
        const auto y0 = random_vec(n, ++trial);
        const auto w = random_weights(n, ++trial);
        const cplx a(0.7357, -1.1893);

        auto y_ref = y0;
        kernels::scalar_ops.caxpy(n, a, x.data(), y_ref.data());
        std::vector<cplx> s_ref(n);
        kernels::scalar_ops.cxpay(n, x.data(), a, k.data(), s_ref.data());
        const cplx sum_ref = kernels::scalar_ops.csum(n, x.data());
        const cplx dot_ref = kernels::scalar_ops.cdotw(n, w.data(), x.data());

        for (const kernels::Ops* t : tables) {
            CAPTURE(t->name);
            CAPTURE(n);
            auto y = y0;
            t->caxpy(n, a, x.data(), y.data());
            for (std::size_t i = 0; i < n; ++i)
                CHECK(std::abs(y[i] - y_ref[i]) <= 1e-13 * (1.0 + std::abs(y_ref[i])));

            std::vector<cplx> s(n);
            t->cxpay(n, x.data(), a, k.data(), s.data());
            for (std::size_t i = 0; i < n; ++i)
                CHECK(std::abs(s[i] - s_ref[i]) <= 1e-13 * (1.0 + std::abs(s_ref[i])));

            check_close(t->csum(n, x.data()), sum_ref, 1e-12);
            check_close(t->cdotw(n, w.data(), x.data()), dot_ref, 1e-12);
        }
    }
}

TEST_CASE("runtime dispatch selects a compiled-in table") {
    const auto& active = kernels::ops();
    bool found = false;
    for (const kernels::Ops* t : kernels::available_ops())
        if (std::string(t->name) == active.name) found = true;
    CHECK(found);
}

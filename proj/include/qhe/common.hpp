// Shared aliases and small numeric helpers.
#pragma once

#include <complex>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qhe {

using cplx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// log-spaced grid, n >= 2, endpoints included
inline std::vector<double> logspace(double lo, double hi, int n) {
    if (n < 2 || lo <= 0.0 || hi <= 0.0)
        throw std::invalid_argument("logspace: need n >= 2 and positive bounds");
    std::vector<double> v(n);
    const double la = std::log10(lo), lb = std::log10(hi);
    for (int i = 0; i < n; ++i)
        v[i] = std::pow(10.0, la + (lb - la) * i / (n - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 2) throw std::invalid_argument("linspace: need n >= 2");
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    v.front() = lo;
    v.back() = hi;
    return v;
}

// relative deviation with an absolute floor, used for oracle comparisons
inline double rel_dev(double value, double reference, double floor = 1e-12) {
    return std::abs(value - reference) / std::max(std::abs(reference), floor);
}

// %.12g formatting used by every CSV / report writer
std::string fmt12(double x);

} // namespace qhe

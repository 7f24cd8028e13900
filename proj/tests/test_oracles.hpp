// Test-side oracles, independent of the library's solver paths: a plain
// bisection, central finite differences, and brute-force digraph enumeration.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

// Plain bisection, no interpolation: the reference root-finder.
inline double bisect(const std::function<double(double)>& f, double a, double b,
                     double xtol = 1e-14) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) throw std::runtime_error("oracle::bisect: no sign change");
    while (b - a > xtol) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Central finite difference of given order (1 or 2) with step h.
inline double central_diff(const std::function<double(double)>& f, double x, double h,
                           int order = 1) {
    if (order == 1) return (f(x + h) - f(x - h)) / (2.0 * h);
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Exact counts of (E, S) = (sum d_i, sum d_i^p) over all 2^(n^2) digraph
// adjacency matrices, by direct enumeration. Feasible for n <= 3.
inline std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> enumerate_counts(int n,
                                                                                      int p) {
    auto ip = [](std::int64_t x, int k) {
        std::int64_t r = 1;
        for (int i = 0; i < k; ++i) r *= x;
        return r;
    };
    std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> counts;
    const int bits = n * n;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
        std::int64_t E = 0, S = 0;
        for (int i = 0; i < n; ++i) {
            int d = 0;
            for (int j = 0; j < n; ++j)
                if (mask & (std::uint64_t{1} << (i * n + j))) ++d;
            E += d;
            S += ip(d, p);
        }
        ++counts[{E, S}];
    }
    return counts;
}

}  // namespace oracle

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "pstar/errors.hpp"

namespace pstar {

/// Brent's method on a bracketing interval [a, b] with f(a)*f(b) <= 0.
/// Falls back to bisection whenever interpolation would leave the bracket,
/// so convergence is unconditional. Stops when the bracket is narrower than
/// xtol (plus a machine-precision floor) or |f| <= ftol.
template <class F>
double find_root_brent(F&& f, double a, double b, double fa, double fb,
                       double xtol, double ftol = 0.0, int max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0))
        throw std::invalid_argument("find_root_brent: root not bracketed");

    double c = a, fc = fa;
    double d = b - a, e = b - a;
    for (int iter = 0; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a; fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0 || std::fabs(fb) <= ftol) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {  // secant
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {  // inverse quadratic interpolation
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            const double min1 = 3.0 * xm * q - std::fabs(tol1 * q);
            const double min2 = std::fabs(e * q);
            if (2.0 * p < (min1 < min2 ? min1 : min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if (std::fabs(d) > tol1)
            b += d;
        else
            b += (xm > 0.0 ? std::fabs(tol1) : -std::fabs(tol1));
        fb = f(b);
    }
    throw convergence_error("find_root_brent: iteration budget exhausted");
}

template <class F>
double find_root_brent(F&& f, double a, double b, double xtol, double ftol = 0.0,
                       int max_iter = 200) {
    const double fa = f(a);
    const double fb = f(b);
    return find_root_brent(std::forward<F>(f), a, b, fa, fb, xtol, ftol, max_iter);
}

}  // namespace pstar

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pstar/errors.hpp"
#include "pstar/rootfind.hpp"
#include "pstar/scalar.hpp"

namespace pstar {

/// Endpoint of the phase-transition curve, in closed form.
struct CriticalPoint {
    double beta1_c;  ///< log(p-1) - p/(p-1)
    double beta2_c;  ///< p^(p-1)/(p-1)^p
    double e_c;      ///< (p-1)/p
    double s_c;      ///< e_c^p
};

inline CriticalPoint critical_point(int p) {
    if (p < 2) throw std::domain_error("critical_point: p must be >= 2");
    const double pd = static_cast<double>(p);
    CriticalPoint cp;
    cp.beta1_c = std::log(pd - 1.0) - pd / (pd - 1.0);
    cp.beta2_c = ipow(pd, p - 1) / ipow(pd - 1.0, p);
    cp.e_c = (pd - 1.0) / pd;
    cp.s_c = ipow(cp.e_c, p);
    return cp;
}

/// A solved point on the curve beta2 = q(beta1): the two equal global
/// maximizers x1 < x2 of ell, q' by the chord formula, and the derivatives of
/// x1, x2 along the curve. Inside the critical guard the point is reported
/// degenerate with x1 = x2 = (p-1)/p and infinite sensitivities.
struct CurvePoint {
    double beta1;
    double beta2;
    double x1;
    double x2;
    double qprime;      ///< -(x2-x1)/(x2^p-x1^p), < 0
    double dx1_dbeta1;  ///< (1 + p q' x1^(p-1)) / (-ell''(x1)), > 0
    double dx2_dbeta1;  ///< < 0
    double dx1_dbeta2;  ///< dx1_dbeta1 / q', < 0
    double dx2_dbeta2;  ///< > 0
    bool degenerate = false;
};

namespace detail {

inline constexpr double kCritGuard = 1e-6;      // in beta1 (and beta2 for q_inverse)
inline constexpr double kCurveBeta2Xtol = 1e-12;
inline constexpr double kBranchBig = 1e9;       // synthetic gap when one branch is gone

// ell(x_high) - ell(x_low) at fixed beta1 as a function of beta2. When only
// one local maximum exists the probe is outside the two-maxima window; the
// sign is set by which side of (p-1)/p the survivor sits on.
inline double equal_maxima_gap(int p, double beta1, double beta2, double xtol) {
    const ModelParams mp{p, beta1, beta2};
    const double lo = endpoint_eps_lo(mp);
    const double hi = 1.0 - endpoint_eps_hi(mp);
    auto dl = [&mp](double x) { return ell_eval(mp, x, 1); };
    const auto infl = find_inflections(mp, xtol);
    if (!infl.present) {
        // single maximum; below the window iff it lies on the low branch
        const double flo = dl(lo), fhi = dl(hi);
        const double x = (flo > 0.0 && fhi < 0.0)
                             ? find_root_brent(dl, lo, hi, flo, fhi, xtol)
                             : (fhi >= 0.0 ? hi : lo);
        return x < static_cast<double>(p - 1) / p ? -kBranchBig : kBranchBig;
    }
    const double f1 = dl(infl.u1);
    const double f2 = dl(infl.u2);
    if (f1 < 0.0 && f2 > 0.0) {
        const double flo = dl(lo), fhi = dl(hi);
        // a branch pinned beyond the representable guard sits at the endpoint
        const double xlo = flo > 0.0 ? find_root_brent(dl, lo, infl.u1, flo, f1, xtol) : lo;
        const double xhi = fhi < 0.0 ? find_root_brent(dl, infl.u2, hi, f2, fhi, xtol) : hi;
        return ell_eval(mp, xhi, 0) - ell_eval(mp, xlo, 0);
    }
    if (f1 >= 0.0 && f2 <= 0.0) return 0.0;  // doubly degenerate, only at criticality
    return f1 >= 0.0 ? kBranchBig : -kBranchBig;
}

}  // namespace detail

/// Solve the curve at a given beta1 < beta1_c. The equal-maxima condition is
/// bracketed in beta2 starting just above beta2_c and doubling the offset up
/// to |beta1| + 4, then refined by Brent's method to 1e-12.
inline CurvePoint curve_point(int p, double beta1,
                              double crit_guard = detail::kCritGuard) {
    const CriticalPoint cp = critical_point(p);
    if (!std::isfinite(beta1)) throw std::domain_error("curve_point: beta1 must be finite");
    if (beta1 > cp.beta1_c)
        throw std::domain_error("curve_point: beta1 exceeds the critical value");

    CurvePoint out;
    out.beta1 = beta1;
    if (cp.beta1_c - beta1 < crit_guard) {
        const double pd = static_cast<double>(p);
        out.beta2 = cp.beta2_c;
        out.x1 = out.x2 = cp.e_c;
        out.qprime = -1.0 / (pd * ipow(cp.e_c, p - 1));
        const double inf = std::numeric_limits<double>::infinity();
        out.dx1_dbeta1 = inf;
        out.dx2_dbeta1 = -inf;
        out.dx1_dbeta2 = -inf;
        out.dx2_dbeta2 = inf;
        out.degenerate = true;
        return out;
    }

    const double xtol = detail::kRootXtolDefault;
    auto gap = [&](double b2) { return detail::equal_maxima_gap(p, beta1, b2, xtol); };

    double lo = cp.beta2_c + crit_guard;
    double glo = gap(lo);
    for (int k = 1; glo >= 0.0 && k <= 40; ++k) {
        lo = cp.beta2_c + crit_guard / std::pow(2.0, k);
        glo = gap(lo);
    }
    if (glo >= 0.0)
        throw convergence_error("curve_point: lower bracket not established near beta2_c");

    const double cap = std::max(std::fabs(beta1) + 4.0, lo + 1.0);
    double hi = lo, ghi = glo;
    for (double off = 1.0; ghi <= 0.0; off *= 2.0) {
        if (hi >= cap)
            throw convergence_error("curve_point: equal-maxima bracket not found below cap");
        hi = std::min(cp.beta2_c + off, cap);
        ghi = gap(hi);
    }
    const double b2 = find_root_brent(gap, lo, hi, glo, ghi, detail::kCurveBeta2Xtol);

    // extract the two maximizers at the solved beta2 and polish with Newton
    const ModelParams mp{p, beta1, b2};
    auto pts = analyze_stationary(mp, xtol);
    const StationaryPoint* plo = nullptr;
    const StationaryPoint* phi = nullptr;
    for (const auto& sp : pts) {
        if (sp.kind == PointKind::local_min) continue;
        if (!plo || sp.x < plo->x) plo = &sp;
        if (!phi || sp.x > phi->x) phi = &sp;
    }
    if (!plo || !phi || plo == phi)
        throw convergence_error("curve_point: two maxima not resolved at solved beta2");
    double x1 = plo->x, x2 = phi->x;
    for (double* x : {&x1, &x2}) {
        const double d1 = ell_eval(mp, *x, 1);
        const double d2 = ell_eval(mp, *x, 2);
        if (d2 != 0.0) {
            const double step = d1 / d2;
            if (std::fabs(step) < 1e-6) *x -= step;
        }
    }

    out.beta2 = b2;
    out.x1 = x1;
    out.x2 = x2;
    out.qprime = -(x2 - x1) / (ipow(x2, p) - ipow(x1, p));
    const double d2lo = ell_eval(mp, x1, 2);
    const double d2hi = ell_eval(mp, x2, 2);
    const double pd = static_cast<double>(p);
    out.dx1_dbeta1 = (1.0 + pd * out.qprime * ipow(x1, p - 1)) / (-d2lo);
    out.dx2_dbeta1 = (1.0 + pd * out.qprime * ipow(x2, p - 1)) / (-d2hi);
    out.dx1_dbeta2 = out.dx1_dbeta1 / out.qprime;
    out.dx2_dbeta2 = out.dx2_dbeta1 / out.qprime;
    return out;
}

/// Invert the curve: the beta1 with q(beta1) = beta2, for beta2 above the
/// critical guard. Well posed because q is strictly decreasing.
inline double q_inverse(int p, double beta2, double crit_guard = detail::kCritGuard) {
    const CriticalPoint cp = critical_point(p);
    if (!std::isfinite(beta2)) throw std::domain_error("q_inverse: beta2 must be finite");
    if (beta2 - cp.beta2_c < crit_guard)
        throw near_critical_error("q_inverse: beta2 within the critical guard");

    auto resid = [&](double b1) { return curve_point(p, b1, crit_guard).beta2 - beta2; };
    const double hi = cp.beta1_c - crit_guard;
    const double rhi = resid(hi);
    if (rhi >= 0.0) return hi;  // beta2 at the very edge of the guard image

    double lo = hi, rlo = rhi;
    for (double off = 1.0;; off *= 2.0) {
        lo = cp.beta1_c - off;
        rlo = resid(lo);
        if (rlo > 0.0) break;
        if (off > 1e12) throw convergence_error("q_inverse: bracket not found");
    }
    return find_root_brent(resid, lo, hi, rlo, rhi, 1e-13, 1e-11);
}

}  // namespace pstar

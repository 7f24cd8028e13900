#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "pstar/curve.hpp"
#include "pstar/errors.hpp"
#include "pstar/scalar.hpp"

namespace pstar {

/// Position of (e,s) relative to the feasible region
/// D = { e^p < s < e, 0 < e < 1 } and its boundary pieces.
enum class RegionES { outside, interior, lower_boundary, upper_boundary, corner };

namespace detail {
inline constexpr double kRegionTol = 1e-9;
inline constexpr double kChordDegenerate = 1e-5;  // x2-x1 below this: treat as uniform
inline constexpr double kBipodalBeta1Span = 50.0; // bracket limit below beta1_c
}  // namespace detail

inline RegionES classify_es(int p, double e, double s, double tol = detail::kRegionTol) {
    if (p < 2) throw std::domain_error("classify_es: p must be >= 2");
    if (!(tol > 0.0)) throw std::invalid_argument("classify_es: tol must be > 0");
    if (!std::isfinite(e) || !std::isfinite(s)) return RegionES::outside;
    const bool e_in_range = e >= -tol && e <= 1.0 + tol;
    const bool on_lower = e_in_range && std::fabs(s - ipow(e, p)) <= tol;
    const bool on_upper = e_in_range && std::fabs(s - e) <= tol;
    if (on_lower && on_upper) return RegionES::corner;
    if (on_upper) return RegionES::upper_boundary;
    if (on_lower) return RegionES::lower_boundary;
    if (e > 0.0 && e < 1.0 && ipow(e, p) + tol < s && s < e - tol) return RegionES::interior;
    return RegionES::outside;
}

/// The optimizing two-level profile at an interior (e,s): a lambda-fraction of
/// coordinates at rate x1 and the rest at x2, with (x1,x2) the equal global
/// maximizers of ell at the Lagrange multipliers (beta1, beta2) on the curve.
struct BipodalProfile {
    double x1;
    double x2;
    double lambda;
    double beta1;
    double beta2;
    bool degenerate = false;  ///< chord collapsed (near-critical): x1 == x2
};

namespace detail {

// Lagrange multipliers from the stationarity conditions ell'(x1) = ell'(x2) = 0:
//   beta1 + p beta2 xi^(p-1) = logit(xi), i = 1,2.
inline std::pair<double, double> multipliers_from_pair(int p, double x1, double x2) {
    const double pd = static_cast<double>(p);
    const double b2 =
        (logit(x2) - logit(x1)) / (pd * (ipow(x2, p - 1) - ipow(x1, p - 1)));
    const double b1 = logit(x1) - pd * b2 * ipow(x1, p - 1);
    return {b1, b2};
}

inline BipodalProfile degenerate_profile(int p, double e) {
    const CriticalPoint cp = critical_point(p);
    return {e, e, 1.0, cp.beta1_c, cp.beta2_c, true};
}

}  // namespace detail

/// General solver: the unique curve point whose chord through (x1, x1^p) and
/// (x2, x2^p) passes through (e,s). F(beta1) = e - x2 + q'(beta1)(s - x2^p) is
/// strictly decreasing with F -> e - s > 0 as beta1 -> -inf, so scanning
/// doubled offsets below beta1_c brackets the root.
inline BipodalProfile solve_bipodal_general(int p, double e, double s,
                                            double tol = detail::kRegionTol) {
    if (classify_es(p, e, s, tol) != RegionES::interior)
        throw std::domain_error("solve_bipodal: (e,s) must be strictly interior");
    const CriticalPoint cp = critical_point(p);

    auto F = [&](double b1) {
        const CurvePoint c = curve_point(p, b1);
        return e - c.x2 + c.qprime * (s - ipow(c.x2, p));
    };

    const double hi = cp.beta1_c - detail::kCritGuard;
    const double fhi = F(hi);
    if (fhi >= 0.0) return detail::degenerate_profile(p, e);  // root inside the guard

    double lo = hi, flo = fhi;
    for (double off = 1.0;; off *= 2.0) {
        if (off > detail::kBipodalBeta1Span) {
            lo = cp.beta1_c - detail::kBipodalBeta1Span;
            flo = F(lo);
            if (flo <= 0.0)
                throw convergence_error("solve_bipodal: no bracket within the beta1 span");
            break;
        }
        lo = cp.beta1_c - off;
        flo = F(lo);
        if (flo > 0.0) break;
    }
    const double b1 = find_root_brent(F, lo, hi, flo, fhi, 1e-13, 1e-11);

    const CurvePoint c = curve_point(p, b1);
    if (c.x2 - c.x1 < detail::kChordDegenerate) return detail::degenerate_profile(p, e);
    double lambda = (c.x2 - e) / (c.x2 - c.x1);
    lambda = std::clamp(lambda, 0.0, 1.0);
    return {c.x1, c.x2, lambda, c.beta1, c.beta2, false};
}

/// For p = 2 the chord equations solve in closed form:
///   x_{1,2} = (1 -+ sqrt(1 - 4(e-s)))/2.
inline BipodalProfile solve_bipodal_p2(double e, double s,
                                       double tol = detail::kRegionTol) {
    if (classify_es(2, e, s, tol) != RegionES::interior)
        throw std::domain_error("solve_bipodal: (e,s) must be strictly interior");
    const double r = std::sqrt(1.0 - 4.0 * (e - s));
    const double x1 = 0.5 * (1.0 - r);
    const double x2 = 0.5 * (1.0 + r);
    if (x2 - x1 < detail::kChordDegenerate) return detail::degenerate_profile(2, e);
    const auto [b1, b2] = detail::multipliers_from_pair(2, x1, x2);
    const double lambda = std::clamp((x2 - e) / (x2 - x1), 0.0, 1.0);
    return {x1, x2, lambda, b1, b2, false};
}

inline BipodalProfile solve_bipodal(int p, double e, double s,
                                    double tol = detail::kRegionTol) {
    return p == 2 ? solve_bipodal_p2(e, s, tol) : solve_bipodal_general(p, e, s, tol);
}

/// Limiting entropy density psi(e,s): -lambda I(x1) - (1-lambda) I(x2) inside
/// D, -I(e) on the lower boundary, -log 2 on the upper boundary, and -inf
/// outside the closure (a value, not an error, so grids are total).
inline double entropy(int p, double e, double s, double tol = detail::kRegionTol) {
    switch (classify_es(p, e, s, tol)) {
        case RegionES::outside: return -std::numeric_limits<double>::infinity();
        case RegionES::upper_boundary:
        case RegionES::corner: return -std::numbers::ln2_v<double>;
        case RegionES::lower_boundary: return -entropy_I(std::clamp(e, 0.0, 1.0));
        case RegionES::interior: break;
    }
    const BipodalProfile bp = solve_bipodal(p, e, s, tol);
    if (bp.degenerate) return -entropy_I(e);
    return -bp.lambda * entropy_I(bp.x1) - (1.0 - bp.lambda) * entropy_I(bp.x2);
}

/// Closed form for p = 2: psi(e,s) = -I(1/2 + sqrt(s - e + 1/4)) on the
/// closure of D. Serves as the oracle for the general solver.
inline double entropy_p2_closed(double e, double s) {
    if (classify_es(2, e, s) == RegionES::outside)
        throw std::domain_error("entropy_p2_closed: (e,s) outside the closure of D");
    const double disc = s - e + 0.25;
    if (disc < 0.0) throw std::domain_error("entropy_p2_closed: negative discriminant");
    const double t = std::min(0.5 + std::sqrt(disc), 1.0);
    return -entropy_I(t);
}

/// Gradient of psi at an interior point: (-beta1, -beta2) for the solved
/// Lagrange multipliers.
inline std::pair<double, double> entropy_gradient(int p, double e, double s) {
    if (classify_es(p, e, s) != RegionES::interior)
        throw std::domain_error("entropy_gradient: (e,s) must be interior");
    const BipodalProfile bp = solve_bipodal(p, e, s);
    return {-bp.beta1, -bp.beta2};
}

/// Large-deviations rate function J(e,s) = -psi(e,s) >= 0; +inf outside.
inline double rate_function(int p, double e, double s) {
    return std::max(0.0, -entropy(p, e, s));
}

}  // namespace pstar

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pstar/errors.hpp"
#include "pstar/rootfind.hpp"

namespace pstar {

/// Parameters of the mean-field function
///   ell(x) = beta1*x + beta2*x^p - x log x - (1-x) log(1-x).
struct ModelParams {
    int p;         ///< star order, >= 2
    double beta1;  ///< edge parameter
    double beta2;  ///< star parameter
};

inline void validate_params(const ModelParams& mp) {
    if (mp.p < 2) throw std::domain_error("ModelParams: p must be >= 2");
    if (!std::isfinite(mp.beta1) || !std::isfinite(mp.beta2))
        throw std::domain_error("ModelParams: beta1, beta2 must be finite");
}

/// x^k for small non-negative integer k.
inline double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

/// Bernoulli(1/2) rate function I(x) = x log x + (1-x) log(1-x) + log 2,
/// with the convention 0 log 0 = 0, so I(0) = I(1) = log 2.
inline double entropy_I(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("entropy_I: x outside [0,1]");
    if (x == 0.0 || x == 1.0) return std::numbers::ln2_v<double>;
    return x * std::log(x) + (1.0 - x) * std::log1p(-x) + std::numbers::ln2_v<double>;
}

namespace detail {

// log(x/(1-x)), the derivative of x log x + (1-x) log(1-x)
inline double logit(double x) { return std::log(x) - std::log1p(-x); }

// falling factorial p (p-1) ... (p-k+1); zero when k > p
inline double falling(int p, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= static_cast<double>(p - i);
    return r;
}

}  // namespace detail

/// Order-th derivative (order 0..4) of ell at x. Orders >= 1 require
/// x strictly inside (0,1); ell itself is continuous on [0,1].
inline double ell_eval(const ModelParams& mp, double x, int order = 0) {
    validate_params(mp);
    if (order < 0 || order > 4) throw std::invalid_argument("ell_eval: order must be in 0..4");
    if (order == 0) {
        if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("ell_eval: x outside [0,1]");
        return mp.beta1 * x + mp.beta2 * ipow(x, mp.p) + std::numbers::ln2_v<double> - entropy_I(x);
    }
    if (!(x > 0.0 && x < 1.0))
        throw std::domain_error("ell_eval: derivatives require x in (0,1)");
    const double ff = detail::falling(mp.p, order);
    const double star = (ff != 0.0) ? ff * mp.beta2 * ipow(x, mp.p - order) : 0.0;
    const double y = 1.0 - x;
    switch (order) {
        case 1: return mp.beta1 + star - detail::logit(x);
        case 2: return star - 1.0 / (x * y);
        case 3: return star - (-1.0 / (x * x) + 1.0 / (y * y));
        default: return star - (2.0 / (x * x * x) + 2.0 / (y * y * y));
    }
}

enum class PointKind { local_max, local_min, degenerate };

/// A root of ell' in (0,1) together with its classification.
struct StationaryPoint {
    double x;
    double value;              ///< ell(x)
    PointKind kind;
    double second_derivative;  ///< ell''(x)
};

namespace detail {

inline constexpr double kDegenerateTol = 1e-8;  // |ell''| below this => degenerate
inline constexpr double kRootXtolDefault = 1e-13;

// Endpoint guards for bracketing ell'. 1e-12 suffices for moderate
// parameters; for large |beta| the outer roots move toward the endpoints and
// the guards shrink so that ell'(eps_lo) > 0 and ell'(1 - eps_hi) < 0 keep
// holding. Near x = 1 the guard is floored at representability; when the
// root is closer to 1 than that, callers fall back to the boundary limit.
inline double endpoint_eps_lo(const ModelParams& mp) {
    const double m = std::fabs(mp.beta1) + mp.p * std::fabs(mp.beta2) + 2.0;
    return std::clamp(std::exp(-m), 1e-300, 1e-12);
}

inline double endpoint_eps_hi(const ModelParams& mp) {
    const double m = mp.beta1 + mp.p * std::max(mp.beta2, 0.0) + 2.0;
    return std::clamp(std::exp(-m), 4e-16, 1e-12);
}

// Inflections of ell: roots of ell''(x) = p(p-1) beta2 x^(p-2) - 1/(x(1-x)),
// equivalently w(x) = x^(p-1)(1-x) = 1/(p(p-1) beta2). w is unimodal with
// maximum at (p-1)/p, so ell'' has zero or two roots; they exist exactly when
// beta2 exceeds the critical value p^(p-1)/(p-1)^p.
struct Inflections {
    bool present = false;
    double u1 = 0.0, u2 = 0.0;
};

inline Inflections find_inflections(const ModelParams& mp, double xtol) {
    Inflections out;
    if (mp.beta2 <= 0.0) return out;
    const int p = mp.p;
    const double target = 1.0 / (static_cast<double>(p) * (p - 1) * mp.beta2);
    const double xw = static_cast<double>(p - 1) / p;
    const double wmax = ipow(xw, p - 1) * (1.0 - xw);
    if (wmax <= target) return out;  // beta2 <= beta2_c: ell'' < 0 except possibly a tangency
    auto w = [p, target](double x) { return ipow(x, p - 1) * (1.0 - x) - target; };
    const double lo = 1e-300;
    out.u1 = find_root_brent(w, lo, xw, w(lo), wmax - target, xtol);
    out.u2 = find_root_brent(w, xw, 1.0, wmax - target, -target, xtol);
    out.present = true;
    return out;
}

inline PointKind classify(double d2) {
    if (std::fabs(d2) <= kDegenerateTol) return PointKind::degenerate;
    return d2 < 0.0 ? PointKind::local_max : PointKind::local_min;
}

}  // namespace detail

/// All stationary points of ell in (0,1), ordered by x. ell' decreases from
/// +inf at 0 to -inf at 1 and is monotone between consecutive inflections, so
/// bracketing on the inflection partition finds every root: the list has 1, 2
/// or 3 entries and never more than two local maxima.
inline std::vector<StationaryPoint> analyze_stationary(const ModelParams& mp,
                                                       double xtol = detail::kRootXtolDefault) {
    validate_params(mp);
    auto dl = [&mp](double x) { return ell_eval(mp, x, 1); };

    std::vector<double> cuts{detail::endpoint_eps_lo(mp)};
    const auto infl = detail::find_inflections(mp, xtol);
    if (infl.present) {
        cuts.push_back(infl.u1);
        cuts.push_back(infl.u2);
    }
    cuts.push_back(1.0 - detail::endpoint_eps_hi(mp));

    std::vector<double> roots;
    std::vector<double> fvals(cuts.size());
    for (std::size_t i = 0; i < cuts.size(); ++i) fvals[i] = dl(cuts[i]);
    // a root pinned closer to an endpoint than the guard: report the guard
    // point itself (the boundary limit at representable precision)
    if (fvals.front() < 0.0) roots.push_back(cuts.front());
    if (fvals.back() > 0.0) roots.push_back(cuts.back());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double fa = fvals[i], fb = fvals[i + 1];
        if (fa == 0.0 && i > 0) {  // root exactly at an inflection (spinodal tangency)
            roots.push_back(cuts[i]);
            continue;
        }
        if ((fa > 0.0) != (fb > 0.0))
            roots.push_back(find_root_brent(dl, cuts[i], cuts[i + 1], fa, fb, xtol));
    }
    // a tangency at an inflection leaves no sign change; catch it by value
    if (infl.present) {
        for (double u : {infl.u1, infl.u2}) {
            const double fu = dl(u);
            if (std::fabs(fu) <= 1e-11 * std::max(1.0, std::fabs(mp.beta1))) {
                bool dup = false;
                for (double r : roots)
                    if (std::fabs(r - u) <= 1e-8) dup = true;
                if (!dup) roots.push_back(u);
            }
        }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::fabs(a - b) <= 1e-10; }),
                roots.end());
    if (roots.empty())
        throw convergence_error("analyze_stationary: no stationary point located");

    std::vector<StationaryPoint> out;
    out.reserve(roots.size());
    for (double r : roots) {
        const double d2 = ell_eval(mp, r, 2);
        out.push_back({r, ell_eval(mp, r, 0), detail::classify(d2), d2});
    }
    return out;
}

/// Local maxima of ell whose value ties the best within tie_tol; one entry off
/// the transition curve, two exactly on it. A degenerate stationary point (the
/// critical point) counts as a maximizer.
inline std::vector<StationaryPoint> global_maximizers(const ModelParams& mp,
                                                      double tie_tol = 1e-10) {
    if (!(tie_tol > 0.0)) throw std::invalid_argument("global_maximizers: tie_tol must be > 0");
    auto pts = analyze_stationary(mp);
    std::vector<StationaryPoint> cand;
    for (const auto& sp : pts)
        if (sp.kind != PointKind::local_min) cand.push_back(sp);
    if (cand.empty()) cand = pts;  // defensive: a lone degenerate-min cannot happen
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& sp : cand) best = std::max(best, sp.value);
    std::vector<StationaryPoint> out;
    for (const auto& sp : cand)
        if (sp.value >= best - tie_tol) out.push_back(sp);
    return out;
}

}  // namespace pstar

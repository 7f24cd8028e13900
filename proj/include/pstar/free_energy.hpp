#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pstar/curve.hpp"
#include "pstar/errors.hpp"
#include "pstar/scalar.hpp"

namespace pstar {

/// Phase of a constrained-tilted model point relative to its U-shaped
/// bipodal region.
enum class RegionU { uniform, bipodal, boundary, critical };

namespace detail {

// Curve data shared by classification and evaluation on the (e, beta2) plane.
// Absent when beta2 is at or below the critical guard (the U region is open;
// inside the guard the maximizers are collapsed at e_c).
struct UContext {
    CriticalPoint cp;
    std::optional<CurvePoint> curve;
};

inline UContext e_beta2_context(int p, double beta2) {
    UContext ctx{critical_point(p), std::nullopt};
    if (beta2 - ctx.cp.beta2_c >= kCritGuard)
        ctx.curve = curve_point(p, q_inverse(p, beta2));
    return ctx;
}

inline UContext beta1_s_context(int p, double beta1) {
    UContext ctx{critical_point(p), std::nullopt};
    if (ctx.cp.beta1_c - beta1 >= kCritGuard) ctx.curve = curve_point(p, beta1);
    return ctx;
}

inline double uniform_free_energy_e(int p, double e, double beta2) {
    return beta2 * ipow(e, p) - entropy_I(e);
}

inline double bipodal_mix_e(const CurvePoint& c, int p, double e, double beta2,
                            bool star_only) {
    const double lambda = (c.x2 - e) / (c.x2 - c.x1);
    const double star = lambda * ipow(c.x1, p) + (1.0 - lambda) * ipow(c.x2, p);
    if (star_only) return star;
    return beta2 * star - (lambda * entropy_I(c.x1) + (1.0 - lambda) * entropy_I(c.x2));
}

}  // namespace detail

inline RegionU classify_e_beta2(int p, double e, double beta2,
                                double tol = detail::kRegionTol) {
    if (p < 2) throw std::domain_error("classify_e_beta2: p must be >= 2");
    const auto ctx = detail::e_beta2_context(p, beta2);
    if (std::fabs(beta2 - ctx.cp.beta2_c) <= tol && std::fabs(e - ctx.cp.e_c) <= tol)
        return RegionU::critical;
    if (!ctx.curve) {
        if (beta2 > ctx.cp.beta2_c && std::fabs(e - ctx.cp.e_c) <= tol)
            return RegionU::boundary;
        return RegionU::uniform;
    }
    const CurvePoint& c = *ctx.curve;
    if (std::fabs(e - c.x1) <= tol || std::fabs(e - c.x2) <= tol) return RegionU::boundary;
    if (c.x1 + tol < e && e < c.x2 - tol) return RegionU::bipodal;
    return RegionU::uniform;
}

/// Limiting free energy density psi(e, beta2): beta2 e^p - I(e) outside the
/// U region, the equal-maxima mixture inside; continuous across the boundary.
inline double free_energy_e(int p, double e, double beta2,
                            double tol = detail::kRegionTol) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("free_energy_e: e outside [0,1]");
    const auto ctx = detail::e_beta2_context(p, beta2);
    if (ctx.curve && ctx.curve->x1 + tol < e && e < ctx.curve->x2 - tol)
        return detail::bipodal_mix_e(*ctx.curve, p, e, beta2, /*star_only=*/false);
    return detail::uniform_free_energy_e(p, e, beta2);
}

/// Conjugate star density d psi(e, beta2) / d beta2: e^p in the uniform
/// phase, the chord mixture in the bipodal phase; continuous everywhere.
inline double star_density(int p, double e, double beta2,
                           double tol = detail::kRegionTol) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("star_density: e outside [0,1]");
    const auto ctx = detail::e_beta2_context(p, beta2);
    if (ctx.curve && ctx.curve->x1 + tol < e && e < ctx.curve->x2 - tol)
        return detail::bipodal_mix_e(*ctx.curve, p, e, beta2, /*star_only=*/true);
    return ipow(e, p);
}

inline RegionU classify_beta1_s(int p, double beta1, double s,
                                double tol = detail::kRegionTol) {
    if (p < 2) throw std::domain_error("classify_beta1_s: p must be >= 2");
    const auto ctx = detail::beta1_s_context(p, beta1);
    if (std::fabs(beta1 - ctx.cp.beta1_c) <= tol && std::fabs(s - ctx.cp.s_c) <= tol)
        return RegionU::critical;
    if (!ctx.curve) {
        if (beta1 < ctx.cp.beta1_c && std::fabs(s - ctx.cp.s_c) <= tol)
            return RegionU::boundary;
        return RegionU::uniform;
    }
    const double s1 = ipow(ctx.curve->x1, p);
    const double s2 = ipow(ctx.curve->x2, p);
    if (std::fabs(s - s1) <= tol || std::fabs(s - s2) <= tol) return RegionU::boundary;
    if (s1 + tol < s && s < s2 - tol) return RegionU::bipodal;
    return RegionU::uniform;
}

namespace detail {

inline double bipodal_mix_s(const CurvePoint& c, int p, double s, double beta1,
                            bool edge_only) {
    const double s1 = ipow(c.x1, p);
    const double s2 = ipow(c.x2, p);
    const double mu = (s2 - s) / (s2 - s1);
    const double edge = mu * c.x1 + (1.0 - mu) * c.x2;
    if (edge_only) return edge;
    return beta1 * edge - (mu * entropy_I(c.x1) + (1.0 - mu) * entropy_I(c.x2));
}

}  // namespace detail

/// Limiting free energy density psi(beta1, s): beta1 s^(1/p) - I(s^(1/p))
/// outside U, the equal-maxima mixture inside.
inline double free_energy_s(int p, double beta1, double s,
                            double tol = detail::kRegionTol) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("free_energy_s: s outside [0,1]");
    const auto ctx = detail::beta1_s_context(p, beta1);
    if (ctx.curve) {
        const double s1 = ipow(ctx.curve->x1, p);
        const double s2 = ipow(ctx.curve->x2, p);
        if (s1 + tol < s && s < s2 - tol)
            return detail::bipodal_mix_s(*ctx.curve, p, s, beta1, /*edge_only=*/false);
    }
    const double t = std::pow(s, 1.0 / p);
    return beta1 * t - entropy_I(t);
}

/// Conjugate edge density d psi(beta1, s) / d beta1.
inline double edge_density(int p, double beta1, double s,
                           double tol = detail::kRegionTol) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("edge_density: s outside [0,1]");
    const auto ctx = detail::beta1_s_context(p, beta1);
    if (ctx.curve) {
        const double s1 = ipow(ctx.curve->x1, p);
        const double s2 = ipow(ctx.curve->x2, p);
        if (s1 + tol < s && s < s2 - tol)
            return detail::bipodal_mix_s(*ctx.curve, p, s, beta1, /*edge_only=*/true);
    }
    return std::pow(s, 1.0 / p);
}

/// ERGM free energy sup over [0,1] of (beta1 x + beta2 x^p - I(x)), with the
/// attaining argmax set (two entries exactly on the transition curve).
struct ErgmFreeEnergy {
    double value;
    std::vector<double> argmax;
};

inline ErgmFreeEnergy ergm_free_energy(int p, double beta1, double beta2,
                                       double tie_tol = 1e-10) {
    const ModelParams mp{p, beta1, beta2};
    const auto maxima = global_maximizers(mp, tie_tol);
    ErgmFreeEnergy out;
    out.value = maxima.front().value - std::numbers::ln2_v<double>;
    for (const auto& sp : maxima) {
        out.value = std::max(out.value, sp.value - std::numbers::ln2_v<double>);
        out.argmax.push_back(sp.x);
    }
    return out;
}

}  // namespace pstar

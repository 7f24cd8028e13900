#pragma once

#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pstar/curve.hpp"
#include "pstar/entropy_surface.hpp"
#include "pstar/free_energy.hpp"
#include "pstar/scalar.hpp"

namespace pstar {

/// Fixed deterministic formatting for emitted numbers: 17 significant digits,
/// "-inf"/"inf" literals for infinities.
inline std::string fmt_g17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

enum class GridQuantity { psi_es, dpsi_de, dpsi_ds, psi_e_beta2, psi_beta1_s, region_tag };

inline const char* grid_quantity_name(GridQuantity q) {
    switch (q) {
        case GridQuantity::psi_es: return "psi_es";
        case GridQuantity::dpsi_de: return "dpsi_de";
        case GridQuantity::dpsi_ds: return "dpsi_ds";
        case GridQuantity::psi_e_beta2: return "psi_e_beta2";
        case GridQuantity::psi_beta1_s: return "psi_beta1_s";
        case GridQuantity::region_tag: return "region_tag";
    }
    return "unknown";
}

struct Axis {
    std::string name;
    std::vector<double> values;  ///< strictly increasing
};

/// A rectangular grid of evaluated values; values[i * axis2.size() + j]
/// corresponds to (axis1[i], axis2[j]). -inf cells are permitted.
struct SurfaceGrid {
    GridQuantity quantity;
    int p = 2;
    Axis axis1, axis2;
    std::vector<double> values;

    double at(std::size_t i, std::size_t j) const { return values[i * axis2.values.size() + j]; }
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 2) throw std::invalid_argument("linspace: need at least 2 points");
    std::vector<double> v(count);
    const double h = (hi - lo) / (count - 1);
    for (int i = 0; i < count; ++i) v[i] = lo + h * i;
    v.back() = hi;
    return v;
}

// Evaluate rows in parallel; each task owns a disjoint slice, so assembly is
// deterministic regardless of worker count.
template <class CellFn>
inline void fill_rows(SurfaceGrid& g, CellFn&& fn) {
    const std::size_t n1 = g.axis1.values.size();
    const std::size_t n2 = g.axis2.values.size();
    g.values.assign(n1 * n2, 0.0);
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t chunk = (n1 + workers - 1) / workers;
    std::vector<std::future<void>> futs;
    for (std::size_t lo = 0; lo < n1; lo += chunk) {
        const std::size_t hi = std::min(lo + chunk, n1);
        futs.push_back(std::async(std::launch::async, [&, lo, hi]() {
            for (std::size_t i = lo; i < hi; ++i)
                for (std::size_t j = 0; j < n2; ++j)
                    g.values[i * n2 + j] = fn(g.axis1.values[i], g.axis2.values[j]);
        }));
    }
    for (auto& f : futs) f.get();
}

inline int region_code(RegionU r) {
    switch (r) {
        case RegionU::uniform: return 0;
        case RegionU::bipodal: return 1;
        case RegionU::boundary: return 2;
        case RegionU::critical: return 3;
    }
    return -1;
}

// Per-column curve solves for the (e, beta2) plane, shared across all e.
struct CurveByParam {
    std::vector<UContext> ctx;
};

inline CurveByParam contexts_for_beta2(int p, const std::vector<double>& beta2s) {
    CurveByParam out;
    out.ctx.reserve(beta2s.size());
    for (double b2 : beta2s) out.ctx.push_back(e_beta2_context(p, b2));
    return out;
}

inline CurveByParam contexts_for_beta1(int p, const std::vector<double>& beta1s) {
    CurveByParam out;
    out.ctx.reserve(beta1s.size());
    for (double b1 : beta1s) out.ctx.push_back(beta1_s_context(p, b1));
    return out;
}

}  // namespace detail

/// psi(e,s) over [0,1]^2; cells outside the closure of D are -inf.
inline SurfaceGrid make_grid_psi_es(int p, int resolution) {
    SurfaceGrid g;
    g.quantity = GridQuantity::psi_es;
    g.p = p;
    g.axis1 = {"e", detail::linspace(0.0, 1.0, resolution)};
    g.axis2 = {"s", detail::linspace(0.0, 1.0, resolution)};
    detail::fill_rows(g, [p](double e, double s) { return entropy(p, e, s); });
    return g;
}

/// psi(e, beta2) over [0,1] x [b2_lo, b2_hi].
inline SurfaceGrid make_grid_psi_e_beta2(int p, int resolution, double b2_lo, double b2_hi) {
    SurfaceGrid g;
    g.quantity = GridQuantity::psi_e_beta2;
    g.p = p;
    g.axis1 = {"e", detail::linspace(0.0, 1.0, resolution)};
    g.axis2 = {"beta2", detail::linspace(b2_lo, b2_hi, resolution)};
    const auto by = detail::contexts_for_beta2(p, g.axis2.values);
    const std::size_t n2 = g.axis2.values.size();
    g.values.assign(g.axis1.values.size() * n2, 0.0);
    for (std::size_t i = 0; i < g.axis1.values.size(); ++i) {
        const double e = g.axis1.values[i];
        for (std::size_t j = 0; j < n2; ++j) {
            const auto& ctx = by.ctx[j];
            const double b2 = g.axis2.values[j];
            double v;
            if (ctx.curve && ctx.curve->x1 < e && e < ctx.curve->x2)
                v = detail::bipodal_mix_e(*ctx.curve, p, e, b2, false);
            else
                v = detail::uniform_free_energy_e(p, e, b2);
            g.values[i * n2 + j] = v;
        }
    }
    return g;
}

/// d psi(e,beta2)/d e: p beta2 e^(p-1) - logit(e) in the uniform phase and
/// -q_inverse(beta2), constant in e, inside the U region.
inline SurfaceGrid make_grid_dpsi_de(int p, int resolution, double b2_lo, double b2_hi) {
    SurfaceGrid g;
    g.quantity = GridQuantity::dpsi_de;
    g.p = p;
    g.axis1 = {"e", detail::linspace(0.0, 1.0, resolution)};
    g.axis2 = {"beta2", detail::linspace(b2_lo, b2_hi, resolution)};
    const auto by = detail::contexts_for_beta2(p, g.axis2.values);
    const std::size_t n2 = g.axis2.values.size();
    g.values.assign(g.axis1.values.size() * n2, 0.0);
    for (std::size_t i = 0; i < g.axis1.values.size(); ++i) {
        const double e = g.axis1.values[i];
        for (std::size_t j = 0; j < n2; ++j) {
            const auto& ctx = by.ctx[j];
            const double b2 = g.axis2.values[j];
            double v;
            if (ctx.curve && ctx.curve->x1 < e && e < ctx.curve->x2)
                v = -ctx.curve->beta1;
            else if (e == 0.0)
                v = std::numeric_limits<double>::infinity();
            else if (e == 1.0)
                v = -std::numeric_limits<double>::infinity();
            else
                v = p * b2 * ipow(e, p - 1) - detail::logit(e);
            g.values[i * n2 + j] = v;
        }
    }
    return g;
}

/// psi(beta1, s) over [b1_lo, b1_hi] x [0,1].
inline SurfaceGrid make_grid_psi_beta1_s(int p, int resolution, double b1_lo, double b1_hi) {
    SurfaceGrid g;
    g.quantity = GridQuantity::psi_beta1_s;
    g.p = p;
    g.axis1 = {"beta1", detail::linspace(b1_lo, b1_hi, resolution)};
    g.axis2 = {"s", detail::linspace(0.0, 1.0, resolution)};
    const auto by = detail::contexts_for_beta1(p, g.axis1.values);
    const std::size_t n2 = g.axis2.values.size();
    g.values.assign(g.axis1.values.size() * n2, 0.0);
    for (std::size_t i = 0; i < g.axis1.values.size(); ++i) {
        const auto& ctx = by.ctx[i];
        const double b1 = g.axis1.values[i];
        for (std::size_t j = 0; j < n2; ++j) {
            const double s = g.axis2.values[j];
            double v;
            if (ctx.curve && ipow(ctx.curve->x1, p) < s && s < ipow(ctx.curve->x2, p)) {
                v = detail::bipodal_mix_s(*ctx.curve, p, s, b1, false);
            } else {
                const double t = std::pow(s, 1.0 / p);
                v = b1 * t - entropy_I(t);
            }
            g.values[i * n2 + j] = v;
        }
    }
    return g;
}

/// d psi(beta1,s)/d s: (beta1 - logit(t)) t^(1-p)/p with t = s^(1/p) in the
/// uniform phase and -q(beta1) inside the U region.
inline SurfaceGrid make_grid_dpsi_ds(int p, int resolution, double b1_lo, double b1_hi) {
    SurfaceGrid g;
    g.quantity = GridQuantity::dpsi_ds;
    g.p = p;
    g.axis1 = {"beta1", detail::linspace(b1_lo, b1_hi, resolution)};
    g.axis2 = {"s", detail::linspace(0.0, 1.0, resolution)};
    const auto by = detail::contexts_for_beta1(p, g.axis1.values);
    const std::size_t n2 = g.axis2.values.size();
    g.values.assign(g.axis1.values.size() * n2, 0.0);
    for (std::size_t i = 0; i < g.axis1.values.size(); ++i) {
        const auto& ctx = by.ctx[i];
        const double b1 = g.axis1.values[i];
        for (std::size_t j = 0; j < n2; ++j) {
            const double s = g.axis2.values[j];
            double v;
            if (ctx.curve && ipow(ctx.curve->x1, p) < s && s < ipow(ctx.curve->x2, p)) {
                v = -ctx.curve->beta2;
            } else if (s == 0.0) {
                v = std::numeric_limits<double>::infinity();
            } else if (s == 1.0) {
                v = -std::numeric_limits<double>::infinity();
            } else {
                const double t = std::pow(s, 1.0 / p);
                v = (b1 - detail::logit(t)) * std::pow(t, 1 - p) / p;
            }
            g.values[i * n2 + j] = v;
        }
    }
    return g;
}

enum class RegionPlane { e_beta2, beta1_s };

/// Region tags (0 uniform, 1 bipodal, 2 boundary, 3 critical) over one of the
/// two tilted planes; the U-shaped bipodal set is read straight off the grid.
inline SurfaceGrid make_grid_region_tag(int p, int resolution, RegionPlane plane,
                                        double plo, double phi) {
    SurfaceGrid g;
    g.quantity = GridQuantity::region_tag;
    g.p = p;
    if (plane == RegionPlane::e_beta2) {
        g.axis1 = {"e", detail::linspace(0.0, 1.0, resolution)};
        g.axis2 = {"beta2", detail::linspace(plo, phi, resolution)};
        const auto by = detail::contexts_for_beta2(p, g.axis2.values);
        const std::size_t n2 = g.axis2.values.size();
        g.values.assign(g.axis1.values.size() * n2, 0.0);
        const CriticalPoint cp = critical_point(p);
        for (std::size_t i = 0; i < g.axis1.values.size(); ++i) {
            const double e = g.axis1.values[i];
            for (std::size_t j = 0; j < n2; ++j) {
                const double b2 = g.axis2.values[j];
                const auto& ctx = by.ctx[j];
                RegionU r;
                const double tol = detail::kRegionTol;
                if (std::fabs(b2 - cp.beta2_c) <= tol && std::fabs(e - cp.e_c) <= tol)
                    r = RegionU::critical;
                else if (!ctx.curve)
                    r = (b2 > cp.beta2_c && std::fabs(e - cp.e_c) <= tol) ? RegionU::boundary
                                                                          : RegionU::uniform;
                else if (std::fabs(e - ctx.curve->x1) <= tol || std::fabs(e - ctx.curve->x2) <= tol)
                    r = RegionU::boundary;
                else if (ctx.curve->x1 + tol < e && e < ctx.curve->x2 - tol)
                    r = RegionU::bipodal;
                else
                    r = RegionU::uniform;
                g.values[i * n2 + j] = detail::region_code(r);
            }
        }
    } else {
        g.axis1 = {"beta1", detail::linspace(plo, phi, resolution)};
        g.axis2 = {"s", detail::linspace(0.0, 1.0, resolution)};
        const auto by = detail::contexts_for_beta1(p, g.axis1.values);
        const std::size_t n2 = g.axis2.values.size();
        g.values.assign(g.axis1.values.size() * n2, 0.0);
        const CriticalPoint cp = critical_point(p);
        for (std::size_t i = 0; i < g.axis1.values.size(); ++i) {
            const double b1 = g.axis1.values[i];
            const auto& ctx = by.ctx[i];
            for (std::size_t j = 0; j < n2; ++j) {
                const double s = g.axis2.values[j];
                RegionU r;
                const double tol = detail::kRegionTol;
                if (std::fabs(b1 - cp.beta1_c) <= tol && std::fabs(s - cp.s_c) <= tol)
                    r = RegionU::critical;
                else if (!ctx.curve)
                    r = (b1 < cp.beta1_c && std::fabs(s - cp.s_c) <= tol) ? RegionU::boundary
                                                                          : RegionU::uniform;
                else {
                    const double s1 = ipow(ctx.curve->x1, p);
                    const double s2 = ipow(ctx.curve->x2, p);
                    if (std::fabs(s - s1) <= tol || std::fabs(s - s2) <= tol)
                        r = RegionU::boundary;
                    else if (s1 + tol < s && s < s2 - tol)
                        r = RegionU::bipodal;
                    else
                        r = RegionU::uniform;
                }
                g.values[i * n2 + j] = detail::region_code(r);
            }
        }
    }
    return g;
}

/// CSV: header row, one line per cell in row-major order, LF endings.
inline void write_grid_csv(const SurfaceGrid& g, std::ostream& os) {
    os << g.axis1.name << ',' << g.axis2.name << ',' << grid_quantity_name(g.quantity) << '\n';
    const std::size_t n2 = g.axis2.values.size();
    for (std::size_t i = 0; i < g.axis1.values.size(); ++i)
        for (std::size_t j = 0; j < n2; ++j)
            os << fmt_g17(g.axis1.values[i]) << ',' << fmt_g17(g.axis2.values[j]) << ','
               << fmt_g17(g.values[i * n2 + j]) << '\n';
}

namespace detail {

inline void json_number(std::ostream& os, double v) {
    if (std::isfinite(v))
        os << fmt_g17(v);
    else
        os << '"' << fmt_g17(v) << '"';  // JSON has no inf literal
}

inline void json_array(std::ostream& os, const std::vector<double>& v) {
    os << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        json_number(os, v[i]);
    }
    os << ']';
}

}  // namespace detail

/// JSON: one top-level object with both axes and the row-major value array.
inline void write_grid_json(const SurfaceGrid& g, std::ostream& os) {
    os << "{\"quantity\":\"" << grid_quantity_name(g.quantity) << "\",\"p\":" << g.p
       << ",\"axis1\":{\"name\":\"" << g.axis1.name << "\",\"values\":";
    detail::json_array(os, g.axis1.values);
    os << "},\"axis2\":{\"name\":\"" << g.axis2.name << "\",\"values\":";
    detail::json_array(os, g.axis2.values);
    os << "},\"values\":";
    detail::json_array(os, g.values);
    os << "}\n";
}

}  // namespace pstar

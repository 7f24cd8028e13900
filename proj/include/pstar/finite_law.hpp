#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "pstar/errors.hpp"

namespace pstar {

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr std::size_t kMemBudgetBytes = std::size_t{2} << 30;  // 2 GiB

inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = a > b ? a : b;
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

inline double log_binom(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline std::int64_t ipow_i64(std::int64_t x, int k) {
    std::int64_t r = 1;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

}  // namespace detail

/// Exact joint law of (E, S) = (sum of out-degrees, sum of p-th powers of
/// out-degrees) over uniform n-node digraphs, stored as log counts. Both
/// graph densities are functions of the out-degree vector alone, and each
/// row's degree d carries weight C(n,d), so the table is an n-fold
/// convolution computed by dynamic programming in log space.
struct FiniteLaw {
    int n = 0;
    int p = 0;
    std::int64_t e_max = 0;  ///< n^2
    std::int64_t s_max = 0;  ///< n^(p+1)
    std::vector<double> log_weight;  ///< dense (e_max+1) x (s_max+1), row-major, -inf absent

    double at(std::int64_t E, std::int64_t S) const {
        if (E < 0 || E > e_max || S < 0 || S > s_max) return detail::kNegInf;
        return log_weight[static_cast<std::size_t>(E) * (s_max + 1) + S];
    }
    double& cell(std::int64_t E, std::int64_t S) {
        return log_weight[static_cast<std::size_t>(E) * (s_max + 1) + S];
    }

    /// log of the total digraph count; equals n^2 log 2 up to summation error.
    double log_total() const {
        double m = detail::kNegInf;
        for (double v : log_weight) m = m > v ? m : v;
        if (m == detail::kNegInf) return m;
        double acc = 0.0;
        for (double v : log_weight)
            if (v != detail::kNegInf) acc += std::exp(v - m);
        return m + std::log(acc);
    }
};

/// Largest n whose two resident DP layers fit the memory budget, capped at
/// the supported defaults for small p.
inline int finite_law_n_max(int p, std::size_t mem_budget = detail::kMemBudgetBytes) {
    if (p < 2) throw std::domain_error("finite_law_n_max: p must be >= 2");
    const int cap = p == 2 ? 16 : (p == 3 ? 12 : 64);
    int best = 0;
    for (int n = 1; n <= cap; ++n) {
        const long double states =
            (static_cast<long double>(n) * n + 1) *
            (std::pow(static_cast<long double>(n), p + 1) + 1);
        if (states * 8.0L * 2.0L > static_cast<long double>(mem_budget)) break;
        best = n;
    }
    return best;
}

inline FiniteLaw exact_joint_law(int n, int p,
                                 std::size_t mem_budget = detail::kMemBudgetBytes) {
    if (p < 2) throw std::domain_error("exact_joint_law: p must be >= 2");
    if (n < 1) throw std::domain_error("exact_joint_law: n must be >= 1");
    if (p + 1 >= 60 || std::pow(static_cast<double>(n), p + 1) > 9e15)
        throw resource_error("exact_joint_law: state space exceeds index range");

    FiniteLaw law;
    law.n = n;
    law.p = p;
    law.e_max = static_cast<std::int64_t>(n) * n;
    law.s_max = detail::ipow_i64(n, p + 1);
    const std::size_t cells = static_cast<std::size_t>(law.e_max + 1) * (law.s_max + 1);
    if (cells * sizeof(double) * 2 > mem_budget)
        throw resource_error("exact_joint_law: state space exceeds the memory budget");

    std::vector<double> logc(n + 1);
    std::vector<std::int64_t> dpow(n + 1);
    for (int d = 0; d <= n; ++d) {
        logc[d] = detail::log_binom(n, d);
        dpow[d] = detail::ipow_i64(d, p);
    }

    const std::int64_t stride = law.s_max + 1;
    std::vector<double> src(cells, detail::kNegInf);
    std::vector<double> dst(cells, detail::kNegInf);
    src[0] = 0.0;
    const std::int64_t row_s_max = detail::ipow_i64(n, p);
    for (int i = 0; i < n; ++i) {
        std::fill(dst.begin(), dst.end(), detail::kNegInf);
        const std::int64_t e_hi = static_cast<std::int64_t>(i) * n;
        const std::int64_t s_hi = static_cast<std::int64_t>(i) * row_s_max;
        for (int d = 0; d <= n; ++d) {
            const double w = logc[d];
            const std::int64_t ds = dpow[d];
            for (std::int64_t E = 0; E <= e_hi; ++E) {
                const double* srow = src.data() + E * stride;
                double* drow = dst.data() + (E + d) * stride + ds;
                for (std::int64_t S = 0; S <= s_hi; ++S) {
                    const double v = srow[S];
                    if (v == detail::kNegInf) continue;
                    drow[S] = detail::log_add(drow[S], v + w);
                }
            }
        }
        src.swap(dst);
    }
    law.log_weight = std::move(src);
    return law;
}

/// Integer index window for the open density box (e-delta, e+delta) x
/// (s-delta, s+delta); boundary lattice points are excluded.
struct WindowIdx {
    std::int64_t e_lo = 0, e_hi = -1, s_lo = 0, s_hi = -1;
    bool empty() const { return e_lo > e_hi || s_lo > s_hi; }
};

inline WindowIdx window_indices(int n, int p, double e, double s, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("window_indices: delta must be > 0");
    const double n2 = static_cast<double>(n) * n;
    const double np1 = std::pow(static_cast<double>(n), p + 1);
    WindowIdx w;
    w.e_lo = static_cast<std::int64_t>(std::floor((e - delta) * n2)) + 1;
    w.e_hi = static_cast<std::int64_t>(std::ceil((e + delta) * n2)) - 1;
    w.s_lo = static_cast<std::int64_t>(std::floor((s - delta) * np1)) + 1;
    w.s_hi = static_cast<std::int64_t>(std::ceil((s + delta) * np1)) - 1;
    w.e_lo = std::max<std::int64_t>(w.e_lo, 0);
    w.s_lo = std::max<std::int64_t>(w.s_lo, 0);
    w.e_hi = std::min<std::int64_t>(w.e_hi, static_cast<std::int64_t>(n) * n);
    w.s_hi = std::min<std::int64_t>(w.s_hi, detail::ipow_i64(n, p + 1));
    return w;
}

/// psi_n^delta(e,s): the normalized log probability of the open window under
/// the uniform measure; -inf when the window captures no lattice point.
inline double window_log_prob(const FiniteLaw& law, double e, double s, double delta) {
    const WindowIdx w = window_indices(law.n, law.p, e, s, delta);
    if (w.empty()) return detail::kNegInf;
    double m = detail::kNegInf;
    for (std::int64_t E = w.e_lo; E <= w.e_hi; ++E)
        for (std::int64_t S = w.s_lo; S <= w.s_hi; ++S) {
            const double v = law.at(E, S);
            if (v > m) m = v;
        }
    if (m == detail::kNegInf) return detail::kNegInf;
    double acc = 0.0;
    for (std::int64_t E = w.e_lo; E <= w.e_hi; ++E)
        for (std::int64_t S = w.s_lo; S <= w.s_hi; ++S) {
            const double v = law.at(E, S);
            if (v != detail::kNegInf) acc += std::exp(v - m);
        }
    const double lse = m + std::log(acc);
    return lse / (static_cast<double>(law.n) * law.n) - std::numbers::ln2_v<double>;
}

/// Exact distribution of one row sum under the window-conditioned measure.
struct ConditionalRowLaw {
    std::vector<double> probabilities;  ///< indexed by d in 0..n, sums to 1
};

namespace detail {

// Backward completion tables: B[m][E][S] = log-weighted count of ways m more
// rows starting from accumulated (E,S) land the total in the window.
// B[0] is the window indicator; B[m] = sum_d C(n,d) B[m-1][E+d][S+d^p].
inline std::vector<std::vector<double>> backward_tables(
    int n, int p, const WindowIdx& w, int layers,
    std::size_t mem_budget = kMemBudgetBytes, bool keep_all = true) {
    const std::int64_t e_max = static_cast<std::int64_t>(n) * n;
    const std::int64_t s_max = ipow_i64(n, p + 1);
    const std::int64_t stride = s_max + 1;
    const std::size_t cells = static_cast<std::size_t>(e_max + 1) * (s_max + 1);
    const std::size_t resident = keep_all ? static_cast<std::size_t>(layers) + 1 : 2;
    if (cells * sizeof(double) * resident > mem_budget)
        throw resource_error("backward_tables: table set exceeds the memory budget");

    std::vector<double> logc(n + 1);
    std::vector<std::int64_t> dpow(n + 1);
    for (int d = 0; d <= n; ++d) {
        logc[d] = log_binom(n, d);
        dpow[d] = ipow_i64(d, p);
    }

    std::vector<std::vector<double>> B;
    B.reserve(keep_all ? layers + 1 : 2);
    B.emplace_back(cells, kNegInf);
    for (std::int64_t E = w.e_lo; E <= w.e_hi; ++E)
        for (std::int64_t S = w.s_lo; S <= w.s_hi; ++S)
            B[0][static_cast<std::size_t>(E) * stride + S] = 0.0;

    for (int m = 1; m <= layers; ++m) {
        if (keep_all)
            B.emplace_back(cells, kNegInf);
        else if (B.size() < 2)
            B.emplace_back(cells, kNegInf);
        else {
            std::swap(B[0], B[1]);
            std::fill(B[1].begin(), B[1].end(), kNegInf);
        }
        const auto& prev = keep_all ? B[m - 1] : B[0];
        auto& cur = keep_all ? B[m] : B[1];
        // accumulated totals after n-m rows are bounded by (n-m) * n per row
        const std::int64_t e_hi = std::min<std::int64_t>(
            e_max, static_cast<std::int64_t>(n - m) * n);
        const std::int64_t s_hi = std::min<std::int64_t>(
            s_max, static_cast<std::int64_t>(n - m) * ipow_i64(n, p));
        for (int d = 0; d <= n; ++d) {
            const double wgt = logc[d];
            const std::int64_t ds = dpow[d];
            for (std::int64_t E = 0; E <= e_hi; ++E) {
                const double* prow = prev.data() + (E + d) * stride + ds;
                double* crow = cur.data() + E * stride;
                for (std::int64_t S = 0; S <= s_hi; ++S) {
                    const double v = prow[S];
                    if (v == kNegInf) continue;
                    crow[S] = log_add(crow[S], v + wgt);
                }
            }
        }
    }
    return B;
}

}  // namespace detail

inline ConditionalRowLaw conditional_row_law(int n, int p, double e, double s,
                                             double delta) {
    const WindowIdx w = window_indices(n, p, e, s, delta);
    if (w.empty()) throw empty_window_error("conditional_row_law: window has no lattice points");
    const auto B = detail::backward_tables(n, p, w, n - 1 > 0 ? n - 1 : 0,
                                           detail::kMemBudgetBytes, /*keep_all=*/false);
    const std::int64_t stride = detail::ipow_i64(n, p + 1) + 1;
    const auto& Bm = B.back();
    std::vector<double> logw(n + 1, detail::kNegInf);
    double m = detail::kNegInf;
    for (int d = 0; d <= n; ++d) {
        const std::size_t idx =
            static_cast<std::size_t>(d) * stride + detail::ipow_i64(d, p);
        const double v = Bm[idx];
        if (v == detail::kNegInf) continue;
        logw[d] = detail::log_binom(n, d) + v;
        if (logw[d] > m) m = logw[d];
    }
    if (m == detail::kNegInf)
        throw empty_window_error("conditional_row_law: window is unreachable");
    ConditionalRowLaw out;
    out.probabilities.assign(n + 1, 0.0);
    double tot = 0.0;
    for (int d = 0; d <= n; ++d)
        if (logw[d] != detail::kNegInf) tot += (out.probabilities[d] = std::exp(logw[d] - m));
    for (double& q : out.probabilities) q /= tot;
    return out;
}

/// Exact i.i.d. samples of the out-degree vector (d_1..d_n) from the
/// window-conditioned measure, by backward DP sampling. Identical seeds give
/// identical output.
inline std::vector<std::vector<int>> sample_conditioned(int n, int p, double e,
                                                        double s, double delta,
                                                        std::uint64_t seed,
                                                        int count) {
    if (count < 1) throw std::domain_error("sample_conditioned: count must be >= 1");
    const WindowIdx w = window_indices(n, p, e, s, delta);
    if (w.empty()) throw empty_window_error("sample_conditioned: window has no lattice points");
    const auto B = detail::backward_tables(n, p, w, n - 1 > 0 ? n - 1 : 0);
    const std::int64_t stride = detail::ipow_i64(n, p + 1) + 1;
    std::vector<std::int64_t> dpow(n + 1);
    for (int d = 0; d <= n; ++d) dpow[d] = detail::ipow_i64(d, p);

    std::mt19937_64 rng(seed);
    auto uniform01 = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };

    std::vector<std::vector<int>> samples;
    samples.reserve(count);
    std::vector<double> wts(n + 1);
    for (int k = 0; k < count; ++k) {
        std::vector<int> degs(n);
        std::int64_t accE = 0, accS = 0;
        for (int i = 0; i < n; ++i) {
            const int m = n - 1 - i;  // rows remaining after this draw
            const auto& Bm = B[m];
            double mx = detail::kNegInf;
            for (int d = 0; d <= n; ++d) {
                const std::size_t idx =
                    static_cast<std::size_t>(accE + d) * stride + (accS + dpow[d]);
                const double v = Bm[idx];
                wts[d] = (v == detail::kNegInf) ? detail::kNegInf
                                                : detail::log_binom(n, d) + v;
                if (wts[d] > mx) mx = wts[d];
            }
            if (mx == detail::kNegInf)
                throw empty_window_error("sample_conditioned: dead end in backward pass");
            double tot = 0.0;
            for (int d = 0; d <= n; ++d)
                tot += (wts[d] = wts[d] == detail::kNegInf ? 0.0 : std::exp(wts[d] - mx));
            const double u = uniform01() * tot;
            double cum = 0.0;
            int pick = -1, last_pos = -1;
            for (int d = 0; d <= n; ++d) {
                if (wts[d] <= 0.0) continue;
                last_pos = d;
                cum += wts[d];
                if (u < cum) { pick = d; break; }
            }
            if (pick < 0) pick = last_pos;  // u == tot after rounding
            degs[i] = pick;
            accE += pick;
            accS += dpow[pick];
        }
        samples.push_back(std::move(degs));
    }
    return samples;
}

// ---------------------------------------------------------------------------
// Binary cache: header (magic, version, n, p, entry count), then sorted
// (E, S, log_weight) triples as little-endian 8-byte integers and IEEE
// doubles. Purely an optimization; a loaded table is bit-identical to a
// rebuilt one.

namespace detail {

inline constexpr char kLawMagic[8] = {'P', 'S', 'T', 'R', 'L', 'A', 'W', '1'};

inline void store_le64(std::ostream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(buf, 8);
}

inline std::uint64_t load_le64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace detail

inline void save_finite_law(const FiniteLaw& law, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_finite_law: cannot open " + path);
    os.write(detail::kLawMagic, 8);
    detail::store_le64(os, 1);  // version
    detail::store_le64(os, static_cast<std::uint64_t>(law.n));
    detail::store_le64(os, static_cast<std::uint64_t>(law.p));
    std::uint64_t count = 0;
    for (double v : law.log_weight)
        if (v != detail::kNegInf) ++count;
    detail::store_le64(os, count);
    for (std::int64_t E = 0; E <= law.e_max; ++E)
        for (std::int64_t S = 0; S <= law.s_max; ++S) {
            const double v = law.at(E, S);
            if (v == detail::kNegInf) continue;
            detail::store_le64(os, static_cast<std::uint64_t>(E));
            detail::store_le64(os, static_cast<std::uint64_t>(S));
            detail::store_le64(os, std::bit_cast<std::uint64_t>(v));
        }
    if (!os) throw std::runtime_error("save_finite_law: write failed for " + path);
}

inline FiniteLaw load_finite_law(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_finite_law: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, detail::kLawMagic, 8) != 0)
        throw std::runtime_error("load_finite_law: bad magic in " + path);
    const std::uint64_t version = detail::load_le64(is);
    if (version != 1) throw std::runtime_error("load_finite_law: unsupported version");
    const int n = static_cast<int>(detail::load_le64(is));
    const int p = static_cast<int>(detail::load_le64(is));
    const std::uint64_t count = detail::load_le64(is);
    if (n < 1 || p < 2) throw std::runtime_error("load_finite_law: corrupt header");

    FiniteLaw law;
    law.n = n;
    law.p = p;
    law.e_max = static_cast<std::int64_t>(n) * n;
    law.s_max = detail::ipow_i64(n, p + 1);
    law.log_weight.assign(
        static_cast<std::size_t>(law.e_max + 1) * (law.s_max + 1), detail::kNegInf);
    for (std::uint64_t k = 0; k < count; ++k) {
        const std::int64_t E = static_cast<std::int64_t>(detail::load_le64(is));
        const std::int64_t S = static_cast<std::int64_t>(detail::load_le64(is));
        const double v = std::bit_cast<double>(detail::load_le64(is));
        if (E < 0 || E > law.e_max || S < 0 || S > law.s_max)
            throw std::runtime_error("load_finite_law: entry out of range");
        law.cell(E, S) = v;
    }
    if (!is) throw std::runtime_error("load_finite_law: truncated file");
    return law;
}

}  // namespace pstar

// Command-line surface over the library: curve traces, surface grids, point
// queries, finite-n comparisons, and the exact-law oracle. All numeric output
// goes through one fixed formatter (17 significant digits, -inf/inf
// literals), so identical invocations are byte-identical.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pstar/pstar.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitCompute = 3;
constexpr int kExitComparison = 4;

struct OutputTarget {
    std::string path;  // empty: stdout

    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open output file: " + path);
        os << text;
        if (!os) throw std::runtime_error("write failed: " + path);
    }
};

std::string fmt(double v) { return pstar::fmt_g17(v); }

std::string kv_json(const std::vector<std::pair<std::string, std::string>>& fields) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << '"' << fields[i].first << "\":" << fields[i].second;
    }
    os << "}\n";
    return os.str();
}

std::string kv_csv(const std::vector<std::pair<std::string, std::string>>& fields) {
    std::ostringstream head, row;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) {
            head << ',';
            row << ',';
        }
        head << fields[i].first;
        std::string v = fields[i].second;
        if (!v.empty() && v.front() == '"') v = v.substr(1, v.size() - 2);
        row << v;
    }
    return head.str() + "\n" + row.str() + "\n";
}

std::string num(double v) {
    if (std::isfinite(v)) return fmt(v);
    return '"' + fmt(v) + '"';
}

struct CommonOpts {
    std::string format;  // "json" or "csv"
    OutputTarget out;
    double tol_root = 1e-13;
    double tol_region = 1e-9;
};

void add_common(CLI::App* cmd, CommonOpts& c, const char* default_format) {
    c.format = default_format;
    cmd->add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", c.out.path, "write output to a file instead of stdout");
    cmd->add_option("--tol-root", c.tol_root, "root-solve interval tolerance")
        ->envname("PSTAR_TOL_ROOT");
    cmd->add_option("--tol-region", c.tol_region, "region classification tolerance")
        ->envname("PSTAR_TOL_REGION");
}

int run_critical(int p, const CommonOpts& c) {
    const auto cp = pstar::critical_point(p);
    std::vector<std::pair<std::string, std::string>> fields = {
        {"p", std::to_string(p)},
        {"beta1_c", num(cp.beta1_c)},
        {"beta2_c", num(cp.beta2_c)},
        {"e_c", num(cp.e_c)},
        {"s_c", num(cp.s_c)},
    };
    c.out.write(c.format == "json" ? kv_json(fields) : kv_csv(fields));
    return kExitOk;
}

int run_curve(int p, double b1_min, double b1_max, int steps, const CommonOpts& c) {
    const auto cp = pstar::critical_point(p);
    if (!(b1_min < b1_max) || !(b1_max < cp.beta1_c)) {
        std::cerr << "curve: range must satisfy beta1-min < beta1-max < beta1_c = "
                  << fmt(cp.beta1_c) << "\n";
        return kExitUsage;
    }
    std::vector<pstar::CurvePoint> rows;
    rows.reserve(steps);
    for (int i = 0; i < steps; ++i) {
        const double b1 = b1_min + (b1_max - b1_min) * i / (steps - 1);
        rows.push_back(pstar::curve_point(p, b1));
    }
    static const char* cols[] = {"beta1",      "beta2",      "x1",
                                 "x2",         "qprime",     "dx1_dbeta1",
                                 "dx2_dbeta1"};
    std::ostringstream os;
    if (c.format == "csv") {
        for (int k = 0; k < 7; ++k) os << (k ? "," : "") << cols[k];
        os << '\n';
        for (const auto& r : rows)
            os << fmt(r.beta1) << ',' << fmt(r.beta2) << ',' << fmt(r.x1) << ',' << fmt(r.x2)
               << ',' << fmt(r.qprime) << ',' << fmt(r.dx1_dbeta1) << ',' << fmt(r.dx2_dbeta1)
               << '\n';
    } else {
        os << "{\"columns\":[";
        for (int k = 0; k < 7; ++k) os << (k ? "," : "") << '"' << cols[k] << '"';
        os << "],\"rows\":[";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (i) os << ',';
            os << '[' << num(r.beta1) << ',' << num(r.beta2) << ',' << num(r.x1) << ','
               << num(r.x2) << ',' << num(r.qprime) << ',' << num(r.dx1_dbeta1) << ','
               << num(r.dx2_dbeta1) << ']';
        }
        os << "]}\n";
    }
    c.out.write(os.str());
    return kExitOk;
}

int run_grid(int p, const std::string& quantity, int resolution, const std::string& plane,
             std::optional<double> b1_min, std::optional<double> b1_max,
             std::optional<double> b2_min, std::optional<double> b2_max, const CommonOpts& c) {
    const auto cp = pstar::critical_point(p);
    const double b2lo = b2_min.value_or(0.0);
    const double b2hi = b2_max.value_or(3.0 * cp.beta2_c);
    const double b1lo = b1_min.value_or(cp.beta1_c - 4.0);
    const double b1hi = b1_max.value_or(cp.beta1_c + 1.0);

    pstar::SurfaceGrid g;
    if (quantity == "psi_es")
        g = pstar::make_grid_psi_es(p, resolution);
    else if (quantity == "psi_e_beta2")
        g = pstar::make_grid_psi_e_beta2(p, resolution, b2lo, b2hi);
    else if (quantity == "dpsi_de")
        g = pstar::make_grid_dpsi_de(p, resolution, b2lo, b2hi);
    else if (quantity == "psi_beta1_s")
        g = pstar::make_grid_psi_beta1_s(p, resolution, b1lo, b1hi);
    else if (quantity == "dpsi_ds")
        g = pstar::make_grid_dpsi_ds(p, resolution, b1lo, b1hi);
    else if (quantity == "region_tag") {
        if (plane == "beta1-s")
            g = pstar::make_grid_region_tag(p, resolution, pstar::RegionPlane::beta1_s, b1lo,
                                            b1hi);
        else
            g = pstar::make_grid_region_tag(p, resolution, pstar::RegionPlane::e_beta2, b2lo,
                                            b2hi);
    } else {
        std::cerr << "grid: unknown quantity " << quantity << "\n";
        return kExitUsage;
    }

    std::ostringstream os;
    if (c.format == "csv")
        pstar::write_grid_csv(g, os);
    else
        pstar::write_grid_json(g, os);
    c.out.write(os.str());
    return kExitOk;
}

int run_point(int p, std::optional<double> e, std::optional<double> s,
              std::optional<double> b1, std::optional<double> b2, const CommonOpts& c) {
    const int given = int(e.has_value()) + int(s.has_value()) + int(b1.has_value()) +
                      int(b2.has_value());
    if (given != 2) {
        std::cerr << "point: give exactly one query pair: (--e,--s) | (--e,--beta2) | "
                     "(--beta1,--s) | (--beta1,--beta2)\n";
        return kExitUsage;
    }
    std::vector<std::pair<std::string, std::string>> fields;
    fields.emplace_back("p", std::to_string(p));
    if (e && s) {
        const auto region = pstar::classify_es(p, *e, *s, c.tol_region);
        const double psi = pstar::entropy(p, *e, *s, c.tol_region);
        const char* rname = region == pstar::RegionES::interior         ? "interior"
                            : region == pstar::RegionES::lower_boundary ? "lower_boundary"
                            : region == pstar::RegionES::upper_boundary ? "upper_boundary"
                            : region == pstar::RegionES::corner         ? "corner"
                                                                        : "outside";
        fields.emplace_back("e", num(*e));
        fields.emplace_back("s", num(*s));
        fields.emplace_back("psi", num(psi));
        fields.emplace_back("region", std::string("\"") + rname + "\"");
        if (region == pstar::RegionES::interior) {
            const auto bp = pstar::solve_bipodal(p, *e, *s, c.tol_region);
            fields.emplace_back("x1", num(bp.x1));
            fields.emplace_back("x2", num(bp.x2));
            fields.emplace_back("lambda", num(bp.lambda));
            fields.emplace_back("beta1", num(bp.beta1));
            fields.emplace_back("beta2", num(bp.beta2));
        }
    } else if (e && b2) {
        const auto region = pstar::classify_e_beta2(p, *e, *b2, c.tol_region);
        const double psi = pstar::free_energy_e(p, *e, *b2, c.tol_region);
        const char* rname = region == pstar::RegionU::uniform    ? "uniform"
                            : region == pstar::RegionU::bipodal  ? "bipodal"
                            : region == pstar::RegionU::boundary ? "boundary"
                                                                 : "critical";
        fields.emplace_back("e", num(*e));
        fields.emplace_back("beta2", num(*b2));
        fields.emplace_back("psi", num(psi));
        fields.emplace_back("region", std::string("\"") + rname + "\"");
        fields.emplace_back("star_density", num(pstar::star_density(p, *e, *b2, c.tol_region)));
        if (region == pstar::RegionU::bipodal) {
            const auto cpt = pstar::curve_point(p, pstar::q_inverse(p, *b2));
            fields.emplace_back("x1", num(cpt.x1));
            fields.emplace_back("x2", num(cpt.x2));
            fields.emplace_back("lambda", num((cpt.x2 - *e) / (cpt.x2 - cpt.x1)));
            fields.emplace_back("beta1", num(cpt.beta1));
        }
    } else if (b1 && s) {
        const auto region = pstar::classify_beta1_s(p, *b1, *s, c.tol_region);
        const double psi = pstar::free_energy_s(p, *b1, *s, c.tol_region);
        const char* rname = region == pstar::RegionU::uniform    ? "uniform"
                            : region == pstar::RegionU::bipodal  ? "bipodal"
                            : region == pstar::RegionU::boundary ? "boundary"
                                                                 : "critical";
        fields.emplace_back("beta1", num(*b1));
        fields.emplace_back("s", num(*s));
        fields.emplace_back("psi", num(psi));
        fields.emplace_back("region", std::string("\"") + rname + "\"");
        fields.emplace_back("edge_density", num(pstar::edge_density(p, *b1, *s, c.tol_region)));
        if (region == pstar::RegionU::bipodal) {
            const auto cpt = pstar::curve_point(p, *b1);
            const double s2 = pstar::ipow(cpt.x2, p), s1 = pstar::ipow(cpt.x1, p);
            fields.emplace_back("x1", num(cpt.x1));
            fields.emplace_back("x2", num(cpt.x2));
            fields.emplace_back("lambda", num((s2 - *s) / (s2 - s1)));
            fields.emplace_back("beta2", num(cpt.beta2));
        }
    } else if (b1 && b2) {
        const auto erg = pstar::ergm_free_energy(p, *b1, *b2);
        fields.emplace_back("beta1", num(*b1));
        fields.emplace_back("beta2", num(*b2));
        fields.emplace_back("psi", num(erg.value));
        std::ostringstream ax;
        ax << '[';
        for (std::size_t i = 0; i < erg.argmax.size(); ++i)
            ax << (i ? "," : "") << num(erg.argmax[i]);
        ax << ']';
        fields.emplace_back("argmax", ax.str());
    } else {
        std::cerr << "point: ambiguous query (pair --e/--s with --beta1/--beta2 mixes axes)\n";
        return kExitUsage;
    }
    c.out.write(c.format == "json" ? kv_json(fields) : kv_csv(fields));
    return kExitOk;
}

int run_compare(int p, double e, double s, std::optional<double> delta,
                std::vector<int> n_list, const CommonOpts& c) {
    if (n_list.empty()) {
        std::cerr << "compare: --n-list must not be empty\n";
        return kExitUsage;
    }
    for (int n : n_list)
        if (n < 1 || n > pstar::finite_law_n_max(p)) {
            std::cerr << "compare: n = " << n << " outside 1.." << pstar::finite_law_n_max(p)
                      << " for p = " << p << "\n";
            return kExitUsage;
        }
    const double psi = pstar::entropy(p, e, s, c.tol_region);
    struct Row {
        int n;
        double delta, psi_n, gap;
        bool empty;
    };
    std::vector<Row> rows;
    int n_largest = 0;
    for (int n : n_list) n_largest = std::max(n_largest, n);
    std::optional<pstar::ConditionalRowLaw> hist;
    for (int n : n_list) {
        const double dn = delta.value_or(std::max(0.05, 2.0 / n));
        const auto law = pstar::exact_joint_law(n, p);
        const double psin = pstar::window_log_prob(law, e, s, dn);
        Row r{n, dn, psin, std::fabs(psin - psi), !std::isfinite(psin)};
        rows.push_back(r);
        if (n == n_largest && !r.empty) {
            try {
                hist = pstar::conditional_row_law(n, p, e, s, dn);
            } catch (const pstar::empty_window_error&) {
            }
        }
    }
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
        if (rows[i].empty || rows[i + 1].empty || !(rows[i].gap > rows[i + 1].gap))
            decreasing = false;
    if (rows.size() == 1 && rows[0].empty) decreasing = false;

    std::ostringstream os;
    if (c.format == "csv") {
        os << "n,delta,psi_n_delta,psi,gap\n";
        for (const auto& r : rows)
            os << r.n << ',' << fmt(r.delta) << ',' << fmt(r.psi_n) << ',' << fmt(psi) << ','
               << fmt(r.gap) << '\n';
        if (hist) {
            os << "d,probability\n";
            for (std::size_t d = 0; d < hist->probabilities.size(); ++d)
                os << d << ',' << fmt(hist->probabilities[d]) << '\n';
        }
    } else {
        os << "{\"p\":" << p << ",\"e\":" << num(e) << ",\"s\":" << num(s)
           << ",\"psi\":" << num(psi) << ",\"rows\":[";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (i) os << ',';
            os << "{\"n\":" << r.n << ",\"delta\":" << num(r.delta)
               << ",\"psi_n_delta\":" << num(r.psi_n) << ",\"gap\":" << num(r.gap) << '}';
        }
        os << "],\"gaps_decreasing\":" << (decreasing ? "true" : "false");
        if (hist) {
            os << ",\"row_histogram\":[";
            for (std::size_t d = 0; d < hist->probabilities.size(); ++d)
                os << (d ? "," : "") << num(hist->probabilities[d]);
            os << ']';
        }
        os << "}\n";
    }
    c.out.write(os.str());
    return decreasing ? kExitOk : kExitComparison;
}

int run_oracle(int n, int p, const std::string& cache, std::optional<int> sample_count,
               std::optional<double> e, std::optional<double> s, std::optional<double> delta,
               std::uint64_t seed, bool dump_table, const CommonOpts& c) {
    if (n < 1 || n > pstar::finite_law_n_max(p)) {
        std::cerr << "oracle: n outside 1.." << pstar::finite_law_n_max(p) << " for p = " << p
                  << "\n";
        return kExitUsage;
    }
    pstar::FiniteLaw law;
    bool from_cache = false;
    if (!cache.empty() && std::filesystem::exists(cache)) {
        law = pstar::load_finite_law(cache);
        if (law.n != n || law.p != p)
            throw std::runtime_error("oracle: cache file holds a different (n,p)");
        from_cache = true;
    } else {
        law = pstar::exact_joint_law(n, p);
        if (!cache.empty()) pstar::save_finite_law(law, cache);
    }

    std::ostringstream os;
    if (sample_count) {
        if (!e || !s) {
            std::cerr << "oracle: sampling requires --e and --s\n";
            return kExitUsage;
        }
        const double dn = delta.value_or(std::max(0.05, 2.0 / n));
        const auto samples = pstar::sample_conditioned(n, p, *e, *s, dn, seed, *sample_count);
        os << "sample";
        for (int i = 1; i <= n; ++i) os << ",d" << i;
        os << '\n';
        for (std::size_t k = 0; k < samples.size(); ++k) {
            os << k;
            for (int d : samples[k]) os << ',' << d;
            os << '\n';
        }
        c.out.write(os.str());
        return kExitOk;
    }
    if (dump_table) {
        os << "E,S,log_weight\n";
        for (std::int64_t E = 0; E <= law.e_max; ++E)
            for (std::int64_t S = 0; S <= law.s_max; ++S) {
                const double v = law.at(E, S);
                if (std::isfinite(v)) os << E << ',' << S << ',' << fmt(v) << '\n';
            }
        c.out.write(os.str());
        return kExitOk;
    }
    std::uint64_t entries = 0;
    for (double v : law.log_weight)
        if (std::isfinite(v)) ++entries;
    const double expected = double(n) * n * std::numbers::ln2_v<double>;
    std::vector<std::pair<std::string, std::string>> fields = {
        {"n", std::to_string(n)},
        {"p", std::to_string(p)},
        {"entries", std::to_string(entries)},
        {"log_total", num(law.log_total())},
        {"expected_log_total", num(expected)},
        {"from_cache", from_cache ? "true" : "false"},
    };
    c.out.write(c.format == "json" ? kv_json(fields) : kv_csv(fields));
    return kExitOk;
}

int run_config(const CommonOpts& c) {
    std::vector<std::pair<std::string, std::string>> fields = {
        {"tol_root", num(c.tol_root)},
        {"tol_region", num(c.tol_region)},
        {"tie_tol", num(1e-10)},
        {"crit_guard", num(pstar::detail::kCritGuard)},
        {"degenerate_tol", num(pstar::detail::kDegenerateTol)},
        {"curve_beta2_xtol", num(pstar::detail::kCurveBeta2Xtol)},
        {"chord_degenerate", num(pstar::detail::kChordDegenerate)},
        {"delta_default", std::string("\"max(0.05, 2/n)\"")},
        {"n_max_p2", std::to_string(pstar::finite_law_n_max(2))},
        {"n_max_p3", std::to_string(pstar::finite_law_n_max(3))},
        {"mem_budget_bytes", std::to_string(pstar::detail::kMemBudgetBytes)},
        {"env_vars", std::string("\"PSTAR_TOL_ROOT, PSTAR_TOL_REGION\"")},
    };
    c.out.write(c.format == "json" ? kv_json(fields) : kv_csv(fields));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy and free-energy surfaces of edge/p-star constrained digraphs"};
    app.require_subcommand(1);

    int p = 2;
    CommonOpts copt;

    auto* c_critical = app.add_subcommand("critical", "critical point of the transition curve");
    c_critical->add_option("--p", p, "star order")->required()->check(CLI::Range(2, 64));
    CommonOpts critical_opts;
    add_common(c_critical, critical_opts, "json");

    auto* c_curve = app.add_subcommand("curve", "trace the phase-transition curve");
    int curve_p = 2, steps = 32;
    double b1_min = -6.0, b1_max = -2.5;
    c_curve->add_option("--p", curve_p, "star order")->required()->check(CLI::Range(2, 64));
    c_curve->add_option("--beta1-min", b1_min)->required();
    c_curve->add_option("--beta1-max", b1_max)->required();
    c_curve->add_option("--steps", steps)->check(CLI::Range(2, 100000));
    CommonOpts curve_opts;
    add_common(c_curve, curve_opts, "csv");

    auto* c_grid = app.add_subcommand("grid", "emit a surface grid");
    int grid_p = 2, resolution = 64;
    std::string quantity = "psi_es", plane = "e-beta2";
    std::optional<double> gb1min, gb1max, gb2min, gb2max;
    c_grid->add_option("--p", grid_p, "star order")->required()->check(CLI::Range(2, 64));
    c_grid->add_option("--quantity", quantity)
        ->check(CLI::IsMember(
            {"psi_es", "dpsi_de", "dpsi_ds", "psi_e_beta2", "psi_beta1_s", "region_tag"}));
    c_grid->add_option("--resolution", resolution)->check(CLI::Range(8, 2048));
    c_grid->add_option("--plane", plane, "plane for region_tag")
        ->check(CLI::IsMember({"e-beta2", "beta1-s"}));
    c_grid->add_option("--beta1-min", gb1min);
    c_grid->add_option("--beta1-max", gb1max);
    c_grid->add_option("--beta2-min", gb2min);
    c_grid->add_option("--beta2-max", gb2max);
    CommonOpts grid_opts;
    add_common(c_grid, grid_opts, "csv");

    auto* c_point = app.add_subcommand("point", "query one surface point");
    int point_p = 2;
    std::optional<double> qe, qs, qb1, qb2;
    c_point->add_option("--p", point_p, "star order")->required()->check(CLI::Range(2, 64));
    c_point->add_option("--e", qe);
    c_point->add_option("--s", qs);
    c_point->add_option("--beta1", qb1);
    c_point->add_option("--beta2", qb2);
    CommonOpts point_opts;
    add_common(c_point, point_opts, "json");

    auto* c_compare = app.add_subcommand("compare", "finite-n oracle vs the limit");
    int cmp_p = 2;
    double cmp_e = 0.5, cmp_s = 0.3;
    std::optional<double> cmp_delta;
    std::vector<int> n_list;
    c_compare->add_option("--p", cmp_p, "star order")->required()->check(CLI::Range(2, 64));
    c_compare->add_option("--e", cmp_e)->required();
    c_compare->add_option("--s", cmp_s)->required();
    c_compare->add_option("--delta", cmp_delta);
    c_compare->add_option("--n-list", n_list, "comma-separated node counts")
        ->required()
        ->delimiter(',');
    CommonOpts compare_opts;
    add_common(c_compare, compare_opts, "json");

    auto* c_oracle = app.add_subcommand("oracle", "exact finite-n joint law");
    int on = 8, op = 2;
    std::string cache;
    std::optional<int> sample_count;
    std::optional<double> oe, os_, odelta;
    std::uint64_t seed = 0;
    bool dump_table = false;
    c_oracle->add_option("--n", on)->required()->check(CLI::Range(1, 1000));
    c_oracle->add_option("--p", op, "star order")->required()->check(CLI::Range(2, 64));
    c_oracle->add_option("--cache", cache, "binary cache file keyed by (n,p)");
    c_oracle->add_option("--sample", sample_count, "emit this many conditioned samples");
    c_oracle->add_option("--e", oe);
    c_oracle->add_option("--s", os_);
    c_oracle->add_option("--delta", odelta);
    c_oracle->add_option("--seed", seed);
    c_oracle->add_flag("--table", dump_table, "dump the full (E,S,log_weight) table");
    CommonOpts oracle_opts;
    add_common(c_oracle, oracle_opts, "json");

    auto* c_config = app.add_subcommand("config", "print effective defaults");
    CommonOpts config_opts;
    add_common(c_config, config_opts, "json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (c_critical->parsed()) return run_critical(p, critical_opts);
        if (c_curve->parsed()) return run_curve(curve_p, b1_min, b1_max, steps, curve_opts);
        if (c_grid->parsed())
            return run_grid(grid_p, quantity, resolution, plane, gb1min, gb1max, gb2min, gb2max,
                            grid_opts);
        if (c_point->parsed()) return run_point(point_p, qe, qs, qb1, qb2, point_opts);
        if (c_compare->parsed())
            return run_compare(cmp_p, cmp_e, cmp_s, cmp_delta, n_list, compare_opts);
        if (c_oracle->parsed())
            return run_oracle(on, op, cache, sample_count, oe, os_, odelta, seed, dump_table,
                              oracle_opts);
        if (c_config->parsed()) return run_config(config_opts);
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const pstar::empty_window_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComparison;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCompute;
    }
    return kExitUsage;
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qot/analytic.hpp"
#include "qot/config.hpp"
#include "qot/constants.hpp"
#include "qot/coupling.hpp"
#include "qot/errors.hpp"
#include "qot/grid.hpp"
#include "qot/plot_svg.hpp"
#include "qot/pme.hpp"
#include "qot/qot_solver.hpp"
#include "qot/rates.hpp"
#include "qot/version.hpp"

namespace qot {

namespace cli_detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

inline std::ofstream open_out(const ExperimentConfig& cfg, const std::string& name) {
    std::string path = join_path(cfg.output_dir, name);
    std::ofstream out(path);
    if (!out) throw ConfigError("output_dir: cannot open " + path + " for writing");
    return out;
}

inline std::vector<std::string> file_header(const ExperimentConfig& cfg) {
    return {std::string("version=") + version_string, "config: " + config_echo(cfg)};
}

inline std::string plot_header(const ExperimentConfig& cfg) {
    return std::string("version=") + version_string + " config: " + config_echo(cfg);
}

template <int D>
AnalyticPair<D> build_pair(const ExperimentConfig& cfg) {
    BoxDomain<D> dom;
    for (int k = 0; k < D; ++k) {
        dom.lo[k] = 0.0;
        dom.hi[k] = 1.0;
        dom.n[k] = cfg.n;
    }
    return make_family<D>(cfg.family, dom, cfg.family_a, cfg.family_b, cfg.family_eta);
}

inline double single_eps(const ExperimentConfig& cfg) {
    if (cfg.eps_list.size() != 1)
        throw ConfigError("eps: command '" + cfg.command + "' expects a single value");
    return cfg.eps_list.front();
}

inline void run_constants(const ExperimentConfig& cfg) {
    DimensionalConstants dc = constants(cfg.d);
    std::ofstream out = open_out(cfg, "constants_d" + std::to_string(cfg.d) + ".csv");
    for (const auto& line : file_header(cfg)) out << "# " << line << "\n";
    out << "quantity,value\n";
    out << "d," << dc.d << "\n";
    out << "sphere_area," << fmt_full(dc.sphere_area) << "\n";
    out << "c_d," << fmt_full(dc.c_d) << "\n";
    out << "c_d1," << fmt_full(dc.c_d1) << "\n";
    out << "c_d2," << fmt_full(dc.c_d2) << "\n";
    out << "theorem_constant," << fmt_full(dc.theorem_constant) << "\n";
    std::cout << "d                " << dc.d << "\n"
              << "sphere_area      " << fmt_full(dc.sphere_area) << "\n"
              << "c_d              " << fmt_full(dc.c_d) << "\n"
              << "c_d1             " << fmt_full(dc.c_d1) << "\n"
              << "c_d2             " << fmt_full(dc.c_d2) << "\n"
              << "theorem_constant " << fmt_full(dc.theorem_constant) << "\n";
}

template <int D>
plot::Series plan_section_series(const Coupling& plan, const GridMeasure<D>& rho1,
                                 std::size_t row) {
    plot::Series s;
    s.name = "plan row density";
    for (const CouplingEntry& e : plan.entries)
        if (static_cast<std::size_t>(e.i) == row) {
            s.xs.push_back(rho1.node(e.j)[0]);
            s.ys.push_back(e.u);
        }
    return s;
}

template <int D>
void run_solve(const ExperimentConfig& cfg) {
    AnalyticPair<D> pair = build_pair<D>(cfg);
    double eps = single_eps(cfg);
    SolveOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    SolveResult res = solve<D>(pair.rho0, pair.rho1, eps, opts);
    if (!res.stats.converged)
        throw NonFiniteValue("solve: no convergence within max_iter = " +
                             std::to_string(cfg.max_iter));

    {
        std::ofstream out = open_out(cfg, "plan.csv");
        write_plan_csv<D>(res.plan, pair.rho0, pair.rho1, out, file_header(cfg));
    }
    {
        std::ofstream out = open_out(cfg, "solve_stats.json");
        for (const auto& line : file_header(cfg)) out << "# " << line << "\n";
        write_solve_stats(res.stats, eps, out);
    }
    std::vector<plot::HeatPoint> pts;
    pts.reserve(res.plan.entries.size());
    for (const CouplingEntry& e : res.plan.entries)
        pts.push_back(plot::HeatPoint{pair.rho0.node(e.i)[0], pair.rho1.node(e.j)[0], e.u});
    plot::write_heatmap(join_path(cfg.output_dir, "plan_support.svg"), "plan support", "x_1",
                        "y_1", pts, plot_header(cfg));

    std::cout << "T_eps=" << fmt_full(res.stats.primal) << " dual=" << fmt_full(res.stats.dual)
              << " gap=" << fmt_full(res.stats.gap) << " iterations=" << res.stats.iterations
              << " support_fraction=" << fmt_full(res.stats.support_fraction) << "\n";
}

template <int D>
void run_sweep(const ExperimentConfig& cfg) {
    AnalyticPair<D> pair = build_pair<D>(cfg);
    SolveOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    RateReport rep = sweep<D>(pair, cfg.eps_list, opts);

    {
        std::ofstream out = open_out(cfg, "rate.csv");
        write_rate_csv(rep, out, file_header(cfg));
    }
    {
        std::ofstream out = open_out(cfg, "rate_summary.json");
        for (const auto& line : file_header(cfg)) out << "# " << line << "\n";
        write_rate_summary(rep, out);
    }
    std::vector<plot::Series> series(3);
    series[0] = plot::Series{"scaled gap", rep.eps_list, rep.scaled_gaps, "#1f6fb2"};
    series[1] = plot::Series{"dual candidate lower", rep.eps_list, rep.lower_curve, "#2d8f4e"};
    series[2] = plot::Series{"theoretical limit",
                             {rep.eps_list.front(), rep.eps_list.back()},
                             {rep.theoretical_constant, rep.theoretical_constant},
                             "#888888"};
    plot::write_line_plot(join_path(cfg.output_dir, "rate.svg"), "scaled regularization gap",
                          "eps", "gap / eps^(2/(d+2))", series, true, false, plot_header(cfg));

    std::cout << "fitted_exponent=" << fmt_full(rep.fitted_exponent)
              << " fitted_constant=" << fmt_full(rep.fitted_constant)
              << " theoretical_constant=" << fmt_full(rep.theoretical_constant) << "\n";
}

template <int D>
void run_sandwich(const ExperimentConfig& cfg) {
    AnalyticPair<D> pair = build_pair<D>(cfg);
    SolveOptions opts;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    RateReport rep = sandwich<D>(pair, cfg.delta, cfg.eps_list, opts);

    {
        std::ofstream out = open_out(cfg, "sandwich.csv");
        write_rate_csv(rep, out, file_header(cfg));
    }
    {
        std::ofstream out = open_out(cfg, "sandwich_summary.json");
        for (const auto& line : file_header(cfg)) out << "# " << line << "\n";
        write_rate_summary(rep, out);
    }
    std::vector<plot::Series> series(4);
    series[0] = plot::Series{"lower (dual candidate)", rep.eps_list, rep.lower_curve, "#2d8f4e"};
    series[1] = plot::Series{"solver scaled gap", rep.eps_list, rep.scaled_gaps, "#1f6fb2"};
    series[2] = plot::Series{"upper (glass coupling)", rep.eps_list, rep.upper_curve, "#c2492f"};
    series[3] = plot::Series{"theoretical limit",
                             {rep.eps_list.front(), rep.eps_list.back()},
                             {rep.theoretical_constant, rep.theoretical_constant},
                             "#888888"};
    plot::write_line_plot(join_path(cfg.output_dir, "sandwich.svg"), "sandwich bounds", "eps",
                          "gap / eps^(2/(d+2))", series, true, false, plot_header(cfg));

    std::cout << "theoretical_constant=" << fmt_full(rep.theoretical_constant) << " lower_last="
              << fmt_full(rep.lower_curve.back()) << " gap_last=" << fmt_full(rep.scaled_gaps.back())
              << " upper_last=" << fmt_full(rep.upper_curve.back()) << "\n";
}

template <int D>
void run_couple(const ExperimentConfig& cfg) {
    AnalyticPair<D> pair = build_pair<D>(cfg);
    double eps = single_eps(cfg);
    FrameSpec frame = make_frame<D>(pair.rho0, cfg.delta);
    GlassResult<D> glass = glass_coupling<D>(pair, frame, eps);

    {
        std::ofstream out = open_out(cfg, "couple_plan.csv");
        write_plan_csv<D>(glass.v, pair.rho0, pair.rho0, out, file_header(cfg));
    }
    double q_min = glass.q.empty() ? 0.0 : *std::min_element(glass.q.begin(), glass.q.end());
    double q_max = glass.q.empty() ? 0.0 : *std::max_element(glass.q.begin(), glass.q.end());
    {
        std::ofstream out = open_out(cfg, "couple_stats.json");
        for (const auto& line : file_header(cfg)) out << "# " << line << "\n";
        out << "{\n";
        out << "  \"defect_col\": " << fmt_full(glass.defect_col) << ",\n";
        out << "  \"defect_row\": " << fmt_full(glass.defect_row) << ",\n";
        out << "  \"entries\": " << glass.v.entries.size() << ",\n";
        out << "  \"eps\": " << fmt_full(eps) << ",\n";
        out << "  \"frame_nodes\": " << frame.frame_nodes.size() << ",\n";
        out << "  \"inner_nodes\": " << frame.inner_nodes.size() << ",\n";
        out << "  \"q_max\": " << fmt_full(q_max) << ",\n";
        out << "  \"q_min\": " << fmt_full(q_min) << ",\n";
        out << "  \"r_m\": " << fmt_full(glass.r_m) << ",\n";
        out << "  \"sup_dev\": " << fmt_full(glass.sup_dev) << ",\n";
        out << "  \"z_norm\": " << fmt_full(glass.z_norm) << "\n";
        out << "}\n";
    }
    std::vector<plot::HeatPoint> pts;
    pts.reserve(glass.v.entries.size());
    for (const CouplingEntry& e : glass.v.entries)
        pts.push_back(plot::HeatPoint{pair.rho0.node(e.i)[0], pair.rho0.node(e.j)[0], e.u});
    plot::write_heatmap(join_path(cfg.output_dir, "couple_support.svg"),
                        "two-piece coupling support", "x_1", "x_1'", pts, plot_header(cfg));

    std::cout << "entries=" << glass.v.entries.size() << " defect_row="
              << fmt_full(glass.defect_row) << " defect_col=" << fmt_full(glass.defect_col)
              << " q_range=[" << fmt_full(q_min) << "," << fmt_full(q_max) << "]\n";
}

template <int D>
double barenblatt_mass_at(const BarenblattProfile& prof, double t, int n) {
    double r = support_radius(prof, t) * 1.02;
    BoxDomain<D> dom;
    for (int k = 0; k < D; ++k) {
        dom.lo[k] = -r;
        dom.hi[k] = r;
        dom.n[k] = n;
    }
    return lebesgue_mass<D>(dom, barenblatt_field<D>(prof, t, dom));
}

template <int D>
double residual_at(const BarenblattProfile& prof, double t, int n) {
    double r = support_radius(prof, t) * 1.05;
    BoxDomain<D> dom;
    for (int k = 0; k < D; ++k) {
        dom.lo[k] = -r;
        dom.hi[k] = r;
        dom.n[k] = n;
    }
    return pme_residual<D>(prof, t, dom);
}

template <int D>
double energy_at(const BarenblattProfile& prof, double t, double box_r, int n) {
    BoxDomain<D> dom;
    for (int k = 0; k < D; ++k) {
        dom.lo[k] = -box_r;
        dom.hi[k] = box_r;
        dom.n[k] = n;
    }
    return free_energy<D>(dom, barenblatt_field<D>(prof, t, dom), prof.m);
}

// The entropy along t -> B(t, .) is c1 t^{2 beta} + c2 t^{-beta d (m-1)}, so it
// decreases up to t* = d (m-1) c2 / (2 c1) and increases after; the decrease window
// must stay below t*.
template <int D>
double energy_turnaround(const BarenblattProfile& prof, int n) {
    double r = support_radius(prof, 1.0) * 1.02;
    BoxDomain<D> dom;
    for (int k = 0; k < D; ++k) {
        dom.lo[k] = -r;
        dom.hi[k] = r;
        dom.n[k] = n;
    }
    std::vector<double> u = barenblatt_field<D>(prof, 1.0, dom);
    const double vol = dom.cell_volume();
    KahanSum pot, internal;
    for (std::size_t i = 0; i < u.size(); ++i) {
        pot.add(0.5 * norm2<D>(dom.node(i)) * u[i] * vol);
        internal.add(std::pow(u[i], prof.m) / (prof.m - 1.0) * vol);
    }
    return prof.d * (prof.m - 1.0) * internal.value() / (2.0 * pot.value());
}

inline void run_pme_check(const ExperimentConfig& cfg) {
    if (cfg.d > 2) throw ConfigError("d: pme-check supports d = 1 or 2");
    BarenblattProfile prof = make_barenblatt(cfg.pme_m, cfg.d, 1.0);
    const int n = cfg.d == 1 ? std::max(cfg.n, 64) : std::min(std::max(cfg.n, 64), 256);

    const std::vector<double> mass_ts{0.5, 1.0, 2.0, 4.0};
    std::vector<double> masses;
    for (double t : mass_ts)
        masses.push_back(dispatch_dim(cfg.d, [&](auto dim) {
            return barenblatt_mass_at<decltype(dim)::value>(prof, t, n);
        }));
    double mass_drift = 0.0;
    for (double m : masses) mass_drift = std::max(mass_drift, std::abs(m - masses.front()));

    double res_coarse = dispatch_dim(cfg.d, [&](auto dim) {
        return residual_at<decltype(dim)::value>(prof, 1.0, n);
    });
    double res_fine = dispatch_dim(cfg.d, [&](auto dim) {
        return residual_at<decltype(dim)::value>(prof, 1.0, 2 * n);
    });
    double ratio = res_coarse / res_fine;

    double t_star = dispatch_dim(cfg.d, [&](auto dim) {
        return energy_turnaround<decltype(dim)::value>(prof, n);
    });
    std::vector<double> energy_ts;
    for (double f : {0.15, 0.3, 0.45, 0.6, 0.75, 0.9}) energy_ts.push_back(f * t_star);
    double box_r = support_radius(prof, energy_ts.back()) * 1.02;
    std::vector<double> energies;
    for (double t : energy_ts)
        energies.push_back(dispatch_dim(cfg.d, [&](auto dim) {
            return energy_at<decltype(dim)::value>(prof, t, box_r, n);
        }));
    bool energy_decreasing = true;
    for (std::size_t k = 1; k < energies.size(); ++k)
        if (!(energies[k] < energies[k - 1])) energy_decreasing = false;

    {
        std::ofstream out = open_out(cfg, "pme.csv");
        for (const auto& line : file_header(cfg)) out << "# " << line << "\n";
        out << "quantity,t,value\n";
        for (std::size_t k = 0; k < mass_ts.size(); ++k)
            out << "mass," << fmt_full(mass_ts[k]) << "," << fmt_full(masses[k]) << "\n";
        for (std::size_t k = 0; k < energy_ts.size(); ++k)
            out << "free_energy," << fmt_full(energy_ts[k]) << "," << fmt_full(energies[k]) << "\n";
        out << "residual,1," << fmt_full(res_coarse) << "\n";
        out << "residual_refined,1," << fmt_full(res_fine) << "\n";
    }
    {
        std::ofstream out = open_out(cfg, "pme_summary.json");
        for (const auto& line : file_header(cfg)) out << "# " << line << "\n";
        out << "{\n";
        out << "  \"energy_decreasing\": " << (energy_decreasing ? "true" : "false") << ",\n";
        out << "  \"energy_turnaround\": " << fmt_full(t_star) << ",\n";
        out << "  \"mass_drift\": " << fmt_full(mass_drift) << ",\n";
        out << "  \"residual_ratio\": " << fmt_full(ratio) << "\n";
        out << "}\n";
    }

    if (cfg.d == 1) {
        ExperimentConfig inner = cfg;
        inner.family = "identity";
        inner.n = std::min(cfg.n, 2000);
        AnalyticPair<1> pair = build_pair<1>(inner);
        double eps = cfg.eps_list.empty() ? 1e-3 : cfg.eps_list.front();
        SolveOptions opts;
        opts.tol = cfg.tol;
        opts.max_iter = cfg.max_iter;
        SolveResult res = solve<1>(pair.rho0, pair.rho1, eps, opts);
        std::size_t row = pair.rho0.size() / 2;
        plot::Series plan_s = plan_section_series<1>(res.plan, pair.rho1, row);
        plan_s.color = "#1f6fb2";
        Vec<1> x0 = pair.rho0.node(row);
        plot::Series prof_s;
        prof_s.name = "limit profile";
        prof_s.color = "#c2492f";
        double r = std::sqrt(2.0 * pair.sigma_M * c_eps<1>(pair, x0, eps)) * 1.4;
        for (int k = 0; k <= 400; ++k) {
            double y = x0[0] - r + 2.0 * r * k / 400.0;
            prof_s.xs.push_back(y);
            prof_s.ys.push_back(corollary_profile_v<1>(pair, eps, Vec<1>{y}, x0));
        }
        plot::write_line_plot(join_path(cfg.output_dir, "pme_overlay.svg"),
                              "plan cross-section against the limit profile", "y", "density",
                              {plan_s, prof_s}, false, false, plot_header(cfg));
    }

    std::cout << "mass_drift=" << fmt_full(mass_drift) << " residual_ratio=" << fmt_full(ratio)
              << " energy_decreasing=" << (energy_decreasing ? "true" : "false") << "\n";
}

// Flat key=value config loader; command-line flags win, unknown keys are errors.
inline void apply_config_file(const std::string& path, CLI::App* sub, ExperimentConfig& cfg,
                              std::string& eps_text) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open file '" + path + "'");
    auto trim = [](const std::string& s) {
        const char* ws = " \t\r";
        std::size_t b = s.find_first_not_of(ws);
        if (b == std::string::npos) return std::string{};
        return s.substr(b, s.find_last_not_of(ws) - b + 1);
    };
    auto to_int = [](const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            int out = std::stoi(v, &used);
            if (used == v.size()) return out;
        } catch (const std::exception&) {
        }
        throw ConfigError("config: bad integer for '" + key + "'");
    };
    auto to_double = [](const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            double out = std::stod(v, &used);
            if (used == v.size()) return out;
        } catch (const std::exception&) {
        }
        throw ConfigError("config: bad number for '" + key + "'");
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key=value at line " + std::to_string(lineno));
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config")
            throw ConfigError("config: unknown key '" + key + "' for " + sub->get_name());
        if (opt->count() > 0) continue;
        if (key == "d")
            cfg.d = to_int(key, value);
        else if (key == "n")
            cfg.n = to_int(key, value);
        else if (key == "out")
            cfg.output_dir = value;
        else if (key == "seed")
            cfg.seed = static_cast<unsigned>(to_int(key, value));
        else if (key == "family")
            cfg.family = value;
        else if (key == "a")
            cfg.family_a = to_double(key, value);
        else if (key == "b")
            cfg.family_b = to_double(key, value);
        else if (key == "eta")
            cfg.family_eta = to_double(key, value);
        else if (key == "eps")
            eps_text = value;
        else if (key == "tol")
            cfg.tol = to_double(key, value);
        else if (key == "max-iter")
            cfg.max_iter = to_int(key, value);
        else if (key == "delta")
            cfg.delta = to_double(key, value);
        else if (key == "m")
            cfg.pme_m = to_double(key, value);
    }
}

}  // namespace cli_detail

inline int run_config(const ExperimentConfig& cfg) {
    validate_config(cfg);
    using namespace cli_detail;
    if (cfg.command == "constants") {
        run_constants(cfg);
    } else if (cfg.command == "solve") {
        dispatch_dim(cfg.d, [&](auto dim) { run_solve<decltype(dim)::value>(cfg); });
    } else if (cfg.command == "sweep") {
        dispatch_dim(cfg.d, [&](auto dim) { run_sweep<decltype(dim)::value>(cfg); });
    } else if (cfg.command == "sandwich") {
        dispatch_dim(cfg.d, [&](auto dim) { run_sandwich<decltype(dim)::value>(cfg); });
    } else if (cfg.command == "couple") {
        dispatch_dim(cfg.d, [&](auto dim) { run_couple<decltype(dim)::value>(cfg); });
    } else if (cfg.command == "pme-check") {
        run_pme_check(cfg);
    } else {
        throw ConfigError("command: unknown command '" + cfg.command + "'");
    }
    return 0;
}

// Builds the app, parses args (program name excluded), runs the selected experiment.
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.
inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"quadratically regularized optimal transport experiments"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string eps_text;
    std::string config_path;

    auto add_common = [&](CLI::App* sub, bool with_family, bool with_solver) {
        sub->add_option("--d", cfg.d, "dimension (1, 2, or 3)");
        sub->add_option("--n", cfg.n, "grid nodes per axis");
        sub->add_option("--out", cfg.output_dir, "output directory");
        sub->add_option("--seed", cfg.seed, "seed for sampled diagnostics (reserved)");
        sub->add_option("--config", config_path, "flat key=value config file");
        if (with_family) {
            sub->add_option("--family", cfg.family, "identity | affine | perturbed");
            sub->add_option("--a", cfg.family_a, "affine diagonal scale");
            sub->add_option("--b", cfg.family_b, "affine shift");
            sub->add_option("--eta", cfg.family_eta, "perturbation amplitude");
        }
        if (with_solver) {
            sub->add_option("--eps", eps_text, "eps value, comma list, or HI:LO:COUNTlog range");
            sub->add_option("--tol", cfg.tol, "marginal defect tolerance");
            sub->add_option("--max-iter", cfg.max_iter, "sweep iteration cap");
        }
    };

    add_common(app.add_subcommand("constants", "dimensional constants table"), false, false);
    add_common(app.add_subcommand("solve", "single QOT solve"), true, true);
    add_common(app.add_subcommand("sweep", "eps sweep with rate fit"), true, true);
    CLI::App* sb = app.add_subcommand("sandwich", "sweep plus lower/upper bounds");
    add_common(sb, true, true);
    sb->add_option("--delta", cfg.delta, "boundary layer width");
    CLI::App* cp = app.add_subcommand("couple", "two-piece feasible coupling");
    add_common(cp, true, true);
    cp->add_option("--delta", cfg.delta, "boundary layer width");
    CLI::App* pm = app.add_subcommand("pme-check", "porous-medium reference checks");
    add_common(pm, false, true);
    pm->add_option("--m", cfg.pme_m, "nonlinearity exponent");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        cfg.command = sub->get_name();
        if (!config_path.empty()) cli_detail::apply_config_file(config_path, sub, cfg, eps_text);
        if (!eps_text.empty()) cfg.eps_list = parse_eps_list(eps_text);
        return run_config(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace qot

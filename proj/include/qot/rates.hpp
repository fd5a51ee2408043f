#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "qot/analytic.hpp"
#include "qot/constants.hpp"
#include "qot/coupling.hpp"
#include "qot/errors.hpp"
#include "qot/exact_ot.hpp"
#include "qot/grid.hpp"
#include "qot/qot_solver.hpp"

namespace qot {

struct RateReport {
    std::string family;
    int d = 0;
    std::vector<double> eps_list;
    std::vector<double> gaps;
    std::vector<double> scaled_gaps;
    double fitted_exponent = 0.0;
    double fitted_constant = 0.0;
    double theoretical_constant = 0.0;
    double w2_squared = 0.0;
    std::vector<double> lower_curve;
    std::vector<double> upper_curve;
};

// Limit constant of the scaled gap: theorem_constant(d) * int (rho0 rho1[grad g*])^{-1/(d+2)} drho0.
template <int D>
double theoretical_limit(const AnalyticPair<D>& pair) {
    const double c = constants(D).theorem_constant;
    double integral = integrate<D>(pair.rho0, [&](const Vec<D>& x) {
        return std::pow(pair.rho0_fn(x) * pair.rho1_fn(pair.grad_g_star(x)), -1.0 / (D + 2));
    });
    return c * integral;
}

namespace detail {

// Least-squares slope of log(gap) against log(eps) over the tail (smallest eps) half.
inline double fit_exponent(const std::vector<double>& eps_list, const std::vector<double>& gaps) {
    const std::size_t m = eps_list.size();
    const std::size_t use = (m + 1) / 2;
    const std::size_t start = m - use;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = start; k < m; ++k) {
        double lx = std::log(eps_list[k]);
        double ly = std::log(gaps[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double n = static_cast<double>(use);
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Fit scaled_gap ~= K + c * eps^gamma with gamma free; returns the extrapolated K.
// Linear least squares in (K, c) for each gamma on a refined search grid.
inline double fit_constant(const std::vector<double>& eps_list,
                           const std::vector<double>& scaled) {
    const std::size_t m = eps_list.size();
    auto sse_at = [&](double gamma, double* k_out) {
        double s1 = static_cast<double>(m), sz = 0.0, szz = 0.0, sy = 0.0, szy = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            double z = std::pow(eps_list[k], gamma);
            sz += z;
            szz += z * z;
            sy += scaled[k];
            szy += z * scaled[k];
        }
        double det = s1 * szz - sz * sz;
        if (std::abs(det) < 1e-300) {
            *k_out = sy / s1;
            return std::numeric_limits<double>::infinity();
        }
        double K = (szz * sy - sz * szy) / det;
        double c = (s1 * szy - sz * sy) / det;
        double sse = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            double r = scaled[k] - K - c * std::pow(eps_list[k], gamma);
            sse += r * r;
        }
        *k_out = K;
        return sse;
    };

    double lo = 0.1, hi = 1.5;
    double best_gamma = lo, best_sse = std::numeric_limits<double>::infinity(), best_k = scaled.back();
    for (int round = 0; round < 3; ++round) {
        double step = (hi - lo) / 60.0;
        for (double g = lo; g <= hi + 0.5 * step; g += step) {
            double k_here;
            double s = sse_at(g, &k_here);
            if (s < best_sse) {
                best_sse = s;
                best_gamma = g;
                best_k = k_here;
            }
        }
        lo = std::max(0.05, best_gamma - 2.0 * step);
        hi = best_gamma + 2.0 * step;
    }
    return best_k;
}

template <int D>
void check_eps_list(const AnalyticPair<D>& pair, const std::vector<double>& eps_list) {
    if (eps_list.size() < 3) throw ConfigError("sweep: need at least 3 eps values");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0)) throw ConfigError("sweep: eps values must be positive");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
            throw ConfigError("sweep: eps list must be strictly decreasing");
    }
    double h_max = 0.0;
    for (int k = 0; k < D; ++k) h_max = std::max(h_max, pair.rho0.domain.step(k));
    for (double eps : eps_list) {
        double c_max = 0.0;
        for (std::size_t i = 0; i < pair.rho0.size(); ++i)
            c_max = std::max(c_max, c_eps<D>(pair, pair.rho0.node(i), eps));
        if (std::sqrt(2.0 * c_max) < 10.0 * h_max)
            throw BandwidthUnderResolved("sweep: fewer than 10 cells across the plan bandwidth");
    }
}

}  // namespace detail

template <int D>
double w2_squared_of(const AnalyticPair<D>& pair) {
    if constexpr (D == 1)
        return w2_quantile_1d<1>(pair.rho0, pair.rho1).value;
    else
        return w2_from_map<D>(pair).value;
}

// eps sweep: T_eps from the solver, W2^2 exactly, gap scaling fit, plus the dual-candidate
// lower curve. Consecutive solves warm-start from the previous potentials.
template <int D>
RateReport sweep(const AnalyticPair<D>& pair, const std::vector<double>& eps_list,
                 const SolveOptions& opts = {}) {
    detail::check_eps_list<D>(pair, eps_list);

    RateReport rep;
    rep.family = pair.label;
    rep.d = D;
    rep.eps_list = eps_list;
    rep.theoretical_constant = theoretical_limit<D>(pair);
    rep.w2_squared = w2_squared_of<D>(pair);

    SolveOptions local = opts;
    for (double eps : eps_list) {
        SolveResult res = solve<D>(pair.rho0, pair.rho1, eps, local);
        if (!res.stats.converged)
            throw NonFiniteValue("sweep: solver did not converge at eps = " + fmt_full(eps));
        double gap = res.stats.primal - rep.w2_squared;
        double scale = std::pow(eps, 2.0 / (D + 2));
        rep.gaps.push_back(gap);
        rep.scaled_gaps.push_back(gap / scale);
        rep.lower_curve.push_back((2.0 * gamma_eps<D>(pair, eps) - rep.w2_squared) / scale);
        local.init_a = res.pots.a;
        local.init_b = res.pots.b;
    }
    rep.fitted_exponent = detail::fit_exponent(rep.eps_list, rep.gaps);
    rep.fitted_constant = detail::fit_constant(rep.eps_list, rep.scaled_gaps);
    return rep;
}

// Sweep plus the feasible-coupling upper curve from the two-piece glass construction.
template <int D>
RateReport sandwich(const AnalyticPair<D>& pair, double delta,
                    const std::vector<double>& eps_list, const SolveOptions& opts = {}) {
    RateReport rep = sweep<D>(pair, eps_list, opts);
    FrameSpec frame = make_frame<D>(pair.rho0, delta);
    for (double eps : eps_list) {
        GlassResult<D> glass = glass_coupling<D>(pair, frame, eps);
        double upper = glass_primal_value<D>(pair, glass) - rep.w2_squared;
        rep.upper_curve.push_back(upper / std::pow(eps, 2.0 / (D + 2)));
    }
    return rep;
}

inline void write_rate_csv(const RateReport& rep, std::ostream& out,
                           const std::vector<std::string>& header_comments = {}) {
    for (const auto& line : header_comments) out << "# " << line << "\n";
    out << "# family=" << rep.family << " d=" << rep.d << "\n";
    out << "eps,gap,scaled_gap";
    if (!rep.lower_curve.empty()) out << ",lower_curve";
    if (!rep.upper_curve.empty()) out << ",upper_curve";
    out << "\n";
    for (std::size_t k = 0; k < rep.eps_list.size(); ++k) {
        out << fmt_full(rep.eps_list[k]) << "," << fmt_full(rep.gaps[k]) << ","
            << fmt_full(rep.scaled_gaps[k]);
        if (!rep.lower_curve.empty()) out << "," << fmt_full(rep.lower_curve[k]);
        if (!rep.upper_curve.empty()) out << "," << fmt_full(rep.upper_curve[k]);
        out << "\n";
    }
}

inline void write_rate_summary(const RateReport& rep, std::ostream& out) {
    out << "{\n";
    out << "  \"d\": " << rep.d << ",\n";
    out << "  \"family\": \"" << rep.family << "\",\n";
    out << "  \"fitted_constant\": " << fmt_full(rep.fitted_constant) << ",\n";
    out << "  \"fitted_exponent\": " << fmt_full(rep.fitted_exponent) << ",\n";
    out << "  \"theoretical_constant\": " << fmt_full(rep.theoretical_constant) << ",\n";
    out << "  \"w2_squared\": " << fmt_full(rep.w2_squared) << "\n";
    out << "}\n";
}

}  // namespace qot

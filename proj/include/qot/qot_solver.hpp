#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "qot/errors.hpp"
#include "qot/grid.hpp"
#include "qot/linalg.hpp"

namespace qot {

// Dual variables of the regularized problem; the dual stores the half cost
// c = (1/2)|x-y|^2 and objectives are reported with the trailing factor 2.
struct DualPotentials {
    std::vector<double> a;
    std::vector<double> b;
    double eps = 0.0;
};

struct CouplingEntry {
    int i;
    int j;
    double u;
};

// Sparse density against rho0 x rho1 product weights; zeros are not stored.
struct Coupling {
    std::size_t n0 = 0;
    std::size_t n1 = 0;
    double eps = 0.0;
    std::vector<CouplingEntry> entries;
};

struct SolveStats {
    int iterations = 0;
    double defect_row = 0.0;
    double defect_col = 0.0;
    double support_fraction = 0.0;
    bool converged = false;
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
    std::vector<double> ascent;
};

struct SolveOptions {
    double tol = 1e-9;
    int max_iter = 20000;
    bool track_ascent = false;
    std::vector<double> init_a;
    std::vector<double> init_b;
};

struct SolveResult {
    DualPotentials pots;
    Coupling plan;
    SolveStats stats;
};

namespace detail {

struct ThrEntry {
    double t;
    double w;
    int j;
};

inline bool thr_less(const ThrEntry& a, const ThrEntry& b) {
    return a.t != b.t ? a.t < b.t : a.j < b.j;
}

// Exact root of (1/eps_target-normalized) piecewise-linear equation
// sum_l (alpha - t_l)_+ w_l = eps_target over the given thresholds. Sorts in place.
inline double plus_part_root(std::vector<ThrEntry>& thr, double eps_target) {
    if (thr.empty()) return std::numeric_limits<double>::infinity();
    std::sort(thr.begin(), thr.end(), thr_less);
    double w_acc = 0.0, tw_acc = 0.0;
    const std::size_t count = thr.size();
    for (std::size_t k = 0; k < count; ++k) {
        w_acc += thr[k].w;
        tw_acc += thr[k].t * thr[k].w;
        double root = (eps_target + tw_acc) / w_acc;
        if (k + 1 == count || root <= thr[k + 1].t) return root;
    }
    return std::numeric_limits<double>::infinity();
}

template <int D>
struct IndexWindow {
    std::array<int, D> lo{};
    std::array<int, D> hi{};
    bool full = true;
    bool empty = false;
};

template <int D>
IndexWindow<D> make_window(const BoxDomain<D>& dom, const Vec<D>& x, double radius) {
    IndexWindow<D> w;
    for (int k = 0; k < D; ++k) {
        double h = dom.step(k);
        double flo = std::ceil((x[k] - radius - dom.lo[k]) / h - 0.5);
        double fhi = std::floor((x[k] + radius - dom.lo[k]) / h - 0.5);
        int jlo = std::max(0, static_cast<int>(flo));
        int jhi = std::min(dom.n[k] - 1, static_cast<int>(fhi));
        w.lo[k] = jlo;
        w.hi[k] = jhi;
        if (jlo > 0 || jhi < dom.n[k] - 1) w.full = false;
        if (jlo > jhi) w.empty = true;
    }
    return w;
}

template <int D, class Body>
void for_window(const BoxDomain<D>& dom, const IndexWindow<D>& w, Body&& body) {
    if (w.empty) return;
    std::array<int, D> idx = w.lo;
    for (;;) {
        body(dom.flat_index(idx));
        int k = D - 1;
        while (k >= 0) {
            if (++idx[k] <= w.hi[k]) break;
            idx[k] = w.lo[k];
            --k;
        }
        if (k < 0) break;
    }
}

// One half sweep: exactly re-solve every potential of the `upd` block against the fixed
// opposite block, returning the largest pre-update row marginal defect. Each row is
// solved on a geometric window; a window is accepted only if every excluded column is
// provably inactive at both the old and the new potential value.
template <int D>
double half_sweep(const GridMeasure<D>& upd, const GridMeasure<D>& fix,
                  std::vector<double>& pot_upd, const std::vector<double>& pot_fix,
                  double pot_fix_max, double eps, double& r_hint,
                  std::vector<ThrEntry>& scratch, bool update) {
    const BoxDomain<D>& dom = fix.domain;
    double h_max = 0.0;
    for (int k = 0; k < D; ++k) h_max = std::max(h_max, dom.step(k));
    const double r_cap = 2.0 * std::sqrt(dom.diameter2()) + 1.0;

    double defect_max = 0.0;
    for (std::size_t i = 0; i < upd.size(); ++i) {
        const Vec<D>& x = upd.node(i);
        const double pot_old = pot_upd[i];
        double radius = std::max(r_hint, 2.0 * h_max);
        double root, phi_old, cover;
        for (;;) {
            IndexWindow<D> w = make_window<D>(dom, x, radius);
            scratch.clear();
            for_window<D>(dom, w, [&](std::size_t j) {
                double c = 0.5 * norm2<D>(sub<D>(x, fix.node(j)));
                scratch.push_back(ThrEntry{c - pot_fix[j], fix.weights[j], static_cast<int>(j)});
            });
            if (scratch.empty()) {
                radius = std::min(2.0 * radius, r_cap);
                continue;
            }
            phi_old = 0.0;
            for (const ThrEntry& e : scratch) {
                double gain = pot_old - e.t;
                if (gain > 0.0) phi_old += gain * e.w;
            }
            phi_old /= eps;
            root = update ? plus_part_root(scratch, eps) : pot_old;
            cover = std::max(root, pot_old);
            if (w.full || 0.5 * radius * radius - pot_fix_max >= cover) break;
            // A window valid for the subset root is valid for the full root (subset
            // roots only overestimate), so one enlarged retry settles the row.
            radius = std::sqrt(2.0 * std::max(cover + pot_fix_max, 0.0)) + 2.0 * h_max;
        }
        defect_max = std::max(defect_max, std::abs(phi_old - 1.0));
        if (update) pot_upd[i] = root;
        double needed = std::sqrt(2.0 * std::max(cover + pot_fix_max, 0.0)) + 2.0 * h_max;
        r_hint = std::max(1.05 * needed, 0.9 * r_hint);
    }
    return defect_max;
}

}  // namespace detail

// 2 * [ sum a p + sum b q - (1/2eps) sum (a_i + b_j - c_ij)_+^2 p q ].
template <int D>
double dual_objective(const DualPotentials& pots, const GridMeasure<D>& rho0,
                      const GridMeasure<D>& rho1) {
    KahanSum acc;
    for (std::size_t i = 0; i < rho0.size(); ++i)
        acc.add(pots.a[i] * rho0.weights[i]);
    for (std::size_t j = 0; j < rho1.size(); ++j)
        acc.add(pots.b[j] * rho1.weights[j]);
    KahanSum penalty;
    for (std::size_t i = 0; i < rho0.size(); ++i) {
        const Vec<D>& x = rho0.node(i);
        double row = 0.0;
        for (std::size_t j = 0; j < rho1.size(); ++j) {
            double gain = pots.a[i] + pots.b[j] - 0.5 * norm2<D>(sub<D>(x, rho1.node(j)));
            if (gain > 0.0) row += gain * gain * rho1.weights[j];
        }
        penalty.add(row * rho0.weights[i]);
    }
    return 2.0 * (acc.value() - penalty.value() / (2.0 * pots.eps));
}

// Full transport cost |x-y|^2 plus eps * |u|_L2^2 of a sparse coupling.
template <int D>
double primal_objective(const Coupling& plan, const GridMeasure<D>& rho0,
                        const GridMeasure<D>& rho1) {
    KahanSum acc;
    for (const CouplingEntry& e : plan.entries) {
        double cost = norm2<D>(sub<D>(rho0.node(e.i), rho1.node(e.j)));
        double pq = rho0.weights[e.i] * rho1.weights[e.j];
        acc.add((cost + plan.eps * e.u) * e.u * pq);
    }
    return acc.value();
}

struct MarginalDefects {
    double row = 0.0;
    double col = 0.0;
};

template <int D>
MarginalDefects marginal_defects(const Coupling& plan, const GridMeasure<D>& rho0,
                                 const GridMeasure<D>& rho1) {
    if (plan.entries.empty()) throw NotACoupling("marginal_defects: empty plan");
    std::vector<double> row_sum(plan.n0, 0.0), col_sum(plan.n1, 0.0);
    for (const CouplingEntry& e : plan.entries) {
        if (e.i < 0 || e.j < 0 || static_cast<std::size_t>(e.i) >= plan.n0 ||
            static_cast<std::size_t>(e.j) >= plan.n1 || !(e.u > 0.0) || !std::isfinite(e.u))
            throw NotACoupling("marginal_defects: invalid entry");
        row_sum[e.i] += e.u * rho1.weights[e.j];
        col_sum[e.j] += e.u * rho0.weights[e.i];
    }
    MarginalDefects d;
    for (double s : row_sum) d.row = std::max(d.row, std::abs(s - 1.0));
    for (double s : col_sum) d.col = std::max(d.col, std::abs(s - 1.0));
    return d;
}

inline double support_fraction(const Coupling& plan) {
    return static_cast<double>(plan.entries.size()) /
           (static_cast<double>(plan.n0) * static_cast<double>(plan.n1));
}

// Recovers u = (1/eps)(a_i + b_j - c_ij)_+ row by row on validated windows.
template <int D>
Coupling recover_plan(const DualPotentials& pots, const GridMeasure<D>& rho0,
                      const GridMeasure<D>& rho1, double drop_tol = 1e-15) {
    Coupling plan;
    plan.n0 = rho0.size();
    plan.n1 = rho1.size();
    plan.eps = pots.eps;
    double b_max = 0.0;
    for (double v : pots.b) b_max = std::max(b_max, v);
    const BoxDomain<D>& dom = rho1.domain;
    double h_max = 0.0;
    for (int k = 0; k < D; ++k) h_max = std::max(h_max, dom.step(k));
    for (std::size_t i = 0; i < rho0.size(); ++i) {
        const Vec<D>& x = rho0.node(i);
        double radius = std::sqrt(2.0 * std::max(pots.a[i] + b_max, 0.0)) + 2.0 * h_max;
        detail::IndexWindow<D> w = detail::make_window<D>(dom, x, radius);
        detail::for_window<D>(dom, w, [&](std::size_t j) {
            double gain = pots.a[i] + pots.b[j] - 0.5 * norm2<D>(sub<D>(x, rho1.node(j)));
            if (gain > 0.0) {
                double u = gain / pots.eps;
                if (u > drop_tol)
                    plan.entries.push_back(
                        CouplingEntry{static_cast<int>(i), static_cast<int>(j), u});
            }
        });
    }
    return plan;
}

template <int D>
SolveResult solve(const GridMeasure<D>& rho0, const GridMeasure<D>& rho1, double eps,
                  const SolveOptions& opts = {}) {
    if (!(eps > 0.0)) throw ConfigError("solve: eps must be positive");
    if (!(opts.tol > 0.0)) throw ConfigError("solve: tol must be positive");
    const std::size_t n0 = rho0.size(), n1 = rho1.size();

    DualPotentials pots;
    pots.eps = eps;
    pots.a = opts.init_a.empty() ? std::vector<double>(n0, 0.0) : opts.init_a;
    pots.b = opts.init_b.empty() ? std::vector<double>(n1, 0.0) : opts.init_b;
    if (pots.a.size() != n0 || pots.b.size() != n1)
        throw DimensionMismatch("solve: init potentials have wrong length");

    if (opts.max_iter < 1) throw ConfigError("solve: max_iter must be at least 1");

    SolveStats stats;
    double b_max = *std::max_element(pots.b.begin(), pots.b.end());
    double r_hint_a = std::sqrt(2.0 * eps), r_hint_b = std::sqrt(2.0 * eps);
    std::vector<detail::ThrEntry> scratch;
    std::vector<double> a_prev;

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        a_prev = pots.a;
        double d_row = detail::half_sweep<D>(rho0, rho1, pots.a, pots.b, b_max, eps, r_hint_a,
                                             scratch, true);
        if (d_row <= opts.tol) {
            pots.a = a_prev;
            stats.iterations = iter - 1;
            break;
        }
        double a_max = *std::max_element(pots.a.begin(), pots.a.end());
        detail::half_sweep<D>(rho1, rho0, pots.b, pots.a, a_max, eps, r_hint_b, scratch, true);
        b_max = *std::max_element(pots.b.begin(), pots.b.end());
        stats.iterations = iter;
        if (opts.track_ascent) stats.ascent.push_back(dual_objective<D>(pots, rho0, rho1));
    }

    Coupling plan = recover_plan<D>(pots, rho0, rho1);
    MarginalDefects defects = marginal_defects<D>(plan, rho0, rho1);
    stats.defect_row = defects.row;
    stats.defect_col = defects.col;
    stats.converged = defects.row <= opts.tol && defects.col <= opts.tol;
    stats.support_fraction = support_fraction(plan);
    stats.primal = primal_objective<D>(plan, rho0, rho1);
    stats.dual = dual_objective<D>(pots, rho0, rho1);
    stats.gap = stats.primal - stats.dual;
    return SolveResult{std::move(pots), std::move(plan), std::move(stats)};
}

template <int D>
void write_plan_csv(const Coupling& plan, const GridMeasure<D>& rho0, const GridMeasure<D>& rho1,
                    std::ostream& out, const std::vector<std::string>& header_comments = {}) {
    for (const auto& line : header_comments) out << "# " << line << "\n";
    out << "i,j";
    for (int k = 0; k < D; ++k) out << ",x_" << (k + 1);
    for (int k = 0; k < D; ++k) out << ",y_" << (k + 1);
    out << ",density\n";
    for (const CouplingEntry& e : plan.entries) {
        out << e.i << "," << e.j;
        for (int k = 0; k < D; ++k) out << "," << fmt_full(rho0.node(e.i)[k]);
        for (int k = 0; k < D; ++k) out << "," << fmt_full(rho1.node(e.j)[k]);
        out << "," << fmt_full(e.u) << "\n";
    }
}

inline void write_solve_stats(const SolveStats& stats, double eps, std::ostream& out) {
    out << "{\n";
    out << "  \"converged\": " << (stats.converged ? "true" : "false") << ",\n";
    out << "  \"defect_col\": " << fmt_full(stats.defect_col) << ",\n";
    out << "  \"defect_row\": " << fmt_full(stats.defect_row) << ",\n";
    out << "  \"dual\": " << fmt_full(stats.dual) << ",\n";
    out << "  \"eps\": " << fmt_full(eps) << ",\n";
    out << "  \"gap\": " << fmt_full(stats.gap) << ",\n";
    out << "  \"iterations\": " << stats.iterations << ",\n";
    out << "  \"primal\": " << fmt_full(stats.primal) << ",\n";
    out << "  \"support_fraction\": " << fmt_full(stats.support_fraction) << "\n";
    out << "}\n";
}

}  // namespace qot

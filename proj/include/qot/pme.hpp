#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "qot/errors.hpp"
#include "qot/grid.hpp"
#include "qot/linalg.hpp"

namespace qot {

struct BarenblattProfile {
    double m = 2.0;
    int d = 1;
    double C = 1.0;
    double alpha_exp = 0.0;
    double beta_exp = 0.0;
};

inline BarenblattProfile make_barenblatt(double m, int d, double C) {
    if (!(m > 1.0)) throw ConfigError("make_barenblatt: need m > 1");
    if (d < 1) throw ConfigError("make_barenblatt: need d >= 1");
    if (!(C > 0.0)) throw ConfigError("make_barenblatt: need C > 0");
    BarenblattProfile p;
    p.m = m;
    p.d = d;
    p.C = C;
    p.beta_exp = 1.0 / (d * (m - 1.0) + 2.0);
    p.alpha_exp = d * p.beta_exp;
    return p;
}

inline double barenblatt_r2(const BarenblattProfile& p, double t, double r2) {
    double bracket =
        p.C - p.beta_exp * (p.m - 1.0) / (2.0 * p.m) * r2 / std::pow(t, 2.0 * p.beta_exp);
    if (bracket <= 0.0) return 0.0;
    return std::pow(t, -p.alpha_exp) * std::pow(bracket, 1.0 / (p.m - 1.0));
}

template <int D>
double barenblatt(const BarenblattProfile& p, double t, const Vec<D>& x) {
    if (p.d != D) throw DimensionMismatch("barenblatt: point dimension differs from profile");
    return barenblatt_r2(p, t, norm2<D>(x));
}

inline double support_radius(const BarenblattProfile& p, double t) {
    return std::pow(t, p.beta_exp) * std::sqrt(2.0 * p.m * p.C / (p.beta_exp * (p.m - 1.0)));
}

// Max pointwise PDE residual |d/dt B - Lap(B^m)| over the grid nodes well inside the
// positivity set (bracket >= 0.1 C). Central differences; the time step equals the
// spatial step so both truncation terms refine together.
template <int D>
double pme_residual(const BarenblattProfile& p, double t, const BoxDomain<D>& dom) {
    if (p.d != D) throw DimensionMismatch("pme_residual: grid dimension differs from profile");
    dom.validate();
    const double h = dom.step(0);
    const double k = h;
    const double t2b = std::pow(t, 2.0 * p.beta_exp);
    auto bm = [&](const Vec<D>& x) { return std::pow(barenblatt<D>(p, t, x), p.m); };

    double worst = 0.0;
    for (std::size_t i = 0; i < dom.num_nodes(); ++i) {
        Vec<D> x = dom.node(i);
        double bracket = p.C - p.beta_exp * (p.m - 1.0) / (2.0 * p.m) * norm2<D>(x) / t2b;
        if (bracket < 0.1 * p.C) continue;
        double dt = (barenblatt_r2(p, t + k, norm2<D>(x)) - barenblatt_r2(p, t - k, norm2<D>(x))) /
                    (2.0 * k);
        double lap = 0.0;
        double center = bm(x);
        for (int a = 0; a < D; ++a) {
            Vec<D> xp = x, xm = x;
            xp[a] += dom.step(a);
            xm[a] -= dom.step(a);
            lap += (bm(xp) - 2.0 * center + bm(xm)) / (dom.step(a) * dom.step(a));
        }
        worst = std::max(worst, std::abs(dt - lap));
    }
    return worst;
}

// Entropy E(u) = int (|x|^2/2) u + u^m/(m-1) against Lebesgue measure on the grid.
template <int D>
double free_energy(const BoxDomain<D>& dom, const std::vector<double>& u, double m) {
    dom.validate();
    if (u.size() != dom.num_nodes())
        throw DimensionMismatch("free_energy: field length differs from grid");
    if (!(m > 1.0)) throw ConfigError("free_energy: need m > 1");
    const double vol = dom.cell_volume();
    KahanSum acc;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] >= 0.0)) throw NonPositiveDensity("free_energy: negative field value");
        acc.add((0.5 * norm2<D>(dom.node(i)) * u[i] + std::pow(u[i], m) / (m - 1.0)) * vol);
    }
    return acc.value();
}

template <int D>
double lebesgue_mass(const BoxDomain<D>& dom, const std::vector<double>& u) {
    dom.validate();
    if (u.size() != dom.num_nodes())
        throw DimensionMismatch("lebesgue_mass: field length differs from grid");
    const double vol = dom.cell_volume();
    KahanSum acc;
    for (double v : u) acc.add(v * vol);
    return acc.value();
}

template <int D>
std::vector<double> barenblatt_field(const BarenblattProfile& p, double t,
                                     const BoxDomain<D>& dom) {
    std::vector<double> u(dom.num_nodes());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = barenblatt<D>(p, t, dom.node(i));
    return u;
}

// Snapshot in the measure CSV schema (weight column = Lebesgue cell volume).
template <int D>
void write_field_csv(const BoxDomain<D>& dom, const std::vector<double>& u, std::ostream& out,
                     const std::vector<std::string>& header_comments = {}) {
    if (u.size() != dom.num_nodes())
        throw DimensionMismatch("write_field_csv: field length differs from grid");
    for (const auto& line : header_comments) out << "# " << line << "\n";
    for (int k = 0; k < D; ++k) out << "x_" << (k + 1) << ",";
    out << "density,weight\n";
    const double vol = dom.cell_volume();
    for (std::size_t i = 0; i < u.size(); ++i) {
        Vec<D> x = dom.node(i);
        for (int k = 0; k < D; ++k) out << fmt_full(x[k]) << ",";
        out << fmt_full(u[i]) << "," << fmt_full(vol) << "\n";
    }
}

}  // namespace qot

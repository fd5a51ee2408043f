#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "qot/errors.hpp"
#include "qot/linalg.hpp"

namespace qot {

// Regular box grid with cell-centered nodes x_{i,k} = lo_k + (i + 1/2) h_k.
template <int D>
struct BoxDomain {
    Vec<D> lo{};
    Vec<D> hi{};
    std::array<int, D> n{};

    double step(int axis) const { return (hi[axis] - lo[axis]) / n[axis]; }

    double cell_volume() const {
        double v = 1.0;
        for (int k = 0; k < D; ++k) v *= step(k);
        return v;
    }

    std::size_t num_nodes() const {
        std::size_t c = 1;
        for (int k = 0; k < D; ++k) c *= static_cast<std::size_t>(n[k]);
        return c;
    }

    std::array<int, D> multi_index(std::size_t flat) const {
        std::array<int, D> idx{};
        for (int k = D - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(flat % static_cast<std::size_t>(n[k]));
            flat /= static_cast<std::size_t>(n[k]);
        }
        return idx;
    }

    std::size_t flat_index(const std::array<int, D>& idx) const {
        std::size_t flat = 0;
        for (int k = 0; k < D; ++k)
            flat = flat * static_cast<std::size_t>(n[k]) + static_cast<std::size_t>(idx[k]);
        return flat;
    }

    Vec<D> node(std::size_t flat) const {
        auto idx = multi_index(flat);
        Vec<D> x{};
        for (int k = 0; k < D; ++k) x[k] = lo[k] + (idx[k] + 0.5) * step(k);
        return x;
    }

    bool contains(const Vec<D>& x) const {
        for (int k = 0; k < D; ++k)
            if (x[k] < lo[k] || x[k] > hi[k]) return false;
        return true;
    }

    double diameter2() const { return norm2<D>(sub<D>(hi, lo)); }

    void validate() const {
        for (int k = 0; k < D; ++k) {
            if (n[k] <= 0) throw EmptyGrid("BoxDomain: n must be positive on every axis");
            if (!(hi[k] > lo[k]) || !std::isfinite(lo[k]) || !std::isfinite(hi[k]))
                throw NonFiniteValue("BoxDomain: requires finite lo < hi");
        }
    }
};

// A probability density sampled at the grid nodes. weights[i] = density[i] * cellvol,
// normalized so the weights sum to one; lambda_lo/lambda_hi record the density range.
template <int D>
struct GridMeasure {
    BoxDomain<D> domain;
    std::vector<Vec<D>> nodes;
    std::vector<double> density;
    std::vector<double> weights;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;

    std::size_t size() const { return nodes.size(); }
    const Vec<D>& node(std::size_t i) const { return nodes[i]; }
};

template <int D, class Fn>
GridMeasure<D> build_grid_measure(const BoxDomain<D>& domain, Fn&& density_fn) {
    domain.validate();
    const std::size_t count = domain.num_nodes();

    GridMeasure<D> m;
    m.domain = domain;
    m.nodes.resize(count);
    m.density.resize(count);
    m.weights.resize(count);

    KahanSum raw_sum;
    for (std::size_t i = 0; i < count; ++i) {
        m.nodes[i] = domain.node(i);
        double v = density_fn(m.nodes[i]);
        if (!std::isfinite(v)) throw NonFiniteValue("build_grid_measure: density sample not finite");
        if (!(v > 0.0)) throw NonPositiveDensity("build_grid_measure: density sample <= 0 at a node");
        m.density[i] = v;
        raw_sum.add(v);
    }

    const double cellvol = domain.cell_volume();
    const double normalizer = 1.0 / (raw_sum.value() * cellvol);
    m.lambda_lo = std::numeric_limits<double>::infinity();
    m.lambda_hi = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        m.density[i] *= normalizer;
        m.weights[i] = m.density[i] * cellvol;
        m.lambda_lo = std::min(m.lambda_lo, m.density[i]);
        m.lambda_hi = std::max(m.lambda_hi, m.density[i]);
    }
    return m;
}

template <int D, class Fn>
double integrate(const GridMeasure<D>& measure, Fn&& f) {
    KahanSum acc;
    for (std::size_t i = 0; i < measure.size(); ++i) {
        double v = f(measure.nodes[i]);
        if (!std::isfinite(v)) throw NonFiniteValue("integrate: integrand not finite at a node");
        acc.add(v * measure.weights[i]);
    }
    return acc.value();
}

inline std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <int D>
void write_measure_csv(const GridMeasure<D>& measure, std::ostream& out,
                       const std::vector<std::string>& header_comments = {}) {
    for (const auto& line : header_comments) out << "# " << line << "\n";
    for (int k = 0; k < D; ++k) out << "x_" << (k + 1) << ",";
    out << "density,weight\n";
    for (std::size_t i = 0; i < measure.size(); ++i) {
        for (int k = 0; k < D; ++k) out << fmt_full(measure.nodes[i][k]) << ",";
        out << fmt_full(measure.density[i]) << "," << fmt_full(measure.weights[i]) << "\n";
    }
}

}  // namespace qot

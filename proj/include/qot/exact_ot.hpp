#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <vector>

#include "qot/analytic.hpp"
#include "qot/errors.hpp"
#include "qot/grid.hpp"

namespace qot {

enum class OTMethod { quantile1d, analytic_map, exact_lp };

struct ExactOTResult {
    double value = 0.0;
    OTMethod method = OTMethod::quantile1d;
    std::size_t support_size = 0;
};

struct PlanEntry {
    int i;
    int j;
    double mass;
};

struct TransportLP {
    double value = 0.0;
    std::vector<PlanEntry> plan;
};

// Exact transportation LP on dense cost (row-major, n0 x n1), solved by the network
// simplex on the bipartite graph. Deterministic: Dantzig pricing with fixed scan order,
// Bland fallback against cycling.
inline TransportLP solve_transport_lp(const std::vector<double>& supply,
                                      const std::vector<double>& demand,
                                      const std::vector<double>& cost) {
    const int n0 = static_cast<int>(supply.size());
    const int n1 = static_cast<int>(demand.size());
    const int m = n0 + n1 - 1;

    std::vector<int> arc_row(m), arc_col(m);
    std::vector<double> arc_flow(m);

    // Northwest-corner initial basis: one basic cell per step, advancing one index.
    {
        std::vector<double> a = supply, b = demand;
        int i = 0, j = 0;
        for (int s = 0; s < m; ++s) {
            double t = std::min(a[i], b[j]);
            arc_row[s] = i;
            arc_col[s] = j;
            arc_flow[s] = t;
            a[i] -= t;
            b[j] -= t;
            if (a[i] <= 0.0 && i + 1 < n0)
                ++i;
            else
                ++j;
        }
    }

    double cmax = 1.0;
    for (double c : cost) cmax = std::max(cmax, std::abs(c));
    const double tol_rc = 1e-12 * cmax;

    std::vector<double> u(n0), v(n1);
    std::vector<char> u_set(n0), v_set(n1);
    std::vector<std::vector<int>> adj(n0 + n1);

    auto rebuild = [&]() {
        for (auto& lst : adj) lst.clear();
        for (int s = 0; s < m; ++s) {
            adj[arc_row[s]].push_back(s);
            adj[n0 + arc_col[s]].push_back(s);
        }
        std::fill(u_set.begin(), u_set.end(), 0);
        std::fill(v_set.begin(), v_set.end(), 0);
        std::vector<int> stack{0};
        u[0] = 0.0;
        u_set[0] = 1;
        while (!stack.empty()) {
            int node = stack.back();
            stack.pop_back();
            for (int s : adj[node]) {
                int r = arc_row[s], c = arc_col[s];
                if (node == r && !v_set[c]) {
                    v[c] = cost[static_cast<std::size_t>(r) * n1 + c] - u[r];
                    v_set[c] = 1;
                    stack.push_back(n0 + c);
                } else if (node == n0 + c && !u_set[r]) {
                    u[r] = cost[static_cast<std::size_t>(r) * n1 + c] - v[c];
                    u_set[r] = 1;
                    stack.push_back(r);
                }
            }
        }
    };

    const long pivot_soft = 30L * (n0 + n1);
    const long pivot_hard = 400L * (n0 + n1) + 10000L;
    for (long pivot = 0;; ++pivot) {
        if (pivot > pivot_hard)
            throw NonFiniteValue("solve_transport_lp: pivot limit exceeded");
        rebuild();

        // Dantzig pricing (most negative reduced cost); Bland (first negative) once
        // the soft pivot cap is passed, to rule out degenerate cycling.
        const bool bland = pivot > pivot_soft;
        int enter_i = -1, enter_j = -1;
        double best = -tol_rc;
        for (int i = 0; i < n0 && (enter_i < 0 || !bland); ++i) {
            const double* crow = cost.data() + static_cast<std::size_t>(i) * n1;
            for (int j = 0; j < n1; ++j) {
                double r = crow[j] - u[i] - v[j];
                if (r < best) {
                    best = r;
                    enter_i = i;
                    enter_j = j;
                    if (bland) break;
                }
            }
        }
        if (enter_i < 0) break;

        // Tree path from entering row node to entering column node.
        std::vector<int> parent_arc(n0 + n1, -1), parent_node(n0 + n1, -1);
        std::vector<char> seen(n0 + n1, 0);
        std::queue<int> bfs;
        bfs.push(enter_i);
        seen[enter_i] = 1;
        while (!bfs.empty()) {
            int node = bfs.front();
            bfs.pop();
            if (node == n0 + enter_j) break;
            for (int s : adj[node]) {
                int other = (node == arc_row[s]) ? n0 + arc_col[s] : arc_row[s];
                if (!seen[other]) {
                    seen[other] = 1;
                    parent_arc[other] = s;
                    parent_node[other] = node;
                    bfs.push(other);
                }
            }
        }

        std::vector<int> path;
        for (int node = n0 + enter_j; node != enter_i; node = parent_node[node])
            path.push_back(parent_arc[node]);

        double theta = std::numeric_limits<double>::infinity();
        int leave_pos = -1;
        for (std::size_t s = 0; s < path.size(); ++s) {
            if (s % 2 == 0 && arc_flow[path[s]] < theta) {
                theta = arc_flow[path[s]];
                leave_pos = static_cast<int>(s);
            }
        }
        for (std::size_t s = 0; s < path.size(); ++s)
            arc_flow[path[s]] += (s % 2 == 0) ? -theta : theta;

        int slot = path[leave_pos];
        arc_row[slot] = enter_i;
        arc_col[slot] = enter_j;
        arc_flow[slot] = theta;
    }

    TransportLP result;
    KahanSum total;
    for (int s = 0; s < m; ++s) {
        if (arc_flow[s] > 1e-15) {
            result.plan.push_back(PlanEntry{arc_row[s], arc_col[s], arc_flow[s]});
            total.add(arc_flow[s] * cost[static_cast<std::size_t>(arc_row[s]) * n1 + arc_col[s]]);
        }
    }
    std::sort(result.plan.begin(), result.plan.end(), [](const PlanEntry& a, const PlanEntry& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    result.value = total.value();
    return result;
}

// W2^2 between two 1-D grid measures by exact merge of the piecewise-constant quantile
// functions. Ties in remaining mass advance the atom with the smaller position first.
template <int D>
ExactOTResult w2_quantile_1d(const GridMeasure<D>& rho0, const GridMeasure<D>& rho1) {
    if constexpr (D != 1) {
        throw DimensionMismatch("w2_quantile_1d: requires d = 1");
    } else {
        std::vector<std::size_t> ord0(rho0.size()), ord1(rho1.size());
        std::iota(ord0.begin(), ord0.end(), std::size_t{0});
        std::iota(ord1.begin(), ord1.end(), std::size_t{0});
        std::stable_sort(ord0.begin(), ord0.end(),
                         [&](std::size_t a, std::size_t b) { return rho0.nodes[a][0] < rho0.nodes[b][0]; });
        std::stable_sort(ord1.begin(), ord1.end(),
                         [&](std::size_t a, std::size_t b) { return rho1.nodes[a][0] < rho1.nodes[b][0]; });

        KahanSum acc;
        std::size_t i = 0, j = 0;
        double a = rho0.weights[ord0[0]];
        double b = rho1.weights[ord1[0]];
        while (true) {
            double dxy = rho0.nodes[ord0[i]][0] - rho1.nodes[ord1[j]][0];
            double t = std::min(a, b);
            acc.add(t * dxy * dxy);
            a -= t;
            b -= t;
            if (a <= 0.0) {
                if (++i >= rho0.size()) break;
                a = rho0.weights[ord0[i]];
            }
            if (b <= 0.0) {
                if (++j >= rho1.size()) break;
                b = rho1.weights[ord1[j]];
            }
        }
        return ExactOTResult{acc.value(), OTMethod::quantile1d, 0};
    }
}

// W2^2 from the analytic map: integral of |x - grad_g_star(x)|^2 against rho0.
template <int D>
ExactOTResult w2_from_map(const AnalyticPair<D>& pair) {
    double v = integrate<D>(pair.rho0, [&](const Vec<D>& x) {
        return norm2<D>(sub<D>(x, pair.grad_g_star(x)));
    });
    return ExactOTResult{v, OTMethod::analytic_map, 0};
}

// Exact discrete Kantorovich value on small instances (oracle for tests).
template <int D>
ExactOTResult w2_exact_small(const GridMeasure<D>& rho0, const GridMeasure<D>& rho1,
                             int max_points = 400) {
    const std::size_t n0 = rho0.size(), n1 = rho1.size();
    if (n0 * n1 > static_cast<std::size_t>(max_points) * static_cast<std::size_t>(max_points))
        throw TooLarge("w2_exact_small: instance exceeds max_points^2 product cap");
    std::vector<double> cost(n0 * n1);
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j)
            cost[i * n1 + j] = norm2<D>(sub<D>(rho0.nodes[i], rho1.nodes[j]));
    TransportLP lp = solve_transport_lp(rho0.weights, rho1.weights, cost);
    return ExactOTResult{lp.value, OTMethod::exact_lp, lp.plan.size()};
}

}  // namespace qot

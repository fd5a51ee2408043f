#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "qot/analytic.hpp"
#include "qot/constants.hpp"
#include "qot/errors.hpp"
#include "qot/exact_ot.hpp"
#include "qot/grid.hpp"
#include "qot/qot_solver.hpp"

namespace qot {

// Barenblatt height constant eps^{2/(d+2)} c_d^{-2/(d+2)} (rho0(x) rho1(grad_g_star x))^{-1/(d+2)}.
template <int D>
double c_eps(const AnalyticPair<D>& pair, const Vec<D>& x, double eps) {
    const DimensionalConstants dc = constants(D);
    double density_prod = pair.rho0_fn(x) * pair.rho1_fn(pair.grad_g_star(x));
    return std::pow(eps, 2.0 / (D + 2)) * std::pow(dc.c_d, -2.0 / (D + 2)) *
           std::pow(density_prod, -1.0 / (D + 2));
}

// Candidate first potential f_eps = |x|^2/2 - g*(x) + C_eps(x).
template <int D>
double f_eps(const AnalyticPair<D>& pair, const Vec<D>& x, double eps) {
    return 0.5 * norm2<D>(x) - pair.g_star(x) + c_eps<D>(pair, x, eps);
}

// Gamma_eps(f_eps, |.|^2/2 - g) by double quadrature. The truncation argument is
// computed as C_eps(x) - D(x,y), which keeps the support boundary stable; pairs with
// D >= C_eps are excluded exactly by the Bregman growth bound D >= |y - grad_g_star(x)|^2/(2 sigma_M).
template <int D>
double gamma_eps(const AnalyticPair<D>& pair, double eps) {
    KahanSum linear;
    for (std::size_t i = 0; i < pair.rho0.size(); ++i)
        linear.add(f_eps<D>(pair, pair.rho0.node(i), eps) * pair.rho0.weights[i]);
    for (std::size_t j = 0; j < pair.rho1.size(); ++j) {
        const Vec<D>& y = pair.rho1.node(j);
        linear.add((0.5 * norm2<D>(y) - pair.g(y)) * pair.rho1.weights[j]);
    }

    const BoxDomain<D>& dom1 = pair.rho1.domain;
    double h_max = 0.0;
    for (int k = 0; k < D; ++k) h_max = std::max(h_max, dom1.step(k));
    KahanSum penalty;
    for (std::size_t i = 0; i < pair.rho0.size(); ++i) {
        const Vec<D>& x = pair.rho0.node(i);
        double ce = c_eps<D>(pair, x, eps);
        Vec<D> ystar = pair.grad_g_star(x);
        double radius = std::sqrt(2.0 * pair.sigma_M * ce) + 2.0 * h_max;
        detail::IndexWindow<D> w = detail::make_window<D>(dom1, ystar, radius);
        double row = 0.0;
        detail::for_window<D>(dom1, w, [&](std::size_t j) {
            double gain = ce - bregman_divergence<D>(pair, x, pair.rho1.node(j));
            if (gain > 0.0) row += gain * gain * pair.rho1.weights[j];
        });
        penalty.add(row * pair.rho0.weights[i]);
    }
    return linear.value() - penalty.value() / (2.0 * eps);
}

namespace detail {

// Per-point cache of C_eps and the Hessian of g*, shared by the symmetric-density loops.
template <int D>
struct PointData {
    std::vector<Vec<D>> pts;
    std::vector<double> ceps;
    std::vector<Mat<D>> hess;
};

template <int D>
PointData<D> make_point_data(const AnalyticPair<D>& pair, double eps, std::vector<Vec<D>> pts) {
    PointData<D> pd;
    pd.pts = std::move(pts);
    pd.ceps.resize(pd.pts.size());
    pd.hess.resize(pd.pts.size());
    for (std::size_t i = 0; i < pd.pts.size(); ++i) {
        pd.ceps[i] = c_eps<D>(pair, pd.pts[i], eps);
        pd.hess[i] = pair.hess_g_star(pd.pts[i]);
    }
    return pd;
}

// Symmetric evaluation: swapping (A,i) with (B,j) returns the bit-identical value.
template <int D>
double m_val(const PointData<D>& a, std::size_t i, const PointData<D>& b, std::size_t j,
             double eps) {
    Vec<D> diff = sub<D>(a.pts[i], b.pts[j]);
    double heights = a.ceps[i] + b.ceps[j];
    double quads = 0.5 * quad_form<D>(a.hess[i], diff) + 0.5 * quad_form<D>(b.hess[j], diff);
    double gain = heights - quads;
    return gain > 0.0 ? gain / (2.0 * eps) : 0.0;
}

}  // namespace detail

// Symmetric pre-normalized density (1/2eps)(C(x) + C(x') - |x-x'|^2_{H(x)}/2 - |x-x'|^2_{H(x')}/2)_+.
template <int D>
double m_eps(const AnalyticPair<D>& pair, const Vec<D>& x, const Vec<D>& xp, double eps) {
    Vec<D> diff = sub<D>(x, xp);
    double heights = c_eps<D>(pair, x, eps) + c_eps<D>(pair, xp, eps);
    double quads = 0.5 * quad_form<D>(pair.hess_g_star(x), diff) +
                   0.5 * quad_form<D>(pair.hess_g_star(xp), diff);
    double gain = heights - quads;
    return gain > 0.0 ? gain / (2.0 * eps) : 0.0;
}

// Support radius of m_eps: positivity forces sigma_m |x-x'|^2 < 2 max C_eps.
template <int D>
double m_support_radius(const AnalyticPair<D>& pair, double eps) {
    double c_max = 0.0;
    for (std::size_t i = 0; i < pair.rho0.size(); ++i)
        c_max = std::max(c_max, c_eps<D>(pair, pair.rho0.node(i), eps));
    return std::sqrt(2.0 * c_max / pair.sigma_m);
}

struct XiMarginal {
    Coupling xi;
    std::vector<double> rho_eps;
    double z_norm = 0.0;
};

// Normalized density xi = m / integral(m) on rho0 x rho0 (band-sparse) and its common
// marginal rho_eps.
template <int D>
XiMarginal xi_and_marginal(const AnalyticPair<D>& pair, double eps) {
    const GridMeasure<D>& rho0 = pair.rho0;
    const BoxDomain<D>& dom = rho0.domain;
    double h_max = 0.0;
    for (int k = 0; k < D; ++k) h_max = std::max(h_max, dom.step(k));
    detail::PointData<D> nodes = detail::make_point_data<D>(pair, eps, rho0.nodes);
    const double radius = m_support_radius<D>(pair, eps) + 2.0 * h_max;

    KahanSum z_acc;
    for (std::size_t i = 0; i < rho0.size(); ++i) {
        detail::IndexWindow<D> w = detail::make_window<D>(dom, rho0.node(i), radius);
        double row = 0.0;
        detail::for_window<D>(dom, w, [&](std::size_t j) {
            row += detail::m_val<D>(nodes, i, nodes, j, eps) * rho0.weights[j];
        });
        z_acc.add(row * rho0.weights[i]);
    }

    XiMarginal out;
    out.z_norm = z_acc.value();
    out.xi.n0 = rho0.size();
    out.xi.n1 = rho0.size();
    out.xi.eps = eps;
    out.rho_eps.assign(rho0.size(), 0.0);
    for (std::size_t i = 0; i < rho0.size(); ++i) {
        detail::IndexWindow<D> w = detail::make_window<D>(dom, rho0.node(i), radius);
        double row = 0.0;
        detail::for_window<D>(dom, w, [&](std::size_t j) {
            double v = detail::m_val<D>(nodes, i, nodes, j, eps);
            if (v > 0.0) {
                double xi_v = v / out.z_norm;
                out.xi.entries.push_back(
                    CouplingEntry{static_cast<int>(i), static_cast<int>(j), xi_v});
                row += xi_v * rho0.weights[j];
            }
        });
        out.rho_eps[i] = row;
    }
    return out;
}

struct PsiSolution {
    std::vector<double> psi;
    double lo_scaled = 0.0;
    double hi_scaled = 0.0;
};

// For each region node x, the exact root of (1/eps) sum_{x' in region}
// (psi - D(x, grad_g_star(x')))_+ w_{x'} = s(x). Same piecewise-linear kernel as the
// solver rows; the scaled bracket of psi / eps^{2/(d+2)} is reported.
template <int D>
PsiSolution solve_psi(const AnalyticPair<D>& pair, const std::vector<std::size_t>& region,
                      const std::vector<double>& s, double eps) {
    if (region.empty()) throw EmptyRegion("solve_psi: empty region");
    if (s.size() != region.size())
        throw DimensionMismatch("solve_psi: target length differs from region");
    for (double v : s)
        if (!(v > 0.0)) throw TargetOutOfRange("solve_psi: targets must be strictly positive");

    std::vector<Vec<D>> images(region.size());
    for (std::size_t k = 0; k < region.size(); ++k)
        images[k] = pair.grad_g_star(pair.rho0.node(region[k]));

    PsiSolution out;
    out.psi.resize(region.size());
    std::vector<detail::ThrEntry> thr;
    thr.reserve(region.size());
    for (std::size_t k = 0; k < region.size(); ++k) {
        const Vec<D>& x = pair.rho0.node(region[k]);
        thr.clear();
        for (std::size_t l = 0; l < region.size(); ++l)
            thr.push_back(detail::ThrEntry{bregman_divergence<D>(pair, x, images[l]),
                                           pair.rho0.weights[region[l]], static_cast<int>(l)});
        out.psi[k] = detail::plus_part_root(thr, eps * s[k]);
    }
    const double scale = std::pow(eps, 2.0 / (D + 2));
    auto [lo_it, hi_it] = std::minmax_element(out.psi.begin(), out.psi.end());
    out.lo_scaled = *lo_it / scale;
    out.hi_scaled = *hi_it / scale;
    return out;
}

// Partition of rho0 nodes by distance to the box boundary.
struct FrameSpec {
    double delta = 0.0;
    std::vector<std::size_t> inner_nodes;
    std::vector<std::size_t> frame_nodes;
    std::vector<char> is_inner;
};

template <int D>
FrameSpec make_frame(const GridMeasure<D>& rho0, double delta) {
    FrameSpec fs;
    fs.delta = delta;
    fs.is_inner.assign(rho0.size(), 0);
    for (std::size_t i = 0; i < rho0.size(); ++i) {
        const Vec<D>& x = rho0.node(i);
        double dist = std::numeric_limits<double>::infinity();
        for (int k = 0; k < D; ++k) {
            dist = std::min(dist, x[k] - rho0.domain.lo[k]);
            dist = std::min(dist, rho0.domain.hi[k] - x[k]);
        }
        if (dist > delta) {
            fs.is_inner[i] = 1;
            fs.inner_nodes.push_back(i);
        } else {
            fs.frame_nodes.push_back(i);
        }
    }
    return fs;
}

struct FrameCoupling {
    std::vector<std::size_t> frame_nodes;
    std::vector<double> h;  // dense row-major over frame x frame
    std::vector<double> c_psi;
    double ell_frame = 0.0;

    double at(std::size_t a, std::size_t b) const { return h[a * frame_nodes.size() + b]; }
};

// Mass-fixing symmetric kernel on the boundary layer. With M(a,b) =
// (c(a) - D(x_a, grad_g_star(x_b)))_+ / eps and c from solve_psi at targets q, the kernel
// h(x,x') = sum_z M(x',z) M(x,z) w_z / (sum_v M(v,z) w_v) has row integrals exactly q.
template <int D>
FrameCoupling frame_coupling(const AnalyticPair<D>& pair, const FrameSpec& frame,
                             const std::vector<double>& q, double eps) {
    const std::size_t nf = frame.frame_nodes.size();
    if (nf == 0) throw EmptyRegion("frame_coupling: empty frame");
    if (q.size() != nf) throw DimensionMismatch("frame_coupling: q length differs from frame");
    for (double v : q)
        if (v < 1.0 / 3.0 - 1e-12 || v > 1.0 + 1e-12)
            throw TargetOutOfRange("frame_coupling: target q outside [1/3, 1]");
    if (nf > 5000) throw TooLarge("frame_coupling: frame too large for dense assembly");

    FrameCoupling fc;
    fc.frame_nodes = frame.frame_nodes;
    fc.c_psi = solve_psi<D>(pair, frame.frame_nodes, q, eps).psi;
    fc.ell_frame = static_cast<double>(nf) * pair.rho0.domain.cell_volume();

    std::vector<Vec<D>> images(nf);
    for (std::size_t k = 0; k < nf; ++k)
        images[k] = pair.grad_g_star(pair.rho0.node(frame.frame_nodes[k]));

    // M is band sparse; accumulate h = M^T diag(w_z / den_z) M over per-column actives.
    fc.h.assign(nf * nf, 0.0);
    std::vector<int> active;
    std::vector<double> mcol;
    for (std::size_t z = 0; z < nf; ++z) {
        active.clear();
        mcol.clear();
        double den = 0.0;
        for (std::size_t v = 0; v < nf; ++v) {
            double gain =
                fc.c_psi[v] - bregman_divergence<D>(pair, pair.rho0.node(frame.frame_nodes[v]),
                                                    images[z]);
            if (gain > 0.0) {
                double m = gain / eps;
                active.push_back(static_cast<int>(v));
                mcol.push_back(m);
                den += m * pair.rho0.weights[frame.frame_nodes[v]];
            }
        }
        if (den <= 0.0) continue;
        double sz = pair.rho0.weights[frame.frame_nodes[z]] / den;
        for (std::size_t a = 0; a < active.size(); ++a) {
            double* hrow = fc.h.data() + static_cast<std::size_t>(active[a]) * nf;
            for (std::size_t b = 0; b < active.size(); ++b)
                hrow[active[b]] += (mcol[a] * mcol[b]) * sz;
        }
    }
    return fc;
}

namespace detail {

// Monotone rearrangement between two weight vectors on the same sorted 1-D grid,
// through the piecewise-linear cell CDFs (each cell spreads its weight uniformly).
inline std::vector<double> quantile_map_1d(const std::vector<double>& nodes, double h,
                                           const std::vector<double>& src_w,
                                           const std::vector<double>& dst_w) {
    const std::size_t n = nodes.size();
    double dst_total = 0.0;
    for (double w : dst_w) dst_total += w;
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) cum[k + 1] = cum[k] + dst_w[k] / dst_total;
    cum[n] = 1.0;

    std::vector<double> map(n);
    double src_cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double f = src_cum + 0.5 * src_w[i];
        src_cum += src_w[i];
        auto it = std::upper_bound(cum.begin(), cum.end(), f);
        std::size_t k = std::min<std::size_t>(n - 1, static_cast<std::size_t>(it - cum.begin()) - 1);
        double cell_mass = cum[k + 1] - cum[k];
        double left = nodes[k] - 0.5 * h;
        map[i] = left + (f - cum[k]) / cell_mass * h;
    }
    for (std::size_t i = 1; i < n; ++i)
        if (!(map[i] > map[i - 1]))
            throw MapNotInjective("quantile_map_1d: mapped points not strictly increasing");
    return map;
}

// Coarse exact-LP barycentric displacement map for d >= 2: aggregate both measures to a
// coarse grid, solve the transportation LP there, interpolate the displacement
// multilinearly back to the fine nodes.
template <int D>
std::vector<Vec<D>> lp_displacement_map(const GridMeasure<D>& rho0,
                                        const std::vector<double>& dst_w) {
    int nc = 2;
    while (std::pow(nc + 1.0, D) <= 400.0) ++nc;
    BoxDomain<D> coarse = rho0.domain;
    for (int k = 0; k < D; ++k) coarse.n[k] = nc;
    const std::size_t ncells = coarse.num_nodes();

    std::vector<double> src_mass(ncells, 0.0), dst_mass(ncells, 0.0);
    std::vector<std::size_t> cell_of(rho0.size());
    for (std::size_t i = 0; i < rho0.size(); ++i) {
        std::array<int, D> idx{};
        for (int k = 0; k < D; ++k) {
            double u = (rho0.node(i)[k] - coarse.lo[k]) / coarse.step(k);
            idx[k] = std::clamp(static_cast<int>(u), 0, nc - 1);
        }
        cell_of[i] = coarse.flat_index(idx);
        src_mass[cell_of[i]] += rho0.weights[i];
        dst_mass[cell_of[i]] += dst_w[i];
    }
    double src_total = 0.0, dst_total = 0.0;
    for (std::size_t c = 0; c < ncells; ++c) {
        src_total += src_mass[c];
        dst_total += dst_mass[c];
    }
    for (std::size_t c = 0; c < ncells; ++c) dst_mass[c] *= src_total / dst_total;

    std::vector<double> cost(ncells * ncells);
    for (std::size_t a = 0; a < ncells; ++a)
        for (std::size_t b = 0; b < ncells; ++b)
            cost[a * ncells + b] = norm2<D>(sub<D>(coarse.node(a), coarse.node(b)));
    TransportLP lp = solve_transport_lp(src_mass, dst_mass, cost);

    std::vector<Vec<D>> bary(ncells);
    std::vector<double> bary_mass(ncells, 0.0);
    for (const PlanEntry& e : lp.plan) {
        Vec<D> y = coarse.node(e.j);
        for (int k = 0; k < D; ++k) bary[e.i][k] += e.mass * y[k];
        bary_mass[e.i] += e.mass;
    }
    std::vector<Vec<D>> disp(ncells, Vec<D>{});
    for (std::size_t c = 0; c < ncells; ++c)
        if (bary_mass[c] > 0.0)
            disp[c] = sub<D>(scale<D>(1.0 / bary_mass[c], bary[c]), coarse.node(c));

    auto disp_at = [&](const Vec<D>& x) {
        std::array<int, D> base{};
        Vec<D> t{};
        for (int k = 0; k < D; ++k) {
            double u = (x[k] - (coarse.lo[k] + 0.5 * coarse.step(k))) / coarse.step(k);
            int i0 = std::clamp(static_cast<int>(std::floor(u)), 0, nc - 2);
            base[k] = i0;
            t[k] = std::clamp(u - i0, 0.0, 1.0);
        }
        Vec<D> r{};
        for (int corner = 0; corner < (1 << D); ++corner) {
            double wgt = 1.0;
            std::array<int, D> idx = base;
            for (int k = 0; k < D; ++k) {
                if (corner & (1 << k)) {
                    idx[k] += 1;
                    wgt *= t[k];
                } else {
                    wgt *= 1.0 - t[k];
                }
            }
            const Vec<D>& dc = disp[coarse.flat_index(idx)];
            for (int k = 0; k < D; ++k) r[k] += wgt * dc[k];
        }
        return r;
    };

    // Bijectivity check through the finite-difference Jacobian of the displacement.
    const double fd = 0.5 * coarse.step(0);
    auto jac_ok = [&]() {
        for (std::size_t i = 0; i < rho0.size(); ++i) {
            Mat<D> jac{};
            for (int k = 0; k < D; ++k) {
                Vec<D> xp = rho0.node(i), xm = rho0.node(i);
                xp[k] = std::min(xp[k] + fd, rho0.domain.hi[k]);
                xm[k] = std::max(xm[k] - fd, rho0.domain.lo[k]);
                Vec<D> dp = disp_at(xp), dm = disp_at(xm);
                for (int r = 0; r < D; ++r) {
                    double der = (dp[r] - dm[r]) / (xp[k] - xm[k]);
                    jac[r][k] = der + (r == k ? 1.0 : 0.0);
                }
            }
            if (!(determinant<D>(jac) > 0.0)) return false;
        }
        return true;
    };
    // The raw barycentric field can fold where boundary cells dump mass inward;
    // neighbor-averaging rounds cap its slope until the Jacobian clears.
    for (int round = 0; !jac_ok(); ++round) {
        if (round >= 60)
            throw MapNotInjective("lp_displacement_map: nonpositive Jacobian determinant");
        std::vector<Vec<D>> smoothed(ncells);
        for (std::size_t c = 0; c < ncells; ++c) {
            std::array<int, D> idx = coarse.multi_index(c);
            Vec<D> acc = disp[c];
            double cnt = 1.0;
            for (int k = 0; k < D; ++k)
                for (int dir : {-1, 1}) {
                    std::array<int, D> nb = idx;
                    nb[k] += dir;
                    if (nb[k] < 0 || nb[k] >= coarse.n[k]) continue;
                    const Vec<D>& dn = disp[coarse.flat_index(nb)];
                    for (int r = 0; r < D; ++r) acc[r] += dn[r];
                    cnt += 1.0;
                }
            smoothed[c] = scale<D>(1.0 / cnt, acc);
        }
        disp = std::move(smoothed);
    }

    std::vector<Vec<D>> map(rho0.size());
    for (std::size_t i = 0; i < rho0.size(); ++i) {
        map[i] = add<D>(rho0.node(i), disp_at(rho0.node(i)));
        for (int k = 0; k < D; ++k)
            map[i][k] = std::clamp(map[i][k], rho0.domain.lo[k], rho0.domain.hi[k]);
    }
    return map;
}

}  // namespace detail

template <int D>
struct GlassResult {
    Coupling v;  // density against rho0 x rho0
    std::vector<Vec<D>> map;
    std::vector<double> rho_eps;
    std::vector<double> rho_eps_mapped;
    std::vector<double> q;
    double z_norm = 0.0;
    double r_m = 0.0;
    double sup_dev = 0.0;
    double defect_row = 0.0;
    double defect_col = 0.0;
};

// The corrected two-piece coupling: Barenblatt glass density transported by the
// discrete rearrangement map on (inner x all) u (all x inner), frame kernel on the rest.
template <int D>
GlassResult<D> glass_coupling(const AnalyticPair<D>& pair, const FrameSpec& frame, double eps) {
    const GridMeasure<D>& rho0 = pair.rho0;
    const BoxDomain<D>& dom = rho0.domain;
    const std::size_t n = rho0.size();
    double h_max = 0.0;
    for (int k = 0; k < D; ++k) h_max = std::max(h_max, dom.step(k));
    if (frame.inner_nodes.empty()) throw EmptyRegion("glass_coupling: empty inner region");

    GlassResult<D> out;
    out.r_m = m_support_radius<D>(pair, eps);
    // The construction degrades once the bump of an inner-edge row spans the whole
    // boundary layer and exits the box; there is no closed-form smallness threshold
    // for eps, so this proxy is the enforced check (q in [1/3,1] stays enforced too).
    if (out.r_m > 2.0 * frame.delta)
        throw EpsTooLargeForDelta("glass_coupling: m support radius exceeds twice delta");

    detail::PointData<D> nodes = detail::make_point_data<D>(pair, eps, rho0.nodes);
    const double band = out.r_m + 2.0 * h_max;

    KahanSum z_acc;
    out.rho_eps.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        detail::IndexWindow<D> w = detail::make_window<D>(dom, rho0.node(i), band);
        double row = 0.0;
        detail::for_window<D>(dom, w, [&](std::size_t j) {
            row += detail::m_val<D>(nodes, i, nodes, j, eps) * rho0.weights[j];
        });
        out.rho_eps[i] = row;
        z_acc.add(row * rho0.weights[i]);
    }
    out.z_norm = z_acc.value();
    for (std::size_t i = 0; i < n; ++i) out.rho_eps[i] /= out.z_norm;

    std::vector<double> dst_w(n);
    for (std::size_t i = 0; i < n; ++i) dst_w[i] = out.rho_eps[i] * rho0.weights[i];
    if constexpr (D == 1) {
        std::vector<double> coords(n);
        for (std::size_t i = 0; i < n; ++i) coords[i] = rho0.node(i)[0];
        std::vector<double> mapped =
            detail::quantile_map_1d(coords, dom.step(0), rho0.weights, dst_w);
        out.map.resize(n);
        for (std::size_t i = 0; i < n; ++i) out.map[i] = Vec<1>{mapped[i]};
    } else {
        out.map = detail::lp_displacement_map<D>(rho0, dst_w);
    }
    for (std::size_t i = 0; i < n; ++i)
        out.sup_dev = std::max(out.sup_dev, norm<D>(sub<D>(out.map[i], rho0.node(i))));

    detail::PointData<D> mapped = detail::make_point_data<D>(pair, eps, out.map);
    out.rho_eps_mapped.assign(n, 0.0);
    const double band_mixed = band + out.sup_dev;
    for (std::size_t i = 0; i < n; ++i) {
        detail::IndexWindow<D> w = detail::make_window<D>(dom, out.map[i], band_mixed);
        double row = 0.0;
        detail::for_window<D>(dom, w, [&](std::size_t j) {
            row += detail::m_val<D>(mapped, i, nodes, j, eps) * rho0.weights[j];
        });
        out.rho_eps_mapped[i] = row / out.z_norm;
    }

    out.v.n0 = n;
    out.v.n1 = n;
    out.v.eps = eps;
    std::vector<double> inner_mass(n, 0.0);
    const double band_pair = out.r_m + 2.0 * out.sup_dev + 2.0 * h_max;
    for (std::size_t i = 0; i < n; ++i) {
        detail::IndexWindow<D> w = detail::make_window<D>(dom, rho0.node(i), band_pair);
        detail::for_window<D>(dom, w, [&](std::size_t j) {
            if (!frame.is_inner[i] && !frame.is_inner[j]) return;
            double mv = detail::m_val<D>(mapped, i, mapped, j, eps);
            if (mv <= 0.0) return;
            double u = mv / (out.z_norm * (out.rho_eps_mapped[i] * out.rho_eps_mapped[j]));
            if (u > 1e-15) {
                out.v.entries.push_back(CouplingEntry{static_cast<int>(i), static_cast<int>(j), u});
                if (!frame.is_inner[i] && frame.is_inner[j])
                    inner_mass[i] += u * rho0.weights[j];
            }
        });
    }

    out.q.resize(frame.frame_nodes.size());
    for (std::size_t k = 0; k < frame.frame_nodes.size(); ++k)
        out.q[k] = 1.0 - inner_mass[frame.frame_nodes[k]];

    FrameCoupling fc = frame_coupling<D>(pair, frame, out.q, eps);
    const std::size_t nf = frame.frame_nodes.size();
    for (std::size_t a = 0; a < nf; ++a)
        for (std::size_t b = 0; b < nf; ++b) {
            double hv = fc.at(a, b);
            if (hv > 0.0)
                out.v.entries.push_back(CouplingEntry{static_cast<int>(frame.frame_nodes[a]),
                                                      static_cast<int>(frame.frame_nodes[b]), hv});
        }

    MarginalDefects defects = marginal_defects<D>(out.v, rho0, rho0);
    out.defect_row = defects.row;
    out.defect_col = defects.col;
    return out;
}

// Transport value of the coupling (Id x grad_g)_#(v d(rho0 x rho0)): its density
// against rho0 x rho1 is v(x, grad_g_star(y)), and both the cost and the squared-density
// integrals pull back exactly to the rho0 x rho0 grid.
template <int D>
double glass_primal_value(const AnalyticPair<D>& pair, const GlassResult<D>& glass) {
    const GridMeasure<D>& rho0 = pair.rho0;
    std::vector<Vec<D>> g_img(rho0.size());
    for (std::size_t j = 0; j < rho0.size(); ++j) g_img[j] = pair.grad_g(rho0.node(j));
    KahanSum acc;
    for (const CouplingEntry& e : glass.v.entries) {
        double cost = norm2<D>(sub<D>(rho0.node(e.i), g_img[e.j]));
        double pq = rho0.weights[e.i] * rho0.weights[e.j];
        acc.add((cost + glass.v.eps * e.u) * e.u * pq);
    }
    return acc.value();
}

// Self-similar profile of the limiting plan: (1/t)(C_t(xp) - |x-xp|^2_{H(xp)}/2)_+ with
// C_t the Barenblatt height constant at regularization t.
template <int D>
double corollary_profile_v(const AnalyticPair<D>& pair, double t, const Vec<D>& x,
                           const Vec<D>& xp) {
    double gain = c_eps<D>(pair, xp, t) - quadratic_divergence<D>(pair, xp, x);
    return gain > 0.0 ? gain / t : 0.0;
}

}  // namespace qot

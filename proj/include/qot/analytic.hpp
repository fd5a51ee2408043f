#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>

#include "qot/errors.hpp"
#include "qot/grid.hpp"
#include "qot/linalg.hpp"

namespace qot {

// Closed-form transport pair. grad_g pushes rho0 forward to rho1, grad_g_star is its
// inverse; rho0_fn/rho1_fn are the continuum densities (normalized consistently with the
// grid measures) so evaluators can leave the node set.
template <int D>
struct AnalyticPair {
    GridMeasure<D> rho0;
    GridMeasure<D> rho1;
    std::function<double(const Vec<D>&)> g;
    std::function<double(const Vec<D>&)> g_star;
    std::function<Vec<D>(const Vec<D>&)> grad_g;
    std::function<Vec<D>(const Vec<D>&)> grad_g_star;
    std::function<Mat<D>(const Vec<D>&)> hess_g_star;
    std::function<double(const Vec<D>&)> rho0_fn;
    std::function<double(const Vec<D>&)> rho1_fn;
    double sigma_m = 1.0;
    double sigma_M = 1.0;
    double alpha = 0.5;
    std::string label;
};

// D(x,y) = g*(x) + g(y) - <x,y>. Nonnegative for convex g; tiny negative round-off
// (>= -1e-10) is clamped to zero.
template <int D>
double bregman_divergence(const AnalyticPair<D>& pair, const Vec<D>& x, const Vec<D>& y) {
    double v = pair.g_star(x) + pair.g(y) - dot<D>(x, y);
    if (v < 0.0 && v >= -1e-10) return 0.0;
    return v;
}

// (1/2) <x - xp, hess_g_star(x) (x - xp)>.
template <int D>
double quadratic_divergence(const AnalyticPair<D>& pair, const Vec<D>& x, const Vec<D>& xp) {
    Vec<D> dxy = sub<D>(x, xp);
    return 0.5 * quad_form<D>(pair.hess_g_star(x), dxy);
}

namespace detail {

// Checks duality, Hessian bounds and the Monge-Ampere residual at every rho0 node.
template <int D>
void check_pair(const AnalyticPair<D>& pair) {
    for (std::size_t i = 0; i < pair.rho0.size(); ++i) {
        const Vec<D>& x = pair.rho0.node(i);
        Vec<D> y = pair.grad_g_star(x);
        double duality = pair.g_star(x) + pair.g(y) - dot<D>(x, y);
        if (std::abs(duality) > 1e-8)
            throw NonFiniteValue("AnalyticPair: convex duality violated at a node");
        Mat<D> h = pair.hess_g_star(x);
        EigBounds eb = sym_eig_bounds<D>(h);
        if (eb.min < pair.sigma_m - 1e-10 || eb.max > pair.sigma_M + 1e-10)
            throw NotPositiveDefinite("AnalyticPair: Hessian eigenvalue outside [sigma_m, sigma_M]");
        double residual = determinant<D>(h) - pair.rho0_fn(x) / pair.rho1_fn(y);
        if (std::abs(residual) > 1e-6)
            throw NonFiniteValue("AnalyticPair: Monge-Ampere residual above 1e-6");
    }
}

template <int D>
Vec<D> newton_invert(const std::function<Vec<D>(const Vec<D>&)>& grad,
                     const std::function<Mat<D>(const Vec<D>&)>& hess, const Vec<D>& y) {
    Vec<D> x = y;
    for (int it = 0; it < 100; ++it) {
        Vec<D> r = sub<D>(grad(x), y);
        if (norm2<D>(r) < 1e-30) return x;
        Vec<D> step = solve_spd<D>(hess(x), r);
        x = sub<D>(x, step);
    }
    throw NonFiniteValue("newton_invert: no convergence");
}

}  // namespace detail

template <int D>
AnalyticPair<D> make_identity_family(const BoxDomain<D>& domain,
                                     std::function<double(const Vec<D>&)> density_fn = nullptr) {
    if (!density_fn) density_fn = [](const Vec<D>&) { return 1.0; };
    AnalyticPair<D> pair;
    pair.rho0 = build_grid_measure<D>(domain, density_fn);
    pair.rho1 = pair.rho0;
    pair.g = [](const Vec<D>& y) { return 0.5 * norm2<D>(y); };
    pair.g_star = pair.g;
    pair.grad_g = [](const Vec<D>& y) { return y; };
    pair.grad_g_star = pair.grad_g;
    pair.hess_g_star = [](const Vec<D>&) { return identity_mat<D>(); };

    // Normalizer chosen so rho0_fn matches the stored grid density exactly at nodes.
    const double node_scale = pair.rho0.density[0] / density_fn(pair.rho0.node(0));
    pair.rho0_fn = [density_fn, node_scale](const Vec<D>& x) { return node_scale * density_fn(x); };
    pair.rho1_fn = pair.rho0_fn;
    pair.sigma_m = 1.0;
    pair.sigma_M = 1.0;
    pair.alpha = 0.5;
    pair.label = "identity";
    detail::check_pair<D>(pair);
    return pair;
}

// g(y) = (1/2)<y, A y> + <b, y> with A = diag(a) positive, so grad_g_star(x) = A^{-1}(x-b)
// and rho1 lives on the image box of grad_g_star.
template <int D>
AnalyticPair<D> make_affine_family(const BoxDomain<D>& domain, const Vec<D>& a_diag,
                                   const Vec<D>& b_shift,
                                   std::function<double(const Vec<D>&)> density_fn = nullptr) {
    for (int k = 0; k < D; ++k)
        if (!(a_diag[k] > 0.0))
            throw NotPositiveDefinite("make_affine_family: diagonal of A must be positive");
    if (!density_fn) density_fn = [](const Vec<D>&) { return 1.0; };

    AnalyticPair<D> pair;
    pair.rho0 = build_grid_measure<D>(domain, density_fn);

    double det_a = 1.0;
    for (int k = 0; k < D; ++k) det_a *= a_diag[k];

    pair.g = [a_diag, b_shift](const Vec<D>& y) {
        double s = 0.0;
        for (int k = 0; k < D; ++k) s += 0.5 * a_diag[k] * y[k] * y[k] + b_shift[k] * y[k];
        return s;
    };
    pair.g_star = [a_diag, b_shift](const Vec<D>& x) {
        double s = 0.0;
        for (int k = 0; k < D; ++k) {
            double t = x[k] - b_shift[k];
            s += 0.5 * t * t / a_diag[k];
        }
        return s;
    };
    pair.grad_g = [a_diag, b_shift](const Vec<D>& y) {
        Vec<D> r{};
        for (int k = 0; k < D; ++k) r[k] = a_diag[k] * y[k] + b_shift[k];
        return r;
    };
    pair.grad_g_star = [a_diag, b_shift](const Vec<D>& x) {
        Vec<D> r{};
        for (int k = 0; k < D; ++k) r[k] = (x[k] - b_shift[k]) / a_diag[k];
        return r;
    };
    pair.hess_g_star = [a_diag](const Vec<D>&) {
        Mat<D> h{};
        for (int k = 0; k < D; ++k) h[k][k] = 1.0 / a_diag[k];
        return h;
    };

    const double node_scale = pair.rho0.density[0] / density_fn(pair.rho0.node(0));
    auto rho0_fn = [density_fn, node_scale](const Vec<D>& x) { return node_scale * density_fn(x); };
    pair.rho0_fn = rho0_fn;
    auto grad_g = pair.grad_g;
    pair.rho1_fn = [rho0_fn, grad_g, det_a](const Vec<D>& y) { return rho0_fn(grad_g(y)) * det_a; };

    BoxDomain<D> domain1;
    domain1.n = domain.n;
    for (int k = 0; k < D; ++k) {
        domain1.lo[k] = (domain.lo[k] - b_shift[k]) / a_diag[k];
        domain1.hi[k] = (domain.hi[k] - b_shift[k]) / a_diag[k];
    }
    pair.rho1 = build_grid_measure<D>(domain1, pair.rho1_fn);

    double amin = a_diag[0], amax = a_diag[0];
    for (int k = 1; k < D; ++k) {
        amin = std::min(amin, a_diag[k]);
        amax = std::max(amax, a_diag[k]);
    }
    pair.sigma_m = 1.0 / amax;
    pair.sigma_M = 1.0 / amin;
    pair.alpha = 0.5;
    pair.label = "affine";
    detail::check_pair<D>(pair);
    return pair;
}

// g*(x) = (1/2)|x|^2 + eta * s(x) where s is a product of sin^2 bumps whose gradient
// vanishes on the box boundary, so grad_g_star maps the box onto itself. grad_g and g
// come from Newton inversion; eta is capped so the Hessian stays >= sigma_target * Id
// (Gershgorin bound on eta * hess(s), checked again nodewise).
template <int D>
AnalyticPair<D> make_perturbed_family(const BoxDomain<D>& domain, double eta,
                                      std::function<double(const Vec<D>&)> density_fn = nullptr,
                                      double sigma_target = 0.5) {
    if (!density_fn) density_fn = [](const Vec<D>&) { return 1.0; };
    constexpr double pi = std::numbers::pi;

    Vec<D> len{};
    for (int k = 0; k < D; ++k) len[k] = domain.hi[k] - domain.lo[k];

    double gersh = 0.0;
    for (int k = 0; k < D; ++k) {
        double row = 2.0 * pi * pi / (len[k] * len[k]);
        for (int j = 0; j < D; ++j)
            if (j != k) row += pi * pi / (len[j] * len[k]);
        gersh = std::max(gersh, row);
    }
    if (eta * gersh > 1.0 - sigma_target)
        throw NotPositiveDefinite("make_perturbed_family: eta too large for sigma_target");

    auto lo = domain.lo;
    auto s_fn = [lo, len](const Vec<D>& x) {
        double v = 1.0;
        for (int k = 0; k < D; ++k) {
            double u = (x[k] - lo[k]) / len[k];
            double sk = std::sin(pi * u);
            v *= sk * sk;
        }
        return v;
    };
    auto grad_s = [lo, len](const Vec<D>& x) {
        Vec<D> g{};
        for (int k = 0; k < D; ++k) {
            double prod = 1.0;
            for (int j = 0; j < D; ++j) {
                double u = (x[j] - lo[j]) / len[j];
                if (j == k)
                    prod *= pi / len[j] * std::sin(2.0 * pi * u);
                else {
                    double sj = std::sin(pi * u);
                    prod *= sj * sj;
                }
            }
            g[k] = prod;
        }
        return g;
    };
    auto hess_s = [lo, len](const Vec<D>& x) {
        Mat<D> h{};
        for (int k = 0; k < D; ++k) {
            for (int l = k; l < D; ++l) {
                double prod = 1.0;
                for (int j = 0; j < D; ++j) {
                    double u = (x[j] - lo[j]) / len[j];
                    if (k == l && j == k)
                        prod *= 2.0 * pi * pi / (len[j] * len[j]) * std::cos(2.0 * pi * u);
                    else if (j == k || j == l)
                        prod *= pi / len[j] * std::sin(2.0 * pi * u);
                    else {
                        double sj = std::sin(pi * u);
                        prod *= sj * sj;
                    }
                }
                h[k][l] = prod;
                h[l][k] = prod;
            }
        }
        return h;
    };

    AnalyticPair<D> pair;
    pair.rho0 = build_grid_measure<D>(domain, density_fn);
    pair.g_star = [s_fn, eta](const Vec<D>& x) { return 0.5 * norm2<D>(x) + eta * s_fn(x); };
    pair.grad_g_star = [grad_s, eta](const Vec<D>& x) {
        Vec<D> g = scale<D>(eta, grad_s(x));
        return add<D>(x, g);
    };
    pair.hess_g_star = [hess_s, eta](const Vec<D>& x) {
        Mat<D> h = hess_s(x);
        for (int k = 0; k < D; ++k)
            for (int j = 0; j < D; ++j) h[k][j] *= eta;
        for (int k = 0; k < D; ++k) h[k][k] += 1.0;
        return h;
    };
    auto grad_g_star = pair.grad_g_star;
    auto hess_g_star = pair.hess_g_star;
    auto g_star = pair.g_star;
    pair.grad_g = [grad_g_star, hess_g_star](const Vec<D>& y) {
        return detail::newton_invert<D>(grad_g_star, hess_g_star, y);
    };
    pair.g = [grad_g_star, hess_g_star, g_star](const Vec<D>& y) {
        Vec<D> x = detail::newton_invert<D>(grad_g_star, hess_g_star, y);
        return dot<D>(x, y) - g_star(x);
    };

    const double node_scale = pair.rho0.density[0] / density_fn(pair.rho0.node(0));
    auto rho0_fn = [density_fn, node_scale](const Vec<D>& x) { return node_scale * density_fn(x); };
    pair.rho0_fn = rho0_fn;
    auto grad_g = pair.grad_g;
    pair.rho1_fn = [rho0_fn, grad_g, hess_g_star](const Vec<D>& y) {
        Vec<D> x = grad_g(y);
        return rho0_fn(x) / determinant<D>(hess_g_star(x));
    };
    pair.rho1 = build_grid_measure<D>(domain, pair.rho1_fn);

    double emin = 1.0, emax = 1.0;
    for (std::size_t i = 0; i < pair.rho0.size(); ++i) {
        EigBounds eb = sym_eig_bounds<D>(pair.hess_g_star(pair.rho0.node(i)));
        emin = std::min(emin, eb.min);
        emax = std::max(emax, eb.max);
    }
    if (emin < sigma_target - 1e-12)
        throw NotPositiveDefinite("make_perturbed_family: Hessian fell below sigma_target");
    pair.sigma_m = emin;
    pair.sigma_M = emax;
    pair.alpha = 0.5;
    pair.label = "perturbed";
    detail::check_pair<D>(pair);
    return pair;
}

// Named factory used by the CLI; params are family-specific scalars.
template <int D>
AnalyticPair<D> make_family(const std::string& kind, const BoxDomain<D>& domain,
                            double a_scalar = 2.0, double b_scalar = 0.0, double eta = 0.02) {
    if (kind == "identity") return make_identity_family<D>(domain);
    if (kind == "affine") {
        Vec<D> a{}, b{};
        for (int k = 0; k < D; ++k) {
            a[k] = a_scalar;
            b[k] = b_scalar;
        }
        return make_affine_family<D>(domain, a, b);
    }
    if (kind == "perturbed") return make_perturbed_family<D>(domain, eta);
    throw ConfigError("make_family: unknown family '" + kind + "'");
}

}  // namespace qot

#pragma once

// Adaptive Simpson quadrature plus the radial paraboloid integrals used as
// independent oracles for the dimensional constants.

#include <cmath>
#include <stdexcept>

namespace testsupport {

template <class Fn>
double simpson_recurse(Fn&& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class Fn>
double integrate_adaptive(Fn&& f, double a, double b, double tol = 1e-12) {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 48);
}

// integral over R^d of (a - |u|^2/2)_+^p du, reduced to a radial 1-D integral:
// surface(S^{d-1}) * int_0^{sqrt(2a)} (a - r^2/2)^p r^{d-1} dr.
inline double radial_plus_integral(int d, double a, double p) {
    if (d != 1 && d != 2) throw std::invalid_argument("radial_plus_integral: d must be 1 or 2");
    const double surface = (d == 1) ? 2.0 : 2.0 * 3.14159265358979323846;
    const double rmax = std::sqrt(2.0 * a);
    return surface * integrate_adaptive(
                         [&](double r) {
                             double bracket = a - 0.5 * r * r;
                             if (bracket < 0.0) bracket = 0.0;
                             return std::pow(bracket, p) * std::pow(r, d - 1);
                         },
                         0.0, rmax, 1e-13);
}

}  // namespace testsupport

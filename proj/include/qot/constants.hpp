#pragma once

#include <cmath>
#include <numbers>

#include "qot/errors.hpp"

namespace qot {

// Radial integrals of the truncated paraboloid and the limit-theorem constant.
// c_d1 = integral (1 - |u|^2/2)_+ du, c_d2 = same with square; c_d au pair with c_d1.
struct DimensionalConstants {
    int d = 0;
    double sphere_area = 0.0;
    double c_d = 0.0;
    double c_d1 = 0.0;
    double c_d2 = 0.0;
    double theorem_constant = 0.0;
};

inline DimensionalConstants constants(int d) {
    if (d < 1 || d > 3) throw UnsupportedDimension("constants: d must be 1, 2 or 3");
    DimensionalConstants c;
    c.d = d;
    switch (d) {
        case 1: c.sphere_area = 2.0; break;
        case 2: c.sphere_area = 2.0 * std::numbers::pi; break;
        default: c.sphere_area = 4.0 * std::numbers::pi; break;
    }
    c.c_d1 = std::pow(2.0, 0.5 * (d + 2)) * c.sphere_area / (d * (d + 2.0));
    c.c_d = c.c_d1;
    c.c_d2 = std::pow(2.0, 0.5 * (d + 6)) * c.sphere_area / (d * (d + 2.0) * (d + 4.0));
    c.theorem_constant = std::pow(static_cast<double>(d), (d + 4.0) / (d + 2.0)) *
                         std::pow(d + 2.0, 2.0 / (d + 2.0)) /
                         std::pow(c.sphere_area, 2.0 / (d + 2.0));
    return c;
}

}  // namespace qot

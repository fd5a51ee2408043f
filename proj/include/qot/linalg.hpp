#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "qot/errors.hpp"

namespace qot {

template <int D>
using Vec = std::array<double, D>;

template <int D>
using Mat = std::array<std::array<double, D>, D>;

template <int D>
inline double dot(const Vec<D>& a, const Vec<D>& b) {
    double s = 0.0;
    for (int k = 0; k < D; ++k) s += a[k] * b[k];
    return s;
}

template <int D>
inline Vec<D> sub(const Vec<D>& a, const Vec<D>& b) {
    Vec<D> r{};
    for (int k = 0; k < D; ++k) r[k] = a[k] - b[k];
    return r;
}

template <int D>
inline Vec<D> add(const Vec<D>& a, const Vec<D>& b) {
    Vec<D> r{};
    for (int k = 0; k < D; ++k) r[k] = a[k] + b[k];
    return r;
}

template <int D>
inline Vec<D> scale(double s, const Vec<D>& a) {
    Vec<D> r{};
    for (int k = 0; k < D; ++k) r[k] = s * a[k];
    return r;
}

// Squared Euclidean norm.
template <int D>
inline double norm2(const Vec<D>& a) {
    return dot<D>(a, a);
}

template <int D>
inline double norm(const Vec<D>& a) {
    return std::sqrt(norm2<D>(a));
}

template <int D>
inline Vec<D> mat_vec(const Mat<D>& m, const Vec<D>& v) {
    Vec<D> r{};
    for (int i = 0; i < D; ++i) {
        double s = 0.0;
        for (int j = 0; j < D; ++j) s += m[i][j] * v[j];
        r[i] = s;
    }
    return r;
}

// v^T M v.
template <int D>
inline double quad_form(const Mat<D>& m, const Vec<D>& v) {
    return dot<D>(v, mat_vec<D>(m, v));
}

template <int D>
inline Mat<D> identity_mat() {
    Mat<D> m{};
    for (int i = 0; i < D; ++i) m[i][i] = 1.0;
    return m;
}

template <int D>
inline Eigen::Matrix<double, D, D> to_eigen(const Mat<D>& m) {
    Eigen::Matrix<double, D, D> e;
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) e(i, j) = m[i][j];
    return e;
}

template <int D>
inline Mat<D> from_eigen(const Eigen::Matrix<double, D, D>& e) {
    Mat<D> m{};
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) m[i][j] = e(i, j);
    return m;
}

struct EigBounds {
    double min;
    double max;
};

// Extreme eigenvalues of a symmetric matrix.
template <int D>
inline EigBounds sym_eig_bounds(const Mat<D>& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>> es(to_eigen<D>(m));
    const auto& ev = es.eigenvalues();
    return EigBounds{ev(0), ev(D - 1)};
}

template <int D>
inline double determinant(const Mat<D>& m) {
    return to_eigen<D>(m).determinant();
}

template <int D>
inline Mat<D> inverse(const Mat<D>& m) {
    Eigen::Matrix<double, D, D> e = to_eigen<D>(m);
    double det = e.determinant();
    if (!(std::abs(det) > 0.0))
        throw NotPositiveDefinite("inverse: singular matrix");
    return from_eigen<D>(Eigen::Matrix<double, D, D>(e.inverse()));
}

template <int D>
inline Vec<D> solve_spd(const Mat<D>& m, const Vec<D>& rhs) {
    Eigen::Matrix<double, D, D> a = to_eigen<D>(m);
    Eigen::Matrix<double, D, 1> b;
    for (int k = 0; k < D; ++k) b(k) = rhs[k];
    Eigen::LDLT<Eigen::Matrix<double, D, D>> ldlt(a);
    if (ldlt.info() != Eigen::Success)
        throw NotPositiveDefinite("solve_spd: factorization failed");
    Eigen::Matrix<double, D, 1> x = ldlt.solve(b);
    Vec<D> r{};
    for (int k = 0; k < D; ++k) r[k] = x(k);
    return r;
}

// Compensated accumulator; used wherever many small weights are summed.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        double y = v - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }

    double value() const { return sum; }
};

}  // namespace qot

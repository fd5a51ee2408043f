#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "qot/coupling.hpp"
#include "qot/exact_ot.hpp"
#include "qot/qot_solver.hpp"
#include "support/gap_limit.hpp"

using qot::BoxDomain;
using qot::c_eps;
using qot::constants;
using qot::f_eps;
using qot::frame_coupling;
using qot::FrameSpec;
using qot::gamma_eps;
using qot::glass_coupling;
using qot::glass_primal_value;
using qot::m_eps;
using qot::m_support_radius;
using qot::make_frame;
using qot::make_identity_family;
using qot::make_perturbed_family;
using qot::solve_psi;
using qot::Vec;
using qot::xi_and_marginal;

namespace {

qot::AnalyticPair<1> identity_1d(int n) {
    return make_identity_family<1>(BoxDomain<1>{{0.0}, {1.0}, {n}});
}

}  // namespace

TEST_CASE("height constant has the closed uniform form and power scaling") {
    auto pair = identity_1d(200);
    const double cd = constants(1).c_d;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        double expected = std::pow(eps, 2.0 / 3.0) * std::pow(cd, -2.0 / 3.0);
        CHECK(c_eps<1>(pair, Vec<1>{0.4}, eps) == Catch::Approx(expected).epsilon(1e-12));
        CHECK(c_eps<1>(pair, Vec<1>{0.4}, 2.0 * eps) / c_eps<1>(pair, Vec<1>{0.4}, eps) ==
              Catch::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-12));
    }
}

TEST_CASE("height constant respects the density floor bound") {
    auto pair = make_perturbed_family<1>(BoxDomain<1>{{0.0}, {1.0}, {400}}, 0.02);
    const double eps = 1e-3;
    const double lambda = pair.rho0.lambda_lo * pair.rho1.lambda_lo;
    const double bound =
        std::pow(eps, 2.0 / 3.0) / (std::pow(constants(1).c_d, 2.0 / 3.0) * std::pow(lambda, 1.0 / 3.0));
    // lambda_lo is the nodal floor; allow the O(h^2) gap to the continuum one.
    for (std::size_t i = 0; i < pair.rho0.size(); i += 29)
        CHECK(c_eps<1>(pair, pair.rho0.node(i), eps) <= bound * (1.0 + 1e-4));
}

TEST_CASE("candidate potential reduces to the height constant for the identity map") {
    auto pair = identity_1d(50);
    for (double x : {0.1, 0.5, 0.9})
        CHECK(f_eps<1>(pair, Vec<1>{x}, 1e-3) ==
              Catch::Approx(c_eps<1>(pair, Vec<1>{x}, 1e-3)).epsilon(1e-13));
}

TEST_CASE("dual candidate value stays below half the solver optimum") {
    auto pair = identity_1d(500);
    for (double eps : {3e-3, 1e-3}) {
        double gamma = gamma_eps<1>(pair, eps);
        auto res = qot::solve<1>(pair.rho0, pair.rho1, eps, {});
        REQUIRE(res.stats.converged);
        CHECK(2.0 * gamma <= res.stats.primal + 1e-9);
    }
}

TEST_CASE("scaled dual candidate approaches the gap limit constant") {
    auto pair = identity_1d(2000);
    const double eps = 1e-4;
    double scaled = 2.0 * gamma_eps<1>(pair, eps) / std::pow(eps, 2.0 / 3.0);
    CHECK(scaled == Catch::Approx(testsupport::gap_limit_constant(1)).epsilon(0.03));
}

TEST_CASE("symmetric density is positive at zero displacement and symmetric") {
    auto pair = make_perturbed_family<1>(BoxDomain<1>{{0.0}, {1.0}, {100}}, 0.02);
    const double eps = 1e-3;
    for (double x : {0.2, 0.5, 0.8}) {
        CHECK(m_eps<1>(pair, Vec<1>{x}, Vec<1>{x}, eps) ==
              Catch::Approx(c_eps<1>(pair, Vec<1>{x}, eps) / eps).epsilon(1e-12));
        for (double xp : {0.25, 0.55}) {
            double ab = m_eps<1>(pair, Vec<1>{x}, Vec<1>{xp}, eps);
            double ba = m_eps<1>(pair, Vec<1>{xp}, Vec<1>{x}, eps);
            CHECK(ab == ba);  // bitwise by construction
        }
    }
}

TEST_CASE("symmetric density vanishes outside the computed radius") {
    auto pair = identity_1d(300);
    for (double eps : {1e-2, 1e-3}) {
        double r = m_support_radius<1>(pair, eps);
        CHECK(m_eps<1>(pair, Vec<1>{0.5}, Vec<1>{0.5 + 1.001 * r}, eps) == 0.0);
        CHECK(m_eps<1>(pair, Vec<1>{0.5}, Vec<1>{0.5 + 0.9 * r}, eps) > 0.0);
        // scaled radius is eps-stable at first order
        CHECK(r / std::pow(eps, 1.0 / 3.0) ==
              Catch::Approx(std::sqrt(2.0 * std::pow(constants(1).c_d, -2.0 / 3.0))).epsilon(1e-6));
    }
}

TEST_CASE("normalized symmetric density integrates to one with equal marginals") {
    auto pair = identity_1d(400);
    auto xi = xi_and_marginal<1>(pair, 1e-3);
    qot::KahanSum total;
    std::vector<double> row(pair.rho0.size(), 0.0), col(pair.rho0.size(), 0.0);
    for (const auto& e : xi.xi.entries) {
        total.add(e.u * pair.rho0.weights[e.i] * pair.rho0.weights[e.j]);
        row[e.i] += e.u * pair.rho0.weights[e.j];
        col[e.j] += e.u * pair.rho0.weights[e.i];
    }
    CHECK(total.value() == Catch::Approx(1.0).margin(1e-10));
    qot::KahanSum mass;
    for (std::size_t i = 0; i < pair.rho0.size(); ++i) {
        CHECK(row[i] == Catch::Approx(col[i]).margin(1e-13));
        CHECK(row[i] == Catch::Approx(xi.rho_eps[i]).margin(1e-13));
        mass.add(xi.rho_eps[i] * pair.rho0.weights[i]);
    }
    CHECK(mass.value() == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("common marginal flattens on the interior as the bump narrows") {
    auto pair = identity_1d(1000);
    auto frame = make_frame<1>(pair.rho0, 0.1);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-3, 3e-4, 1e-4}) {
        auto xi = xi_and_marginal<1>(pair, eps);
        double worst = 0.0;
        for (std::size_t k : frame.inner_nodes)
            worst = std::max(worst, std::abs(xi.rho_eps[k] - 1.0));
        CHECK(worst < prev);
        prev = worst;
    }
    // Rows near the boundary lose bump mass, which inflates the interior level
    // by about (3/8) * radius after normalization.
    CHECK(prev < 0.5 * m_support_radius<1>(pair, 1e-4));
}

TEST_CASE("root finder reproduces the height constant in the interior") {
    auto pair = identity_1d(2000);
    const double eps = 1e-4;
    std::vector<std::size_t> region(pair.rho0.size());
    std::iota(region.begin(), region.end(), std::size_t{0});
    auto psi = solve_psi<1>(pair, region, std::vector<double>(region.size(), 1.0), eps);
    const double radius = m_support_radius<1>(pair, eps);
    double worst = 0.0;
    for (std::size_t i = 0; i < region.size(); ++i) {
        double x = pair.rho0.node(i)[0];
        if (std::min(x, 1.0 - x) < 1.5 * radius) continue;
        double ce = c_eps<1>(pair, pair.rho0.node(i), eps);
        worst = std::max(worst, std::abs(psi.psi[i] - ce) / ce);
    }
    CHECK(worst < 0.01);
    CHECK(psi.lo_scaled > 0.1);
    CHECK(psi.hi_scaled < 10.0);
}

TEST_CASE("root finder is strictly monotone in the target") {
    auto pair = identity_1d(150);
    std::vector<std::size_t> region(pair.rho0.size());
    std::iota(region.begin(), region.end(), std::size_t{0});
    auto one = solve_psi<1>(pair, region, std::vector<double>(region.size(), 1.0), 1e-3);
    auto two = solve_psi<1>(pair, region, std::vector<double>(region.size(), 2.0), 1e-3);
    for (std::size_t k = 0; k < region.size(); ++k) CHECK(two.psi[k] > one.psi[k]);
}

TEST_CASE("scaled root bracket stays pinned over a sweep") {
    auto pair = identity_1d(400);
    std::vector<std::size_t> region(pair.rho0.size());
    std::iota(region.begin(), region.end(), std::size_t{0});
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        auto psi = solve_psi<1>(pair, region, std::vector<double>(region.size(), 1.0), eps);
        CHECK(psi.lo_scaled > 0.2);
        CHECK(psi.hi_scaled < 5.0);
    }
}

TEST_CASE("root finder rejects bad inputs") {
    auto pair = identity_1d(20);
    CHECK_THROWS_AS(solve_psi<1>(pair, {}, {}, 1e-3), qot::EmptyRegion);
    CHECK_THROWS_AS(solve_psi<1>(pair, {0, 1}, {1.0}, 1e-3), qot::DimensionMismatch);
    CHECK_THROWS_AS(solve_psi<1>(pair, {0, 1}, {1.0, 0.0}, 1e-3), qot::TargetOutOfRange);
}

TEST_CASE("frame partition splits nodes by boundary distance") {
    auto pair = identity_1d(100);
    auto frame = make_frame<1>(pair.rho0, 0.15);
    CHECK(frame.inner_nodes.size() + frame.frame_nodes.size() == 100);
    for (std::size_t k : frame.inner_nodes) {
        double x = pair.rho0.node(k)[0];
        CHECK(std::min(x, 1.0 - x) > 0.15);
        CHECK(frame.is_inner[k] == 1);
    }
    for (std::size_t k : frame.frame_nodes) {
        double x = pair.rho0.node(k)[0];
        CHECK(std::min(x, 1.0 - x) <= 0.15);
        CHECK(frame.is_inner[k] == 0);
    }
}

TEST_CASE("frame kernel meets its marginal targets") {
    auto pair = identity_1d(300);
    auto frame = make_frame<1>(pair.rho0, 0.12);
    const double eps = 1e-3;
    std::vector<double> q(frame.frame_nodes.size(), 1.0);
    auto fc = frame_coupling<1>(pair, frame, q, eps);
    const std::size_t nf = frame.frame_nodes.size();
    for (std::size_t a = 0; a < nf; ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < nf; ++b) {
            row += fc.at(a, b) * pair.rho0.weights[frame.frame_nodes[b]];
            CHECK(fc.at(a, b) == fc.at(b, a));  // bitwise symmetric accumulation
        }
        CHECK(row == Catch::Approx(1.0).margin(1e-8));
    }

    std::vector<double> q_mixed(nf);
    for (std::size_t k = 0; k < nf; ++k) q_mixed[k] = 0.4 + 0.5 * (k % 3) / 2.0;
    auto fc2 = frame_coupling<1>(pair, frame, q_mixed, eps);
    for (std::size_t a = 0; a < nf; ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < nf; ++b)
            row += fc2.at(a, b) * pair.rho0.weights[frame.frame_nodes[b]];
        CHECK(row == Catch::Approx(q_mixed[a]).margin(1e-8));
    }
}

TEST_CASE("frame kernel energy and divergence scale with the boundary layer") {
    auto pair = identity_1d(400);
    auto frame = make_frame<1>(pair.rho0, 0.1);
    auto scaled_bounds = [&](double eps) {
        std::vector<double> q(frame.frame_nodes.size(), 1.0);
        auto fc = frame_coupling<1>(pair, frame, q, eps);
        const std::size_t nf = frame.frame_nodes.size();
        double energy = 0.0, diver = 0.0;
        for (std::size_t a = 0; a < nf; ++a)
            for (std::size_t b = 0; b < nf; ++b) {
                double w2 = pair.rho0.weights[frame.frame_nodes[a]] *
                            pair.rho0.weights[frame.frame_nodes[b]];
                double hv = fc.at(a, b);
                energy += 0.5 * eps * hv * hv * w2;
                diver += qot::bregman_divergence<1>(
                             pair, pair.rho0.node(frame.frame_nodes[a]),
                             pair.grad_g_star(pair.rho0.node(frame.frame_nodes[b]))) *
                         hv * w2;
            }
        double scale = fc.ell_frame * std::pow(eps, 2.0 / 3.0);
        return std::pair<double, double>{energy / scale, diver / scale};
    };
    auto coarse = scaled_bounds(1e-3);
    auto fine = scaled_bounds(2e-4);
    CHECK(coarse.first > 0.0);
    CHECK(fine.first / coarse.first > 0.3);
    CHECK(fine.first / coarse.first < 3.0);
    CHECK(fine.second / coarse.second > 0.3);
    CHECK(fine.second / coarse.second < 3.0);
}

TEST_CASE("frame kernel validates targets and size") {
    auto pair = identity_1d(60);
    auto frame = make_frame<1>(pair.rho0, 0.1);
    std::vector<double> low(frame.frame_nodes.size(), 0.2);
    CHECK_THROWS_AS(frame_coupling<1>(pair, frame, low, 1e-3), qot::TargetOutOfRange);
    std::vector<double> high(frame.frame_nodes.size(), 1.2);
    CHECK_THROWS_AS(frame_coupling<1>(pair, frame, high, 1e-3), qot::TargetOutOfRange);
    std::vector<double> short_q(2, 1.0);
    CHECK_THROWS_AS(frame_coupling<1>(pair, frame, short_q, 1e-3), qot::DimensionMismatch);

    auto big_pair = identity_1d(6000);
    auto big_frame = make_frame<1>(big_pair.rho0, 0.45);
    std::vector<double> q(big_frame.frame_nodes.size(), 1.0);
    CHECK_THROWS_AS(frame_coupling<1>(big_pair, big_frame, q, 1e-3), qot::TooLarge);
}

TEST_CASE("difference of exact and quadratic truncations fades under the gap scale") {
    auto pair = make_perturbed_family<1>(BoxDomain<1>{{0.0}, {1.0}, {300}}, 0.02);
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const double r = 2.0 * m_support_radius<1>(pair, eps);
        const double scale = std::pow(eps, 2.0 / 3.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < pair.rho0.size(); ++i) {
            const Vec<1>& x = pair.rho0.nodes[i];
            double ce = c_eps<1>(pair, x, eps);
            for (std::size_t j = i; j < pair.rho0.size(); ++j) {
                const Vec<1>& xp = pair.rho0.nodes[j];
                if (xp[0] - x[0] > r) break;
                double exact = ce - qot::bregman_divergence<1>(pair, x, pair.grad_g_star(xp));
                double quad = ce - qot::quadratic_divergence<1>(pair, x, xp);
                double diff = std::abs(std::max(exact, 0.0) - std::max(quad, 0.0));
                worst = std::max(worst, diff / scale);
            }
        }
        CHECK(worst < prev);
        prev = worst;
    }
}

TEST_CASE("assembled coupling satisfies the feasibility contract") {
    auto pair = identity_1d(400);
    auto frame = make_frame<1>(pair.rho0, 0.1);
    const double eps = 1e-3;
    auto glass = glass_coupling<1>(pair, frame, eps);

    CHECK(glass.defect_row <= 1e-3);
    CHECK(glass.defect_col <= 1e-3);
    CHECK(glass.defect_row == Catch::Approx(glass.defect_col).margin(1e-12));

    for (double qv : glass.q) {
        CHECK(qv >= 1.0 / 3.0 - 1e-12);
        CHECK(qv <= 1.0 + 1e-12);
    }

    // 1-D rearrangement map must be monotone and near the identity here.
    for (std::size_t i = 1; i < glass.map.size(); ++i)
        CHECK(glass.map[i][0] >= glass.map[i - 1][0]);
    CHECK(glass.sup_dev < 0.05);

    auto res = qot::solve<1>(pair.rho0, pair.rho1, eps, {});
    REQUIRE(res.stats.converged);
    CHECK(glass_primal_value<1>(pair, glass) >= res.stats.primal - 1e-9);
}

TEST_CASE("assembled coupling value approaches the gap limit from above") {
    auto pair = identity_1d(2000);
    const double eps = 1e-4;
    auto frame = make_frame<1>(pair.rho0, 0.05);
    auto glass = glass_coupling<1>(pair, frame, eps);
    double scaled = glass_primal_value<1>(pair, glass) / std::pow(eps, 2.0 / 3.0);
    double limit = testsupport::gap_limit_constant(1);
    CHECK(scaled >= limit - 1e-6);
    CHECK(scaled <= 1.10 * limit);
}

TEST_CASE("oversized bumps against the boundary layer are refused") {
    auto pair = identity_1d(300);
    auto frame = make_frame<1>(pair.rho0, 0.05);
    CHECK_THROWS_AS(glass_coupling<1>(pair, frame, 1e-2), qot::EpsTooLargeForDelta);
}

TEST_CASE("planar assembly stays feasible") {
    auto pair = make_identity_family<2>(BoxDomain<2>{{0.0, 0.0}, {1.0, 1.0}, {60, 60}});
    auto frame = make_frame<2>(pair.rho0, 0.2);
    auto glass = glass_coupling<2>(pair, frame, 3e-3);
    // The planar rearrangement map is a coarse-LP interpolant, so the marginal
    // defect settles at the few-percent level rather than the 1e-3 of the
    // exact quantile map in one dimension.
    CHECK(glass.defect_row <= 0.05);
    CHECK(glass.defect_col <= 0.05);
    for (double qv : glass.q) {
        CHECK(qv >= 1.0 / 3.0 - 1e-12);
        CHECK(qv <= 1.0 + 1e-12);
    }
    CHECK(glass.sup_dev < 0.1);
}

TEST_CASE("limit profile is positive at its center with cube root radius growth") {
    auto pair = identity_1d(101);
    Vec<1> xp{0.5};
    auto radius_of = [&](double t) {
        double lo = 0.0, hi = 0.5;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (qot::corollary_profile_v<1>(pair, t, Vec<1>{0.5 + mid}, xp) > 0.0 ? lo : hi) = mid;
        }
        return lo;
    };
    for (double t : {1e-3, 1e-2}) {
        CHECK(qot::corollary_profile_v<1>(pair, t, xp, xp) > 0.0);
        CHECK(radius_of(8.0 * t) / radius_of(t) == Catch::Approx(2.0).epsilon(1e-6));
    }
}

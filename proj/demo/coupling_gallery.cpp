// Walks the pieces of the two-piece feasible coupling at one (eps, delta) setting:
// the symmetric density and its marginal, the frame kernel targets, and the assembled
// coupling quality.

#include <cstdio>

#include "qot/coupling.hpp"

int main() {
    const auto pair =
        qot::make_identity_family<1>(qot::BoxDomain<1>{{0.0}, {1.0}, {300}});
    const double eps = 1e-3;
    const double delta = 0.1;

    const auto xi = qot::xi_and_marginal<1>(pair, eps);
    double rho_min = 1e300, rho_max = -1e300;
    for (double v : xi.rho_eps) {
        rho_min = v < rho_min ? v : rho_min;
        rho_max = v > rho_max ? v : rho_max;
    }
    std::printf("symmetric density: z_norm=%.12g entries=%zu rho_eps range [%.6g, %.6g]\n",
                xi.z_norm, xi.xi.entries.size(), rho_min, rho_max);

    const auto frame = qot::make_frame<1>(pair.rho0, delta);
    std::printf("frame: delta=%.3g inner=%zu frame=%zu\n", delta, frame.inner_nodes.size(),
                frame.frame_nodes.size());

    const auto glass = qot::glass_coupling<1>(pair, frame, eps);
    double q_min = 1e300, q_max = -1e300;
    for (double v : glass.q) {
        q_min = v < q_min ? v : q_min;
        q_max = v > q_max ? v : q_max;
    }
    std::printf("glass: r_m=%.6g sup_dev=%.3g q range [%.6g, %.6g]\n", glass.r_m,
                glass.sup_dev, q_min, q_max);
    std::printf("glass: entries=%zu defect_row=%.3g defect_col=%.3g\n",
                glass.v.entries.size(), glass.defect_row, glass.defect_col);
    std::printf("glass transport value %.10g at eps=%.3g\n",
                qot::glass_primal_value<1>(pair, glass), eps);
    return 0;
}

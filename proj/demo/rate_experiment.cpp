// Small eps sweep on the identity family: prints the gap table and the fitted rate.
// The full-size experiment lives behind `qot sweep`; this is the library-API version.

#include <cstdio>

#include "qot/rates.hpp"

int main() {
    const auto pair =
        qot::make_identity_family<1>(qot::BoxDomain<1>{{0.0}, {1.0}, {400}});
    const qot::RateReport rep = qot::sweep<1>(pair, {1e-2, 3e-3, 1e-3});

    std::printf("%-10s %-14s %-12s %-12s\n", "eps", "gap", "scaled_gap", "lower_curve");
    for (std::size_t k = 0; k < rep.eps_list.size(); ++k)
        std::printf("%-10.3g %-14.8g %-12.6g %-12.6g\n", rep.eps_list[k], rep.gaps[k],
                    rep.scaled_gaps[k], rep.lower_curve[k]);
    std::printf("\nfitted_exponent   %.4f\n", rep.fitted_exponent);
    std::printf("fitted_constant   %.6g\n", rep.fitted_constant);
    std::printf("closed-form ref   %.6g\n", rep.theoretical_constant);
    return 0;
}

// Prints the dimensional constants used by the rate experiments.

#include <cstdio>

#include "qot/constants.hpp"

int main() {
    std::printf("%2s  %-22s %-22s %-22s %-22s\n", "d", "sphere_area", "c_d1", "c_d2",
                "theorem_constant");
    for (int d = 1; d <= 3; ++d) {
        const auto c = qot::constants(d);
        std::printf("%2d  %-22.16g %-22.16g %-22.16g %-22.16g\n", d, c.sphere_area, c.c_d1,
                    c.c_d2, c.theorem_constant);
    }
    return 0;
}

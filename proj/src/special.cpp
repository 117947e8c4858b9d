#include "xpm/special.hpp"

#include <cmath>
#include <numbers>

namespace xpm {

double erfcx(double x) {
    if (x < 25.0) return std::exp(x * x) * std::erfc(x);
    // Asymptotic series; next term is below 1e-10 relative at x = 25.
    const double inv2 = 1.0 / (x * x);
    const double series =
        1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2 +
        6.5625 * inv2 * inv2 * inv2 * inv2;
    return series / (x * std::sqrt(std::numbers::pi));
}

}  // namespace xpm

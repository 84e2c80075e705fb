#include "qaefem/common.hpp"

#include <cmath>

namespace qaefem {

double SplitMix64::normal() {
    // Box-Muller; the sine branch is discarded so consumption per deviate is
    // two uniforms (plus redraws of an exactly-zero u1, probability 2^-53).
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace qaefem

#include "slicescope/bootstrap.hpp"

#include <cmath>

namespace slicescope {

uint32_t poisson_weight(uint64_t seed, uint32_t replicate, uint64_t row_index) {
    if (replicate == 0) return 1;
    uint64_t h = mix64(seed ^ (0xA24BAED4963EE407ull * replicate));
    h = mix64(h ^ (0x9FB21C651E98DF25ull * (row_index + 1)));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    // Poisson(1) by CDF inversion; u < 1 bounds the walk at ~18 steps.
    double p = std::exp(-1.0);
    double cdf = p;
    uint32_t k = 0;
    while (u >= cdf) {
        ++k;
        p /= k;
        cdf += p;
    }
    return k;
}

}  // namespace slicescope

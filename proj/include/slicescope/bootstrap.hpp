#pragma once

#include <cstdint>

namespace slicescope {

// splitmix64 finalizer.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Poisson(1) replication weight as a pure function of (seed, replicate, row):
// counter-based, so any worker recomputes it without coordination and the
// weight assignment is identical across partitionings and search strategies.
// Replicate 0 is the unresampled point estimate and always weighs 1.
uint32_t poisson_weight(uint64_t seed, uint32_t replicate, uint64_t row_index);

}  // namespace slicescope

#pragma once

#include <cmath>
#include <cstdint>

namespace nvoptics {

// Deterministic generator with a pinned integer-to-float mapping so that
// seeded outputs reproduce across platforms and compilers:
//
//   state' = state + 0x9E3779B97F4A7C15
//   z = state';  z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
//                z = (z ^ z>>27) * 0x94D049BB133111EB;  output z ^ z>>31
//
// uniform() keeps the top 53 bits: (z >> 11) * 2^-53, in [0, 1).
// normal() is the cosine branch of the Box-Muller transform, consuming
// exactly two uniforms: sqrt(-2 ln(1 - u1)) * cos(2 pi u2). The 1 - u1 shift
// moves the log argument into (0, 1].
class SplitMix64 {
 public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double normal() {
        constexpr double two_pi = 6.28318530717958647692;
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

 private:
    std::uint64_t state_;
};

}  // namespace nvoptics

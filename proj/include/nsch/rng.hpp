#pragma once
// ============================================================================
// Portable deterministic random numbers.
//
// std::mt19937_64 has a pinned algorithm, but the std distributions do not;
// mapping raw 64-bit draws to doubles by hand keeps every sampled value
// identical across standard libraries and platforms.
// ============================================================================

#include <cstdint>
#include <random>

namespace nsch {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Symmetric uniform in [-a, a).
    double symmetric(double a) { return uniform(-a, a); }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace nsch

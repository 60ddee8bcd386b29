#pragma once

#include <cstdint>

namespace kinesim {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

/// Counter-based splittable generator. Stream i of a given seed produces a
/// sequence that depends only on (seed, i, draw index), never on interleaving
/// or thread scheduling, which is what makes parallel sampling reproducible.
class CounterRng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix64(mix64(seed + kGolden) + kGolden * (stream + 1))), counter_(0) {}

    std::uint64_t next_u64() { return mix64(key_ + kGolden * ++counter_); }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Number of 64-bit draws made so far.
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace kinesim

#pragma once

#include <cstdint>

namespace qmcnet {

// SplitMix64 (Steele/Lea/Flood; Vigna's public-domain reference constants).
// All randomized code in this library draws from it so that runs are
// bit-reproducible across platforms. Parallel consumers never share a
// stream; they derive independent substreams keyed by (seed, index).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    // Substream `index` of `seed`: the keyed state is pushed through the
    // output mix so distinct indices land in unrelated orbit positions.
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
        return SplitMix64(mix(seed + kGamma * index));
    }

    std::uint64_t next() {
        state_ += kGamma;
        return mix(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4B7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace qmcnet

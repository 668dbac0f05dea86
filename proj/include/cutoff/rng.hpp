#pragma once

#include <cmath>
#include <cstdint>

namespace cutoff {

// Counter-based generator: every draw is a pure function of
// (seed, stream, substream, counter), so any subsequence can be replayed
// without storing state. Mixing is the splitmix64 finalizer applied to a
// golden-ratio weighted key chain.
struct CounterRng {
    uint64_t seed = 0;
    uint64_t stream = 0;
    uint64_t substream = 0;

    static constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t bits(uint64_t counter) const {
        uint64_t z = mix(seed + kGolden);
        z = mix(z ^ (stream + 1) * kGolden);
        z = mix(z ^ (substream + 1) * kGolden);
        return mix(z ^ (counter + 1) * kGolden);
    }

    // uniform in [0, 1), 53 random bits
    double uniform(uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    // Exponential(1); uniform() < 1 keeps the log argument positive.
    double exponential(uint64_t counter) const {
        return -std::log1p(-uniform(counter));
    }

    // integer in [0, bound) by rejection-free scaling (bound << 2^64)
    uint64_t below(uint64_t counter, uint64_t bound) const {
        return static_cast<uint64_t>(uniform(counter) * static_cast<double>(bound)) % bound;
    }
};

// Stream tags keeping independent purposes on disjoint streams.
enum class RngStream : uint64_t {
    EventGap = 1,
    EventUniform = 2,
    EventAux = 3,
    Replica = 4,
    ContactProcess = 5,
    Scratch = 6,
};

inline CounterRng make_rng(uint64_t seed, RngStream s, uint64_t substream) {
    return CounterRng{seed, static_cast<uint64_t>(s), substream};
}

}  // namespace cutoff

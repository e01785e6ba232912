#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace syncookie {

// Seeded stream of 64-bit values. Bounded draws are done by hand rather than
// through <random> distributions so that output is identical across standard
// library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Independent stream for one purpose (loss draws, ISNs, addresses...).
    // Adding a consumer never perturbs the other purposes' sequences.
    static RandomStream for_purpose(std::uint64_t seed, std::string_view purpose);

    std::uint64_t next_u64() { return engine_(); }
    std::uint32_t next_u32() { return static_cast<std::uint32_t>(engine_() >> 32); }

    // Uniform in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound);

    // Uniform in [0, 1).
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace syncookie

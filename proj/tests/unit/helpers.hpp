#pragma once

#include <cmath>
#include <cstdint>

#include "syncookie/cookie_codec.hpp"
#include "syncookie/random.hpp"

namespace testing {

inline syncookie::FourTuple random_tuple(syncookie::RandomStream& rng) {
    return {rng.next_u32(), static_cast<syncookie::Port>(rng.next_u32()), rng.next_u32(),
            static_cast<syncookie::Port>(rng.next_u32())};
}

inline syncookie::SecretKey test_key(std::uint64_t n = 1) {
    return syncookie::SecretKey::from_words(0x0123456789abcdefULL * n, 0xfedcba9876543210ULL ^ n);
}

// |observed - n p| <= 3 sqrt(n p (1-p))
inline bool within_three_sigma(std::uint64_t observed, std::uint64_t n, double p) {
    const double mean = static_cast<double>(n) * p;
    const double sigma = std::sqrt(static_cast<double>(n) * p * (1 - p));
    return std::fabs(static_cast<double>(observed) - mean) <= 3 * sigma;
}

}  // namespace testing

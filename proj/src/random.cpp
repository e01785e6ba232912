#include "syncookie/random.hpp"

namespace syncookie {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream RandomStream::for_purpose(std::uint64_t seed, std::string_view purpose) {
    // FNV-1a over the purpose tag, then mixed with the run seed.
    std::uint64_t tag = 0xcbf29ce484222325ULL;
    for (unsigned char c : purpose) {
        tag ^= c;
        tag *= 0x100000001b3ULL;
    }
    return RandomStream(splitmix64(seed ^ splitmix64(tag)));
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
    // Rejection sampling on the top of the range keeps draws unbiased.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

}  // namespace syncookie

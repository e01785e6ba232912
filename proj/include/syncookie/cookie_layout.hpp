#pragma once

// Public cookie parameters: field widths, MSS table, acceptance window.
// Everything here is knowable by an outside observer, so the adversary may
// depend on this header but never on cookie_codec.hpp.

#include <cstdint>
#include <vector>

namespace syncookie {

// Coarse timer, t = floor(seconds / 64).
using CounterValue = std::uint64_t;
using Isn = std::uint32_t;
using MssIndex = std::uint32_t;

inline constexpr std::uint64_t kCounterPeriodSeconds = 64;

// Cookie bit layout, high to low: timer | mss index | hash.
// When the widths sum to less than 32 the cookie sits in the low bits and the
// high bits are zero.
struct CookieLayout {
    unsigned timer_bits = 5;
    unsigned mss_bits = 3;
    unsigned hash_bits = 24;

    // Default widths with only the hash field shrunk.
    static CookieLayout with_hash_bits(unsigned hash_bits) { return {5, 3, hash_bits}; }

    unsigned width() const { return timer_bits + mss_bits + hash_bits; }
    std::uint64_t space() const { return std::uint64_t{1} << width(); }

    std::uint32_t hash_mask() const { return static_cast<std::uint32_t>((std::uint64_t{1} << hash_bits) - 1); }
    std::uint32_t mss_mask() const { return (1u << mss_bits) - 1; }
    std::uint32_t timer_mask() const { return (1u << timer_bits) - 1; }

    std::uint32_t timer_field(Isn v) const { return (v >> (mss_bits + hash_bits)) & timer_mask(); }
    std::uint32_t mss_field(Isn v) const { return (v >> hash_bits) & mss_mask(); }
    std::uint32_t hash_field(Isn v) const { return v & hash_mask(); }

    // True when v has no bits set above the cookie width.
    bool in_range(Isn v) const { return width() >= 32 || (v >> width()) == 0; }

    Isn compose(std::uint32_t timer, std::uint32_t mss, std::uint32_t hash) const {
        return ((timer & timer_mask()) << (mss_bits + hash_bits)) | ((mss & mss_mask()) << hash_bits) |
               (hash & hash_mask());
    }

    // Throws std::invalid_argument on timer_bits < 1, mss_bits < 1,
    // hash_bits < 4 or a total above 32.
    void validate() const;

    friend bool operator==(const CookieLayout&, const CookieLayout&) = default;
};

// MSS values the server round-trips through the cookie, strictly increasing.
struct MssTable {
    std::vector<std::uint16_t> values{536, 1300, 1440, 1460};

    static MssTable standard() { return {}; }
    // Eight-entry table of older kernels.
    static MssTable historical() { return {{64, 512, 536, 1024, 1440, 1460, 4312, 8960}}; }

    std::size_t size() const { return values.size(); }

    void validate(const CookieLayout& layout) const;

    friend bool operator==(const MssTable&, const MssTable&) = default;
};

// Accepted counter deltas now - t' are 0 .. deltas-1.
struct AcceptWindow {
    std::uint32_t deltas = 2;

    static AcceptWindow standard() { return {2}; }
    static AcceptWindow historical() { return {4}; }

    bool contains(std::uint64_t delta) const { return delta < deltas; }

    void validate(const CookieLayout& layout) const;

    friend bool operator==(const AcceptWindow&, const AcceptWindow&) = default;
};

}  // namespace syncookie

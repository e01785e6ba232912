#pragma once

// SYN cookie minting and validation. The server side of the secret: nothing
// in the adversary may include this header.

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string_view>

#include "syncookie/cookie_layout.hpp"
#include "syncookie/wire.hpp"

namespace syncookie {

// 128-bit server secret. Deliberately has no formatter.
struct SecretKey {
    std::array<std::uint8_t, 16> bytes{};

    static SecretKey from_words(std::uint64_t lo, std::uint64_t hi);
    // 32 hex digits; throws std::invalid_argument.
    static SecretKey from_hex(std::string_view hex);

    friend bool operator==(const SecretKey&, const SecretKey&) = default;
};

enum class Rejection { StaleTimer, BadMss, BadHash };

const char* to_string(Rejection r);

struct Validation {
    std::optional<Rejection> rejection;  // empty when the cookie is good
    MssIndex mss_index = 0;
    CounterValue minted_at = 0;

    bool valid() const { return !rejection.has_value(); }

    static Validation accept(MssIndex idx, CounterValue t) { return {std::nullopt, idx, t}; }
    static Validation reject(Rejection r) { return {r, 0, 0}; }
};

// Index of the largest table entry <= client_mss, or 0 below the minimum.
MssIndex mss_index_of(std::uint32_t client_mss, const MssTable& table);

// Keyed PRF (SipHash-2-4) over (tuple, t), truncated to layout.hash_bits.
std::uint32_t secret_hash(const SecretKey& key, const FourTuple& tuple, CounterValue t, const CookieLayout& layout);

// Throws std::invalid_argument when mss_index is outside the table.
Isn encode_cookie(const FourTuple& tuple, CounterValue t, MssIndex mss_index, const SecretKey& key,
                  const CookieLayout& layout, const MssTable& table);

Validation validate_cookie(Isn isn, const FourTuple& tuple, CounterValue now, const SecretKey& key,
                           const CookieLayout& layout, const MssTable& table, const AcceptWindow& window);

// Every cookie validate_cookie accepts for this tuple at `now`. Test oracle.
std::set<Isn> valid_cookie_set(const FourTuple& tuple, CounterValue now, const SecretKey& key,
                               const CookieLayout& layout, const MssTable& table, const AcceptWindow& window);

}  // namespace syncookie

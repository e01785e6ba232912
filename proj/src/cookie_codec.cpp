#include "syncookie/cookie_codec.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>
#include <string>

namespace syncookie {

static_assert(crypto_shorthash_siphash24_KEYBYTES == 16);
static_assert(crypto_shorthash_siphash24_BYTES == 8);

SecretKey SecretKey::from_words(std::uint64_t lo, std::uint64_t hi) {
    SecretKey k;
    for (int i = 0; i < 8; ++i) {
        k.bytes[i] = static_cast<std::uint8_t>(lo >> (8 * i));
        k.bytes[8 + i] = static_cast<std::uint8_t>(hi >> (8 * i));
    }
    return k;
}

SecretKey SecretKey::from_hex(std::string_view hex) {
    SecretKey k;
    std::size_t bin_len = 0;
    if (hex.size() != 32 ||
        sodium_hex2bin(k.bytes.data(), k.bytes.size(), hex.data(), hex.size(), nullptr, &bin_len, nullptr) != 0 ||
        bin_len != k.bytes.size()) {
        throw std::invalid_argument("secret key must be 32 hex digits");
    }
    return k;
}

const char* to_string(Rejection r) {
    switch (r) {
        case Rejection::StaleTimer: return "StaleTimer";
        case Rejection::BadMss: return "BadMss";
        case Rejection::BadHash: return "BadHash";
    }
    return "?";
}

MssIndex mss_index_of(std::uint32_t client_mss, const MssTable& table) {
    MssIndex idx = 0;
    for (MssIndex i = 0; i < table.size(); ++i) {
        if (table.values[i] <= client_mss) idx = i;
    }
    return idx;
}

std::uint32_t secret_hash(const SecretKey& key, const FourTuple& tuple, CounterValue t, const CookieLayout& layout) {
    // Fixed little-endian serialization: caddr, saddr, cport, sport, t.
    std::uint8_t msg[20];
    auto put = [&msg](std::size_t at, std::uint64_t v, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) msg[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
    };
    put(0, tuple.client_addr, 4);
    put(4, tuple.server_addr, 4);
    put(8, tuple.client_port, 2);
    put(10, tuple.server_port, 2);
    put(12, t, 8);

    unsigned char out[crypto_shorthash_siphash24_BYTES];
    crypto_shorthash_siphash24(out, msg, sizeof msg, key.bytes.data());
    std::uint64_t h = 0;
    for (int i = 7; i >= 0; --i) h = (h << 8) | out[i];
    return static_cast<std::uint32_t>(h) & layout.hash_mask();
}

Isn encode_cookie(const FourTuple& tuple, CounterValue t, MssIndex mss_index, const SecretKey& key,
                  const CookieLayout& layout, const MssTable& table) {
    if (mss_index >= table.size()) {
        throw std::invalid_argument("MSS index " + std::to_string(mss_index) + " outside table of " +
                                    std::to_string(table.size()));
    }
    const auto timer = static_cast<std::uint32_t>(t & layout.timer_mask());
    return layout.compose(timer, mss_index, secret_hash(key, tuple, t, layout));
}

Validation validate_cookie(Isn isn, const FourTuple& tuple, CounterValue now, const SecretKey& key,
                           const CookieLayout& layout, const MssTable& table, const AcceptWindow& window) {
    // Bits above the cookie width can never come out of encode_cookie.
    if (!layout.in_range(isn)) return Validation::reject(Rejection::BadHash);

    // Largest t' <= now whose low timer bits match the cookie's timer field.
    const std::uint64_t period = std::uint64_t{1} << layout.timer_bits;
    const std::uint64_t delta = (now - layout.timer_field(isn)) & (period - 1);
    if (delta > now || !window.contains(delta)) return Validation::reject(Rejection::StaleTimer);
    const CounterValue minted = now - delta;

    const MssIndex mss = layout.mss_field(isn);
    if (mss >= table.size()) return Validation::reject(Rejection::BadMss);

    if (layout.hash_field(isn) != secret_hash(key, tuple, minted, layout)) {
        return Validation::reject(Rejection::BadHash);
    }
    return Validation::accept(mss, minted);
}

std::set<Isn> valid_cookie_set(const FourTuple& tuple, CounterValue now, const SecretKey& key,
                               const CookieLayout& layout, const MssTable& table, const AcceptWindow& window) {
    std::set<Isn> out;
    for (std::uint64_t d = 0; d < window.deltas && d <= now; ++d) {
        for (MssIndex idx = 0; idx < table.size(); ++idx) {
            out.insert(encode_cookie(tuple, now - d, idx, key, layout, table));
        }
    }
    return out;
}

}  // namespace syncookie

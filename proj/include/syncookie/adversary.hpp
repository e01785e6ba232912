#pragma once

// SYN flood generation and forged-ACK guess streams.
//
// Only public parameters reach this module: layout widths and the MSS table
// size. It does not include cookie_codec.hpp and does not link against it.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "syncookie/cookie_layout.hpp"
#include "syncookie/random.hpp"
#include "syncookie/wire.hpp"

namespace syncookie {

inline constexpr std::uint32_t kDefaultStride = 2654435761u;
inline constexpr SeqNum kForgedSeq = 1000;

std::string default_request_payload();

// Walk the cookie space by a fixed odd step.
struct StrideSearch {
    Isn start = 0;
    std::uint32_t stride = kDefaultStride;
};

// (timer_field, mss_field) pairs, each swept over every hash suffix.
using CookiePrefix = std::pair<std::uint32_t, std::uint32_t>;

struct StructuredSearch {
    CounterValue counter_estimate = 0;
    std::vector<CookiePrefix> prefix_order;
};

struct UniformRandom {
    std::uint64_t seed = 0;
};

using Strategy = std::variant<StrideSearch, StructuredSearch, UniformRandom>;

const char* strategy_name(const Strategy& s);

struct AttackPlan {
    FourTuple spoofed;  // victim as client, server as server
    Strategy strategy;
    std::uint64_t rate = 50'000;  // guesses per simulated second
    std::string payload = default_request_payload();
    CookieLayout layout;
    std::size_t mss_table_size = 4;

    // Throws std::invalid_argument on an even stride, a zero rate, or a
    // prefix outside {estimate, estimate-1} x table.
    void validate() const;
};

// Timer fields estimate, estimate-1 (for each delta < window_deltas), MSS
// indices from the top of the table down.
std::vector<CookiePrefix> default_prefix_order(CounterValue estimate, const CookieLayout& layout,
                                               std::size_t mss_table_size, std::uint32_t window_deltas = 2);

struct GuessState {
    std::uint64_t issued = 0;
    Isn current = 0;               // stride mode
    std::size_t prefix_index = 0;  // structured mode cursor
    std::uint64_t suffix = 0;
    std::optional<RandomStream> rng;  // random mode
};

GuessState start_guessing(const AttackPlan& plan);

// Next forged ACK: ack = guess + 1, seq = kForgedSeq, payload from the plan.
// Empty once a structured sweep is exhausted.
std::optional<Segment> next_guess(const AttackPlan& plan, GuessState& gs);

// Guess value carried by a forged ACK.
inline Isn guess_of(const Segment& forged) { return forged.ack - 1; }

// Send time of guess k (0-based) when pacing uniformly from t0.
SimTime guess_send_time(SimTime t0, std::uint64_t k, std::uint64_t rate);

// Timer estimate recovered from a SYN-ACK the server sent to a probe.
CounterValue estimate_counter_from_synack(const Segment& synack, const CookieLayout& layout);

// Spoofed SYN sources with distinct (addr, port) pairs, never an excluded address.
class FloodSource {
public:
    FloodSource(std::uint64_t seed, Address server_addr, Port server_port, std::vector<Address> excluded);

    std::size_t issued() const { return used_.size(); }
    Segment next();

private:
    RandomStream rng_;
    Address server_addr_;
    Port server_port_;
    std::vector<Address> excluded_;
    std::unordered_set<std::uint64_t> used_;
};

// n SYNs from fresh spoofed sources; n >= 1.
std::vector<Segment> flood_batch(std::size_t n, FloodSource& source);

HostBehavior victim_sink_policy();

// The spoofed victim: receives, never transmits.
class DropAllHost {
public:
    std::vector<Segment> receive(const Segment&) {
        ++received_;
        return {};
    }
    std::uint64_t received() const { return received_; }
    std::uint64_t transmitted() const { return 0; }

private:
    std::uint64_t received_ = 0;
};

}  // namespace syncookie

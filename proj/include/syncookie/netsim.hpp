#pragma once

// Deterministic discrete-event simulation of the attack: a listener, the
// attacker, the spoofed victim sink and an optional legitimate client behind
// one gateway with fixed latency and seeded loss.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "syncookie/adversary.hpp"
#include "syncookie/cookie_codec.hpp"
#include "syncookie/errors.hpp"
#include "syncookie/random.hpp"
#include "syncookie/tcp_endpoint.hpp"
#include "syncookie/wire.hpp"

namespace syncookie {

enum class StrategyKind { Stride, Structured, Random };

const char* to_string(StrategyKind k);
StrategyKind parse_strategy(const std::string& name);  // throws ConfigError

struct ScenarioConfig {
    EndpointConfig endpoint{.addr = 0x0A000001u};  // 10.0.0.1:80
    std::optional<SecretKey> key;                  // derived from seed when absent

    StrategyKind strategy = StrategyKind::Stride;
    std::uint32_t stride = kDefaultStride;
    std::optional<Isn> stride_start;               // seeded when absent
    std::optional<CounterValue> counter_estimate;  // probe the server when absent
    std::uint64_t rate = 50'000;
    std::string payload = default_request_payload();
    std::optional<std::size_t> flood_count;  // backlog_max + 1 when absent
    std::uint64_t flood_rate = 1'000;        // sustained SYN/s after the burst; 0 stops after it
    Address attacker_addr = 0x0A000042u;     // 10.0.0.66
    Address spoof_addr = 0x0A000007u;        // 10.0.0.7
    Port spoof_port = 40'000;
    bool stop_on_forgery = true;
    std::optional<std::uint64_t> guess_budget;
    std::optional<SimTime> time_budget = 60 * kMicrosPerSecond;

    SimTime latency = 200;
    double loss_rate = 0.0;
    bool freeze_timer = false;
    SimTime start_time = 3600 * kMicrosPerSecond;
    std::optional<Address> legit_addr;
    Port legit_port = 50'000;
    SimTime legit_start = 0;  // offset from start_time

    std::uint64_t seed = 1;
    bool record_trace = true;

    // Throws ConfigError.
    void validate() const;

    std::size_t effective_flood_count() const { return flood_count.value_or(endpoint.backlog_max + 1); }
    SecretKey effective_key() const;
};

// Microsecond clock whose cookie counter can be pinned.
struct SimClock {
    SimTime now = 0;
    std::optional<CounterValue> frozen_at;

    CounterValue counter() const { return frozen_at ? *frozen_at : now / (kCounterPeriodSeconds * kMicrosPerSecond); }
    void freeze() { frozen_at = counter(); }
    void advance_to(SimTime t) {
        if (t > now) now = t;
    }
};

enum class TraceKind { Send, Deliver, Drop, ModeChange, Established, LogPlanted, Blocked, Expired };

const char* to_string(TraceKind k);

struct TraceEvent {
    SimTime time = 0;
    std::uint64_t seq = 0;
    TraceKind kind = TraceKind::Send;
    std::string detail;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

// "<time_us> <seq> <Kind> <detail>\n"
std::string format_trace_line(const TraceEvent& e);
std::string export_trace(const std::vector<TraceEvent>& trace);

using TraceSink = std::function<void(const TraceEvent&)>;

struct Topology {
    std::map<Address, HostBehavior> hosts;
    SimTime latency = 200;
    double loss_rate = 0.0;
    std::uint64_t seed = 1;
};

enum class DropReason { Loss, UnknownHost, Halted };

const char* to_string(DropReason r);

struct DeliveryDecision {
    bool delivered = false;
    SimTime at = 0;  // arrival time when delivered
    DropReason reason = DropReason::Loss;
};

// Gateway routing for one segment. Draws from loss_stream only for known
// destinations.
DeliveryDecision deliver(const Topology& topo, RandomStream& loss_stream, const Segment& seg, SimTime now);

struct Forgery {
    SimTime time = 0;
    Isn isn = 0;
    std::uint64_t guess_index = 0;  // 1-based ordinal of the winning guess

    friend bool operator==(const Forgery&, const Forgery&) = default;
};

struct SimReport {
    std::uint64_t guesses_sent = 0;
    std::uint64_t packets_total = 0;
    std::vector<Forgery> forgeries;
    std::optional<SimTime> first_forgery_time;
    std::optional<std::uint64_t> first_forgery_guess;
    std::string log_snapshot;

    std::string stop_reason;
    SimTime start_time = 0;
    SimTime end_time = 0;
    std::string strategy;
    std::uint64_t probes_sent = 0;
    std::uint64_t sweep_restarts = 0;
    std::uint64_t victim_transmits = 0;
    std::uint64_t victim_received = 0;
    std::uint64_t half_open_at_end = 0;
    EndpointCounters server;

    friend bool operator==(const SimReport& a, const SimReport& b) { return a.to_json() == b.to_json(); }

    std::string to_json() const;
};

struct SimResult {
    SimReport report;
    std::vector<TraceEvent> trace;  // empty unless record_trace
};

// Flood phase, then guessing until the first forgery (if stop_on_forgery),
// the guess budget or the time budget. Deterministic in (config, seed).
SimResult run(const ScenarioConfig& config, const TraceSink& sink = nullptr);

}  // namespace syncookie

#pragma once

// Server-side listener: bounded half-open backlog with SYN-ACK retransmission
// in normal mode, stateless SYN cookies once the backlog is full, bare-ACK
// establishment, an access log, and an optional per-address rate gate.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "syncookie/cookie_codec.hpp"
#include "syncookie/cookie_layout.hpp"
#include "syncookie/random.hpp"
#include "syncookie/wire.hpp"

namespace syncookie {

struct DefenseConfig {
    SimTime min_gap = 100;  // µs; closer arrivals from one address are blocked
    SimTime block_duration = 10 * kMicrosPerSecond;
};

enum class InvalidAckPolicy { Drop, Reset };

struct EndpointConfig {
    Address addr = 0;
    Port port = 80;
    std::size_t backlog_max = 128;  // tcp_max_syn_backlog
    unsigned retransmit_limit = 5;
    SimTime retransmit_interval = kMicrosPerSecond;  // first gap, doubles each time
    CookieLayout layout;
    MssTable table;
    AcceptWindow window;
    SecretKey key;
    std::optional<DefenseConfig> defense;
    InvalidAckPolicy invalid_ack = InvalidAckPolicy::Drop;
    bool sticky_cookie_mode = false;
    std::uint64_t isn_seed = 0;

    // Throws std::invalid_argument.
    void validate() const;
};

enum class Mode { Normal, Cookie };

struct HalfOpenEntry {
    FourTuple tuple;
    Isn server_isn = 0;
    SeqNum client_seq = 0;
    unsigned retransmits_sent = 0;
    SimTime next_retransmit_at = 0;
    SimTime interval = 0;
    std::uint16_t mss = 0;
};

struct Connection {
    FourTuple tuple;
    Isn server_isn = 0;
    SimTime established_at = 0;
    bool via_cookie = false;
    bool open = true;  // false once the request has been answered
    std::string rx_buffer;
};

struct AccessLogEntry {
    Address source_addr = 0;
    Port source_port = 0;
    SimTime at = 0;
    std::string request_line;
    int status = 200;
};

enum class EndpointEventKind {
    CookieModeEngaged,
    CookieModeDisengaged,
    Established,
    LogPlanted,
    HalfOpenExpired,
    Blocked,
    Malformed,
};

const char* to_string(EndpointEventKind k);

struct EndpointEvent {
    EndpointEventKind kind;
    SimTime at = 0;
    FourTuple tuple;
    Isn isn = 0;  // cookie or server ISN for Established
    std::string detail;
};

struct EndpointOutput {
    std::vector<Segment> outbound;
    std::vector<EndpointEvent> events;
};

struct EndpointCounters {
    std::uint64_t segments_in = 0;
    std::uint64_t syn_received = 0;
    std::uint64_t synacks_sent = 0;
    std::uint64_t synack_retransmits = 0;
    std::uint64_t cookies_issued = 0;
    std::uint64_t cookies_accepted = 0;
    std::uint64_t cookies_stale = 0;
    std::uint64_t cookies_bad_mss = 0;
    std::uint64_t cookies_bad_hash = 0;
    std::uint64_t resets_sent = 0;
    std::uint64_t malformed = 0;
    std::uint64_t blocked = 0;
    std::uint64_t established = 0;
    std::uint64_t half_open_expired = 0;
    std::uint64_t stray = 0;
};

// Rate gate bookkeeping, keyed by source address.
struct DefenseGate {
    std::unordered_map<Address, SimTime> last_arrival;
    std::unordered_map<Address, SimTime> blocked_until;
};

enum class GateVerdict { Allow, Block };

// Records the arrival and decides. A gap violation (re)starts the block window.
GateVerdict defense_check(DefenseGate& gate, Address src, SimTime now, const DefenseConfig& cfg);

// `<addr> - - [<time>] "<request_line>" <status> -\n` per entry.
std::string render_access_log(const std::vector<AccessLogEntry>& log);

class Listener {
public:
    explicit Listener(EndpointConfig cfg);

    EndpointOutput on_segment(const Segment& seg, SimTime now);
    EndpointOutput tick(SimTime now);

    // Earliest pending retransmit or expiry, if any.
    std::optional<SimTime> next_deadline() const;

    Mode mode() const;
    CounterValue counter_at(SimTime now) const;
    void set_frozen_counter(std::optional<CounterValue> counter) { frozen_counter_ = counter; }

    const EndpointConfig& config() const { return cfg_; }
    const std::vector<HalfOpenEntry>& backlog() const { return backlog_; }
    const std::unordered_map<FourTuple, Connection, FourTupleHash>& connections() const { return connections_; }
    const std::vector<AccessLogEntry>& access_log() const { return access_log_; }
    const EndpointCounters& counters() const { return counters_; }
    const DefenseGate& defense_gate() const { return gate_; }

    std::string render_access_log() const { return syncookie::render_access_log(access_log_); }

private:
    void handle_syn(const Segment& seg, SimTime now, EndpointOutput& out);
    void handle_ack(const Segment& seg, SimTime now, EndpointOutput& out);
    void handle_rst(const Segment& seg, SimTime now, EndpointOutput& out);

    void establish(const Segment& seg, Isn server_isn, bool via_cookie, SimTime now, EndpointOutput& out);
    void deliver(Connection& conn, const Segment& seg, SimTime now, EndpointOutput& out);
    void remove_half_open(std::size_t index, SimTime now, EndpointOutput& out);
    void invalid_ack(const Segment& seg, EndpointOutput& out);

    Segment synack(const FourTuple& t, Isn isn, SeqNum client_seq, std::uint16_t mss) const;
    Segment reset_for(const Segment& seg);
    HalfOpenEntry* find_half_open(const FourTuple& t);

    EndpointConfig cfg_;
    RandomStream isn_rng_;
    std::optional<CounterValue> frozen_counter_;
    bool cookie_engaged_ = false;

    std::vector<HalfOpenEntry> backlog_;
    std::unordered_map<FourTuple, Connection, FourTupleHash> connections_;
    std::vector<AccessLogEntry> access_log_;
    DefenseGate gate_;
    EndpointCounters counters_;
};

}  // namespace syncookie

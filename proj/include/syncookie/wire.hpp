#pragma once

// Segment-level vocabulary shared by every module: addresses, the connection
// four-tuple, simulated time and the simulated TCP segment itself.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace syncookie {

using Address = std::uint32_t;  // IPv4, host byte order
using Port = std::uint16_t;
using SeqNum = std::uint32_t;

// Simulated time in microseconds.
using SimTime = std::uint64_t;

inline constexpr SimTime kMicrosPerSecond = 1'000'000;
inline constexpr SimTime kMicrosPerMilli = 1'000;

// Dotted-quad conversion. parse_address throws std::invalid_argument.
Address parse_address(std::string_view text);
std::string format_address(Address addr);

// Seconds with six fractional digits, e.g. "3601.000200".
std::string format_sim_time(SimTime t);

struct FourTuple {
    Address client_addr = 0;
    Port client_port = 0;
    Address server_addr = 0;
    Port server_port = 0;

    friend bool operator==(const FourTuple&, const FourTuple&) = default;
};

struct FourTupleHash {
    std::size_t operator()(const FourTuple& t) const noexcept;
};

enum TcpFlag : std::uint8_t {
    kSyn = 0x01,
    kAck = 0x02,
    kRst = 0x04,
    kFin = 0x08,
};

std::string format_flags(std::uint8_t flags);

struct Segment {
    Address src_addr = 0;
    Port src_port = 0;
    Address dst_addr = 0;
    Port dst_port = 0;
    std::uint8_t flags = 0;
    SeqNum seq = 0;
    SeqNum ack = 0;
    std::string payload;
    std::optional<std::uint16_t> mss_option;

    bool has(TcpFlag f) const { return (flags & f) != 0; }

    // SYN and RST never both set; MSS option only rides a SYN.
    bool well_formed() const;

    // Identity of the connection as seen by the listener receiving this segment.
    FourTuple inbound_tuple() const { return {src_addr, src_port, dst_addr, dst_port}; }

    friend bool operator==(const Segment&, const Segment&) = default;
};

// One-line summary used by traces; never includes payload bytes.
std::string describe(const Segment& seg);

}  // namespace syncookie

namespace syncookie {

// What a simulated host does with segments addressed to it.
enum class HostBehavior {
    Listener,     // the TCP server
    Attacker,     // the attacker's real address; reads probe replies
    DropAll,      // spoofed victim: swallow everything, emit nothing
    LegitClient,  // ordinary client performing one full handshake + GET
};

const char* to_string(HostBehavior b);

}  // namespace syncookie

#include "syncookie/wire.hpp"

#include <arpa/inet.h>

#include <cstdio>
#include <stdexcept>

namespace syncookie {

Address parse_address(std::string_view text) {
    std::string buf(text);
    in_addr out{};
    if (inet_pton(AF_INET, buf.c_str(), &out) != 1) {
        throw std::invalid_argument("not an IPv4 address: '" + buf + "'");
    }
    return ntohl(out.s_addr);
}

std::string format_address(Address addr) {
    in_addr in{};
    in.s_addr = htonl(addr);
    char buf[INET_ADDRSTRLEN];
    inet_ntop(AF_INET, &in, buf, sizeof buf);
    return buf;
}

std::string format_sim_time(SimTime t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%06llu",
                  static_cast<unsigned long long>(t / kMicrosPerSecond),
                  static_cast<unsigned long long>(t % kMicrosPerSecond));
    return buf;
}

std::size_t FourTupleHash::operator()(const FourTuple& t) const noexcept {
    std::uint64_t a = (std::uint64_t{t.client_addr} << 32) | t.server_addr;
    std::uint64_t b = (std::uint64_t{t.client_port} << 16) | t.server_port;
    a ^= b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2);
    return std::hash<std::uint64_t>{}(a);
}

std::string format_flags(std::uint8_t flags) {
    std::string out;
    auto add = [&](TcpFlag f, const char* name) {
        if (flags & f) {
            if (!out.empty()) out += '|';
            out += name;
        }
    };
    add(kSyn, "SYN");
    add(kAck, "ACK");
    add(kRst, "RST");
    add(kFin, "FIN");
    return out.empty() ? "-" : out;
}

bool Segment::well_formed() const {
    if (has(kSyn) && has(kRst)) return false;
    if (mss_option && !has(kSyn)) return false;
    return true;
}

std::string describe(const Segment& seg) {
    std::string out = "src=" + format_address(seg.src_addr) + ":" + std::to_string(seg.src_port) +
                      " dst=" + format_address(seg.dst_addr) + ":" + std::to_string(seg.dst_port) +
                      " flags=" + format_flags(seg.flags) + " seq=" + std::to_string(seg.seq) +
                      " ack=" + std::to_string(seg.ack) + " len=" + std::to_string(seg.payload.size());
    if (seg.mss_option) out += " mss=" + std::to_string(*seg.mss_option);
    return out;
}

}  // namespace syncookie

namespace syncookie {

const char* to_string(HostBehavior b) {
    switch (b) {
        case HostBehavior::Listener: return "listener";
        case HostBehavior::Attacker: return "attacker";
        case HostBehavior::DropAll: return "drop-all";
        case HostBehavior::LegitClient: return "legit-client";
    }
    return "?";
}

}  // namespace syncookie

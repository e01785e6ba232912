#include "syncookie/tcp_endpoint.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <stdexcept>

namespace syncookie {

namespace {

constexpr std::uint16_t kDefaultClientMss = 536;

// A request line is a CRLF-terminated line that opens with an upper-case
// method token followed by a space.
std::optional<std::string> take_request_line(std::string& buffer) {
    const auto eol = buffer.find("\r\n");
    if (eol == std::string::npos) return std::nullopt;
    std::string line = buffer.substr(0, eol);
    buffer.clear();
    std::size_t i = 0;
    while (i < line.size() && std::isupper(static_cast<unsigned char>(line[i]))) ++i;
    if (i == 0 || i >= line.size() || line[i] != ' ') return std::nullopt;
    return line;
}

int status_for(const std::string& request_line) {
    const auto method = request_line.substr(0, request_line.find(' '));
    return (method == "GET" || method == "HEAD") ? 200 : 501;
}

std::string escape_log_field(const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += static_cast<char>(c);
        } else if (c < 0x20 || c >= 0x7f) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\x%02x", c);
            out += buf;
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

}  // namespace

const char* to_string(EndpointEventKind k) {
    switch (k) {
        case EndpointEventKind::CookieModeEngaged: return "CookieModeEngaged";
        case EndpointEventKind::CookieModeDisengaged: return "CookieModeDisengaged";
        case EndpointEventKind::Established: return "Established";
        case EndpointEventKind::LogPlanted: return "LogPlanted";
        case EndpointEventKind::HalfOpenExpired: return "HalfOpenExpired";
        case EndpointEventKind::Blocked: return "Blocked";
        case EndpointEventKind::Malformed: return "Malformed";
    }
    return "?";
}

void EndpointConfig::validate() const {
    if (backlog_max < 1) throw std::invalid_argument("backlog_max must be >= 1");
    if (retransmit_interval == 0) throw std::invalid_argument("retransmit_interval must be positive");
    layout.validate();
    table.validate(layout);
    window.validate(layout);
}

GateVerdict defense_check(DefenseGate& gate, Address src, SimTime now, const DefenseConfig& cfg) {
    bool block = false;
    if (auto it = gate.blocked_until.find(src); it != gate.blocked_until.end() && now < it->second) block = true;
    if (auto it = gate.last_arrival.find(src); it != gate.last_arrival.end() && now - it->second < cfg.min_gap) {
        block = true;
        gate.blocked_until[src] = now + cfg.block_duration;
    }
    gate.last_arrival[src] = now;
    return block ? GateVerdict::Block : GateVerdict::Allow;
}

std::string render_access_log(const std::vector<AccessLogEntry>& log) {
    std::string out;
    for (const auto& e : log) {
        out += format_address(e.source_addr);
        out += " - - [";
        out += format_sim_time(e.at);
        out += "] \"";
        out += escape_log_field(e.request_line);
        out += "\" ";
        out += std::to_string(e.status);
        out += " -\n";
    }
    return out;
}

Listener::Listener(EndpointConfig cfg) : cfg_(std::move(cfg)), isn_rng_(cfg_.isn_seed) { cfg_.validate(); }

Mode Listener::mode() const {
    if (backlog_.size() >= cfg_.backlog_max) return Mode::Cookie;
    if (cfg_.sticky_cookie_mode && cookie_engaged_) return Mode::Cookie;
    return Mode::Normal;
}

CounterValue Listener::counter_at(SimTime now) const {
    if (frozen_counter_) return *frozen_counter_;
    return now / (kCounterPeriodSeconds * kMicrosPerSecond);
}

std::optional<SimTime> Listener::next_deadline() const {
    std::optional<SimTime> best;
    for (const auto& e : backlog_) {
        if (!best || e.next_retransmit_at < *best) best = e.next_retransmit_at;
    }
    return best;
}

EndpointOutput Listener::on_segment(const Segment& seg, SimTime now) {
    EndpointOutput out;
    ++counters_.segments_in;

    if (cfg_.defense && defense_check(gate_, seg.src_addr, now, *cfg_.defense) == GateVerdict::Block) {
        ++counters_.blocked;
        out.events.push_back({EndpointEventKind::Blocked, now, seg.inbound_tuple(), 0, format_flags(seg.flags)});
        return out;
    }

    const bool misrouted = seg.dst_addr != cfg_.addr || seg.dst_port != cfg_.port;
    const bool syn_ack = seg.has(kSyn) && seg.has(kAck);
    if (misrouted || !seg.well_formed() || syn_ack || seg.flags == 0) {
        ++counters_.malformed;
        out.events.push_back({EndpointEventKind::Malformed, now, seg.inbound_tuple(), 0, format_flags(seg.flags)});
        return out;
    }

    if (seg.has(kRst)) {
        handle_rst(seg, now, out);
    } else if (seg.has(kSyn)) {
        handle_syn(seg, now, out);
    } else if (seg.has(kAck)) {
        handle_ack(seg, now, out);
    } else {
        ++counters_.stray;  // FIN without ACK
    }
    return out;
}

Segment Listener::synack(const FourTuple& t, Isn isn, SeqNum client_seq, std::uint16_t mss) const {
    Segment s;
    s.src_addr = t.server_addr;
    s.src_port = t.server_port;
    s.dst_addr = t.client_addr;
    s.dst_port = t.client_port;
    s.flags = kSyn | kAck;
    s.seq = isn;
    s.ack = client_seq + 1;
    s.mss_option = mss;
    return s;
}

Segment Listener::reset_for(const Segment& seg) {
    ++counters_.resets_sent;
    Segment r;
    r.src_addr = seg.dst_addr;
    r.src_port = seg.dst_port;
    r.dst_addr = seg.src_addr;
    r.dst_port = seg.src_port;
    r.flags = kRst;
    r.seq = seg.ack;
    return r;
}

HalfOpenEntry* Listener::find_half_open(const FourTuple& t) {
    auto it = std::find_if(backlog_.begin(), backlog_.end(), [&](const HalfOpenEntry& e) { return e.tuple == t; });
    return it == backlog_.end() ? nullptr : &*it;
}

void Listener::handle_syn(const Segment& seg, SimTime now, EndpointOutput& out) {
    ++counters_.syn_received;
    const FourTuple tuple = seg.inbound_tuple();

    if (auto c = connections_.find(tuple); c != connections_.end() && c->second.open) {
        ++counters_.stray;
        return;
    }
    if (HalfOpenEntry* e = find_half_open(tuple)) {
        // Duplicate SYN: answer with the SYN-ACK already on record.
        out.outbound.push_back(synack(tuple, e->server_isn, seg.seq, e->mss));
        ++counters_.synacks_sent;
        return;
    }

    const MssIndex idx = mss_index_of(seg.mss_option.value_or(kDefaultClientMss), cfg_.table);
    const std::uint16_t mss = cfg_.table.values[idx];

    if (mode() == Mode::Normal) {
        HalfOpenEntry e;
        e.tuple = tuple;
        e.server_isn = isn_rng_.next_u32();
        e.client_seq = seg.seq;
        e.interval = cfg_.retransmit_interval;
        e.next_retransmit_at = now + e.interval;
        e.mss = mss;
        backlog_.push_back(e);
        out.outbound.push_back(synack(tuple, e.server_isn, seg.seq, mss));
        ++counters_.synacks_sent;
        return;
    }

    if (!cookie_engaged_) {
        cookie_engaged_ = true;
        out.events.push_back({EndpointEventKind::CookieModeEngaged, now, tuple, 0,
                              "backlog=" + std::to_string(backlog_.size())});
    }
    const Isn cookie = encode_cookie(tuple, counter_at(now), idx, cfg_.key, cfg_.layout, cfg_.table);
    out.outbound.push_back(synack(tuple, cookie, seg.seq, mss));
    ++counters_.synacks_sent;
    ++counters_.cookies_issued;
}

void Listener::handle_ack(const Segment& seg, SimTime now, EndpointOutput& out) {
    const FourTuple tuple = seg.inbound_tuple();

    if (auto c = connections_.find(tuple); c != connections_.end() && c->second.open) {
        if (seg.ack == c->second.server_isn + 1) {
            deliver(c->second, seg, now, out);
        } else {
            ++counters_.stray;
        }
        return;
    }

    for (std::size_t i = 0; i < backlog_.size(); ++i) {
        if (!(backlog_[i].tuple == tuple)) continue;
        if (seg.ack != backlog_[i].server_isn + 1) {
            invalid_ack(seg, out);
            return;
        }
        const Isn isn = backlog_[i].server_isn;
        remove_half_open(i, now, out);
        establish(seg, isn, false, now, out);
        return;
    }

    if (mode() == Mode::Normal) {
        // Nothing on record and no cookies outstanding.
        out.outbound.push_back(reset_for(seg));
        return;
    }

    const Isn guess = seg.ack - 1;
    const Validation v =
        validate_cookie(guess, tuple, counter_at(now), cfg_.key, cfg_.layout, cfg_.table, cfg_.window);
    if (!v.valid()) {
        switch (*v.rejection) {
            case Rejection::StaleTimer: ++counters_.cookies_stale; break;
            case Rejection::BadMss: ++counters_.cookies_bad_mss; break;
            case Rejection::BadHash: ++counters_.cookies_bad_hash; break;
        }
        invalid_ack(seg, out);
        return;
    }
    ++counters_.cookies_accepted;
    establish(seg, guess, true, now, out);
}

void Listener::handle_rst(const Segment& seg, SimTime now, EndpointOutput& out) {
    const FourTuple tuple = seg.inbound_tuple();
    for (std::size_t i = 0; i < backlog_.size(); ++i) {
        if (backlog_[i].tuple == tuple) {
            remove_half_open(i, now, out);
            return;
        }
    }
    if (auto c = connections_.find(tuple); c != connections_.end()) {
        c->second.open = false;
        return;
    }
    ++counters_.stray;
}

void Listener::invalid_ack(const Segment& seg, EndpointOutput& out) {
    if (cfg_.invalid_ack == InvalidAckPolicy::Reset) out.outbound.push_back(reset_for(seg));
}

void Listener::establish(const Segment& seg, Isn server_isn, bool via_cookie, SimTime now, EndpointOutput& out) {
    Connection conn;
    conn.tuple = seg.inbound_tuple();
    conn.server_isn = server_isn;
    conn.established_at = now;
    conn.via_cookie = via_cookie;
    ++counters_.established;
    out.events.push_back({EndpointEventKind::Established, now, conn.tuple, server_isn, via_cookie ? "cookie" : "backlog"});

    auto& stored = connections_.insert_or_assign(conn.tuple, std::move(conn)).first->second;
    if (!seg.payload.empty()) deliver(stored, seg, now, out);
}

void Listener::deliver(Connection& conn, const Segment& seg, SimTime now, EndpointOutput& out) {
    if (seg.payload.empty()) return;
    conn.rx_buffer += seg.payload;
    auto line = take_request_line(conn.rx_buffer);
    if (!line) return;

    AccessLogEntry entry{conn.tuple.client_addr, conn.tuple.client_port, now, *line, status_for(*line)};
    out.events.push_back({EndpointEventKind::LogPlanted, now, conn.tuple, conn.server_isn, *line});

    // Answer and close; one request per connection.
    Segment resp;
    resp.src_addr = conn.tuple.server_addr;
    resp.src_port = conn.tuple.server_port;
    resp.dst_addr = conn.tuple.client_addr;
    resp.dst_port = conn.tuple.client_port;
    resp.flags = kAck | kFin;
    resp.seq = conn.server_isn + 1;
    resp.ack = seg.seq + static_cast<SeqNum>(seg.payload.size());
    resp.payload = entry.status == 200 ? "HTTP/1.1 200 OK\r\nContent-Length: 0\r\n\r\n"
                                       : "HTTP/1.1 501 Not Implemented\r\nContent-Length: 0\r\n\r\n";
    out.outbound.push_back(std::move(resp));
    conn.open = false;
    access_log_.push_back(std::move(entry));
}

void Listener::remove_half_open(std::size_t index, SimTime now, EndpointOutput& out) {
    const bool was_full = backlog_.size() >= cfg_.backlog_max;
    const FourTuple tuple = backlog_[index].tuple;
    backlog_.erase(backlog_.begin() + static_cast<std::ptrdiff_t>(index));
    if (was_full && cookie_engaged_ && !cfg_.sticky_cookie_mode) {
        cookie_engaged_ = false;
        out.events.push_back({EndpointEventKind::CookieModeDisengaged, now, tuple, 0,
                              "backlog=" + std::to_string(backlog_.size())});
    }
}

EndpointOutput Listener::tick(SimTime now) {
    EndpointOutput out;
    for (std::size_t i = 0; i < backlog_.size();) {
        HalfOpenEntry& e = backlog_[i];
        if (e.next_retransmit_at > now) {
            ++i;
            continue;
        }
        if (e.retransmits_sent < cfg_.retransmit_limit) {
            out.outbound.push_back(synack(e.tuple, e.server_isn, e.client_seq, e.mss));
            ++e.retransmits_sent;
            ++counters_.synacks_sent;
            ++counters_.synack_retransmits;
            e.interval *= 2;
            e.next_retransmit_at += e.interval;
            continue;  // re-examine in case `now` is past the new deadline too
        }
        Segment rst;
        rst.src_addr = e.tuple.server_addr;
        rst.src_port = e.tuple.server_port;
        rst.dst_addr = e.tuple.client_addr;
        rst.dst_port = e.tuple.client_port;
        rst.flags = kRst;
        rst.seq = e.server_isn + 1;
        out.outbound.push_back(rst);
        ++counters_.resets_sent;
        ++counters_.half_open_expired;
        out.events.push_back({EndpointEventKind::HalfOpenExpired, now, e.tuple, e.server_isn,
                              "retransmits=" + std::to_string(e.retransmits_sent)});
        remove_half_open(i, now, out);
    }
    return out;
}

}  // namespace syncookie

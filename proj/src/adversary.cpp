#include "syncookie/adversary.hpp"

#include <algorithm>
#include <stdexcept>

namespace syncookie {

std::string default_request_payload() { return "GET /secret.pdf HTTP/1.1\r\nHost: server\r\n\r\n"; }

const char* strategy_name(const Strategy& s) {
    struct {
        const char* operator()(const StrideSearch&) const { return "stride"; }
        const char* operator()(const StructuredSearch&) const { return "structured"; }
        const char* operator()(const UniformRandom&) const { return "random"; }
    } visitor;
    return std::visit(visitor, s);
}

std::vector<CookiePrefix> default_prefix_order(CounterValue estimate, const CookieLayout& layout,
                                               std::size_t mss_table_size, std::uint32_t window_deltas) {
    std::vector<CookiePrefix> order;
    for (std::uint32_t d = 0; d < window_deltas; ++d) {
        const auto timer = static_cast<std::uint32_t>((estimate - d) & layout.timer_mask());
        for (std::size_t m = mss_table_size; m-- > 0;) order.emplace_back(timer, static_cast<std::uint32_t>(m));
    }
    return order;
}

void AttackPlan::validate() const {
    layout.validate();
    if (rate == 0) throw std::invalid_argument("guess rate must be positive");
    if (mss_table_size == 0 || mss_table_size > (std::size_t{1} << layout.mss_bits)) {
        throw std::invalid_argument("MSS table size does not fit the layout");
    }
    if (const auto* s = std::get_if<StrideSearch>(&strategy); s && s->stride % 2 == 0) {
        throw std::invalid_argument("stride must be odd");
    }
    if (const auto* s = std::get_if<StructuredSearch>(&strategy)) {
        if (s->prefix_order.empty()) throw std::invalid_argument("structured search needs at least one prefix");
        const auto now = static_cast<std::uint32_t>(s->counter_estimate & layout.timer_mask());
        const auto prev = static_cast<std::uint32_t>((s->counter_estimate - 1) & layout.timer_mask());
        for (const auto& [timer, mss] : s->prefix_order) {
            if (mss >= mss_table_size) throw std::invalid_argument("prefix MSS field outside the table");
            if (timer != now && timer != prev) throw std::invalid_argument("prefix timer field outside the window");
        }
    }
}

GuessState start_guessing(const AttackPlan& plan) {
    GuessState gs;
    if (const auto* s = std::get_if<StrideSearch>(&plan.strategy)) {
        gs.current = static_cast<Isn>(s->start & (plan.layout.space() - 1));
    } else if (const auto* r = std::get_if<UniformRandom>(&plan.strategy)) {
        gs.rng.emplace(RandomStream::for_purpose(r->seed, "guess"));
    }
    return gs;
}

std::optional<Segment> next_guess(const AttackPlan& plan, GuessState& gs) {
    const std::uint64_t space_mask = plan.layout.space() - 1;
    Isn guess = 0;

    if (const auto* s = std::get_if<StrideSearch>(&plan.strategy)) {
        guess = gs.current;
        gs.current = static_cast<Isn>((std::uint64_t{gs.current} + s->stride) & space_mask);
    } else if (const auto* st = std::get_if<StructuredSearch>(&plan.strategy)) {
        if (gs.prefix_index >= st->prefix_order.size()) return std::nullopt;
        const auto [timer, mss] = st->prefix_order[gs.prefix_index];
        guess = plan.layout.compose(timer, mss, static_cast<std::uint32_t>(gs.suffix));
        if (++gs.suffix > plan.layout.hash_mask()) {
            gs.suffix = 0;
            ++gs.prefix_index;
        }
    } else {
        guess = static_cast<Isn>(gs.rng->below(plan.layout.space()));
    }
    ++gs.issued;

    Segment seg;
    seg.src_addr = plan.spoofed.client_addr;
    seg.src_port = plan.spoofed.client_port;
    seg.dst_addr = plan.spoofed.server_addr;
    seg.dst_port = plan.spoofed.server_port;
    seg.flags = kAck;
    seg.seq = kForgedSeq;
    seg.ack = guess + 1;
    seg.payload = plan.payload;
    return seg;
}

SimTime guess_send_time(SimTime t0, std::uint64_t k, std::uint64_t rate) {
    const auto offset = static_cast<unsigned __int128>(k) * kMicrosPerSecond / rate;
    return t0 + static_cast<SimTime>(offset);
}

CounterValue estimate_counter_from_synack(const Segment& synack, const CookieLayout& layout) {
    return layout.timer_field(synack.seq);
}

FloodSource::FloodSource(std::uint64_t seed, Address server_addr, Port server_port, std::vector<Address> excluded)
    : rng_(RandomStream::for_purpose(seed, "flood")),
      server_addr_(server_addr),
      server_port_(server_port),
      excluded_(std::move(excluded)) {}

Segment FloodSource::next() {
    // 172.16.0.0/12, ephemeral ports.
    constexpr Address kBase = 0xAC100000u;
    for (;;) {
        const auto addr = static_cast<Address>(kBase + rng_.below(Address{1} << 20));
        const auto port = static_cast<Port>(1024 + rng_.below(65536 - 1024));
        if (std::find(excluded_.begin(), excluded_.end(), addr) != excluded_.end()) continue;
        if (!used_.insert((std::uint64_t{addr} << 16) | port).second) continue;

        Segment s;
        s.src_addr = addr;
        s.src_port = port;
        s.dst_addr = server_addr_;
        s.dst_port = server_port_;
        s.flags = kSyn;
        s.seq = rng_.next_u32();
        s.mss_option = 1460;
        return s;
    }
}

std::vector<Segment> flood_batch(std::size_t n, FloodSource& source) {
    if (n < 1) throw std::invalid_argument("flood batch size must be >= 1");
    std::vector<Segment> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(source.next());
    return out;
}

HostBehavior victim_sink_policy() { return HostBehavior::DropAll; }

}  // namespace syncookie

#include "syncookie/netsim.hpp"

#include <json.hpp>

#include <queue>
#include <variant>

namespace syncookie {

const char* to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::Stride: return "stride";
        case StrategyKind::Structured: return "structured";
        case StrategyKind::Random: return "random";
    }
    return "?";
}

StrategyKind parse_strategy(const std::string& name) {
    if (name == "stride") return StrategyKind::Stride;
    if (name == "structured") return StrategyKind::Structured;
    if (name == "random") return StrategyKind::Random;
    throw ConfigError("strategy", "expected stride|structured|random, got '" + name + "'");
}

const char* to_string(TraceKind k) {
    switch (k) {
        case TraceKind::Send: return "Send";
        case TraceKind::Deliver: return "Deliver";
        case TraceKind::Drop: return "Drop";
        case TraceKind::ModeChange: return "ModeChange";
        case TraceKind::Established: return "Established";
        case TraceKind::LogPlanted: return "LogPlanted";
        case TraceKind::Blocked: return "Blocked";
        case TraceKind::Expired: return "Expired";
    }
    return "?";
}

const char* to_string(DropReason r) {
    switch (r) {
        case DropReason::Loss: return "Loss";
        case DropReason::UnknownHost: return "UnknownHost";
        case DropReason::Halted: return "Halted";
    }
    return "?";
}

void ScenarioConfig::validate() const {
    auto wrap = [](const char* field, auto&& fn) {
        try {
            fn();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(field, e.what());
        }
    };
    wrap("hash-bits", [&] { endpoint.layout.validate(); });
    wrap("mss-table", [&] { endpoint.table.validate(endpoint.layout); });
    wrap("window", [&] { endpoint.window.validate(endpoint.layout); });
    if (endpoint.backlog_max < 1) throw ConfigError("backlog", "must be >= 1");
    if (endpoint.retransmit_interval == 0) throw ConfigError("retransmit-interval-ms", "must be positive");
    if (rate == 0) throw ConfigError("rate", "must be positive");
    if (stride % 2 == 0) throw ConfigError("stride", "must be odd");
    if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) throw ConfigError("loss", "must lie in [0, 1]");
    if (latency == 0) throw ConfigError("latency-us", "must be positive");
    if (flood_count && *flood_count < 1) throw ConfigError("flood", "must be >= 1");
    if (!guess_budget && !time_budget && !stop_on_forgery) {
        throw ConfigError("time-budget-s", "run has no stop condition");
    }
    if (!guess_budget && !time_budget) throw ConfigError("time-budget-s", "a guess or time budget is required");
    if (endpoint.defense && endpoint.defense->min_gap == 0) throw ConfigError("defense", "gap must be positive");

    const Address server = endpoint.addr;
    if (attacker_addr == server) throw ConfigError("attacker-addr", "collides with server-addr");
    if (spoof_addr == server) throw ConfigError("spoof-addr", "collides with server-addr");
    if (spoof_addr == attacker_addr) throw ConfigError("spoof-addr", "collides with attacker-addr");
    if (legit_addr && (*legit_addr == server || *legit_addr == attacker_addr)) {
        throw ConfigError("legit-addr", "collides with server or attacker");
    }
}

SecretKey ScenarioConfig::effective_key() const {
    if (key) return *key;
    auto rng = RandomStream::for_purpose(seed, "key");
    const auto lo = rng.next_u64();
    return SecretKey::from_words(lo, rng.next_u64());
}

std::string format_trace_line(const TraceEvent& e) {
    std::string out = std::to_string(e.time);
    out += ' ';
    out += std::to_string(e.seq);
    out += ' ';
    out += to_string(e.kind);
    if (!e.detail.empty()) {
        out += ' ';
        out += e.detail;
    }
    out += '\n';
    return out;
}

std::string export_trace(const std::vector<TraceEvent>& trace) {
    std::string out;
    for (const auto& e : trace) out += format_trace_line(e);
    return out;
}

DeliveryDecision deliver(const Topology& topo, RandomStream& loss_stream, const Segment& seg, SimTime now) {
    if (!topo.hosts.contains(seg.dst_addr)) return {false, now, DropReason::UnknownHost};
    if (topo.loss_rate > 0.0 && loss_stream.unit() < topo.loss_rate) return {false, now, DropReason::Loss};
    return {true, now + topo.latency, DropReason::Loss};
}

std::string SimReport::to_json() const {
    nlohmann::ordered_json j;
    j["strategy"] = strategy;
    j["stop_reason"] = stop_reason;
    j["start_time_us"] = start_time;
    j["end_time_us"] = end_time;
    j["guesses_sent"] = guesses_sent;
    j["packets_total"] = packets_total;
    j["probes_sent"] = probes_sent;
    j["sweep_restarts"] = sweep_restarts;
    j["first_forgery_time_us"] = first_forgery_time ? nlohmann::ordered_json(*first_forgery_time) : nullptr;
    j["first_forgery_guess"] = first_forgery_guess ? nlohmann::ordered_json(*first_forgery_guess) : nullptr;
    auto& f = j["forgeries"] = nlohmann::ordered_json::array();
    for (const auto& x : forgeries) f.push_back({{"time_us", x.time}, {"isn", x.isn}, {"guess_index", x.guess_index}});
    j["victim_transmits"] = victim_transmits;
    j["victim_received"] = victim_received;
    j["half_open_at_end"] = half_open_at_end;
    j["server"] = {
        {"segments_in", server.segments_in},
        {"syn_received", server.syn_received},
        {"synacks_sent", server.synacks_sent},
        {"synack_retransmits", server.synack_retransmits},
        {"cookies_issued", server.cookies_issued},
        {"cookies_accepted", server.cookies_accepted},
        {"cookies_stale", server.cookies_stale},
        {"cookies_bad_mss", server.cookies_bad_mss},
        {"cookies_bad_hash", server.cookies_bad_hash},
        {"resets_sent", server.resets_sent},
        {"malformed", server.malformed},
        {"blocked", server.blocked},
        {"established", server.established},
        {"half_open_expired", server.half_open_expired},
        {"stray", server.stray},
    };
    j["log_snapshot"] = log_snapshot;
    return j.dump(2) + "\n";
}

namespace {

constexpr Port kProbeBasePort = 33'000;
constexpr SimTime kProbeTimeout = kMicrosPerSecond;

struct Arrive {
    Segment seg;
    std::uint64_t guess_ordinal = 0;  // 0: not a forged guess
};
struct FloodTick {};
struct GuessTick {};
struct ServerTick {};
struct ProbeTick {
    std::uint64_t generation = 0;
};
struct LegitSyn {};
struct Halt {
    std::string reason;
};

using Payload = std::variant<Arrive, FloodTick, GuessTick, ServerTick, ProbeTick, LegitSyn, Halt>;

struct Queued {
    SimTime time;
    std::uint64_t order;
    Payload payload;
};

struct Later {
    bool operator()(const Queued& a, const Queued& b) const {
        return a.time != b.time ? a.time > b.time : a.order > b.order;
    }
};

class Simulation {
public:
    Simulation(const ScenarioConfig& cfg, const TraceSink& sink)
        : cfg_(cfg),
          sink_(sink),
          listener_(make_endpoint(cfg)),
          loss_rng_(RandomStream::for_purpose(cfg.seed, "loss")),
          attack_rng_(RandomStream::for_purpose(cfg.seed, "attack")),
          legit_rng_(RandomStream::for_purpose(cfg.seed, "legit")),
          flood_(cfg.seed, cfg.endpoint.addr, cfg.endpoint.port, excluded(cfg)) {
        clock_.now = cfg.start_time;
        if (cfg.freeze_timer) {
            clock_.freeze();
            listener_.set_frozen_counter(clock_.frozen_at);
        }
        topo_.latency = cfg.latency;
        topo_.loss_rate = cfg.loss_rate;
        topo_.seed = cfg.seed;
        topo_.hosts[cfg.endpoint.addr] = HostBehavior::Listener;
        topo_.hosts[cfg.attacker_addr] = HostBehavior::Attacker;
        topo_.hosts[cfg.spoof_addr] = victim_sink_policy();
        if (cfg.legit_addr) topo_.hosts[*cfg.legit_addr] = HostBehavior::LegitClient;

        plan_.spoofed = {cfg.spoof_addr, cfg.spoof_port, cfg.endpoint.addr, cfg.endpoint.port};
        plan_.rate = cfg.rate;
        plan_.payload = cfg.payload;
        plan_.layout = cfg.endpoint.layout;
        plan_.mss_table_size = cfg.endpoint.table.size();
        report_.strategy = to_string(cfg.strategy);
        report_.start_time = cfg.start_time;
    }

    SimResult run() {
        const SimTime start = cfg_.start_time;
        const std::size_t burst = cfg_.effective_flood_count();
        for (std::size_t i = 0; i < burst; ++i) push(start + i, FloodTick{});
        flood_burst_left_ = burst;

        guess_phase_at_ = start + burst + 2 * cfg_.latency + kMicrosPerMilli;
        if (cfg_.guess_budget && *cfg_.guess_budget == 0) {
            push(guess_phase_at_, Halt{"guess-budget"});
        } else if (cfg_.strategy == StrategyKind::Structured && !cfg_.counter_estimate) {
            push(guess_phase_at_, ProbeTick{probe_generation_});
        } else {
            begin_sweep(guess_phase_at_, cfg_.counter_estimate.value_or(0));
        }
        if (cfg_.legit_addr) push(start + cfg_.legit_start, LegitSyn{});
        if (cfg_.time_budget) push(start + *cfg_.time_budget, Halt{"time-budget"});

        while (!queue_.empty() && !halted_) {
            Queued q = queue_.top();
            queue_.pop();
            clock_.advance_to(q.time);
            std::visit([this](auto& p) { handle(p); }, q.payload);
        }
        if (!halted_) report_.stop_reason = "idle";

        // In-flight segments never reach their host.
        while (!queue_.empty()) {
            const Queued& q = queue_.top();
            if (const auto* a = std::get_if<Arrive>(&q.payload)) {
                trace(TraceKind::Drop, describe(a->seg) + " reason=" + to_string(DropReason::Halted));
            }
            queue_.pop();
        }

        report_.end_time = clock_.now;
        report_.log_snapshot = listener_.render_access_log();
        report_.server = listener_.counters();
        report_.half_open_at_end = listener_.backlog().size();
        report_.victim_received = victim_.received();
        if (auto it = transmits_.find(HostBehavior::DropAll); it != transmits_.end()) report_.victim_transmits = it->second;
        return {std::move(report_), std::move(trace_)};
    }

private:
    static EndpointConfig make_endpoint(const ScenarioConfig& cfg) {
        EndpointConfig e = cfg.endpoint;
        e.key = cfg.effective_key();
        e.isn_seed = RandomStream::for_purpose(cfg.seed, "isn").next_u64();
        return e;
    }

    static std::vector<Address> excluded(const ScenarioConfig& cfg) {
        std::vector<Address> out{cfg.endpoint.addr, cfg.attacker_addr, cfg.spoof_addr};
        if (cfg.legit_addr) out.push_back(*cfg.legit_addr);
        return out;
    }

    void push(SimTime t, Payload p) { queue_.push({t, order_++, std::move(p)}); }

    void trace(TraceKind kind, std::string detail) {
        TraceEvent e{clock_.now, trace_seq_++, kind, std::move(detail)};
        if (sink_) sink_(e);
        if (cfg_.record_trace) trace_.push_back(std::move(e));
    }

    void halt(std::string reason) {
        if (halted_) return;
        halted_ = true;
        report_.stop_reason = std::move(reason);
    }

    void send(HostBehavior from, const Segment& seg, std::uint64_t guess_ordinal = 0) {
        ++report_.packets_total;
        ++transmits_[from];
        trace(TraceKind::Send, describe(seg));
        const DeliveryDecision d = deliver(topo_, loss_rng_, seg, clock_.now);
        if (!d.delivered) {
            trace(TraceKind::Drop, describe(seg) + " reason=" + to_string(d.reason));
            return;
        }
        push(d.at, Arrive{seg, guess_ordinal});
    }

    // Guessing ------------------------------------------------------------

    void begin_sweep(SimTime t0, CounterValue estimate) {
        switch (cfg_.strategy) {
            case StrategyKind::Stride:
                plan_.strategy = StrideSearch{cfg_.stride_start.value_or(attack_rng_.next_u32()), cfg_.stride};
                break;
            case StrategyKind::Random:
                plan_.strategy = UniformRandom{attack_rng_.next_u64()};
                break;
            case StrategyKind::Structured:
                plan_.strategy = StructuredSearch{
                    estimate, default_prefix_order(estimate, plan_.layout, plan_.mss_table_size,
                                                   cfg_.endpoint.window.deltas)};
                break;
        }
        plan_.validate();
        guess_state_ = start_guessing(plan_);
        sweep_t0_ = t0;
        push(t0, GuessTick{});
    }

    void handle(GuessTick&) {
        if (cfg_.guess_budget && report_.guesses_sent >= *cfg_.guess_budget) return;
        auto seg = next_guess(plan_, guess_state_);
        if (!seg) {
            // Sweep exhausted: refresh the timer estimate and start over.
            ++report_.sweep_restarts;
            if (cfg_.counter_estimate) {
                begin_sweep(clock_.now, *cfg_.counter_estimate);
            } else {
                push(clock_.now, ProbeTick{probe_generation_});
            }
            return;
        }
        ++report_.guesses_sent;
        send(HostBehavior::Attacker, *seg, report_.guesses_sent);
        if (cfg_.guess_budget && report_.guesses_sent >= *cfg_.guess_budget) {
            // Let the last guesses land before stopping.
            push(clock_.now + cfg_.latency + 1, Halt{"guess-budget"});
            return;
        }
        push(guess_send_time(sweep_t0_, guess_state_.issued, plan_.rate), GuessTick{});
    }

    // A probe tick is stale once a reply has advanced the generation.
    void handle(ProbeTick& p) {
        if (p.generation != probe_generation_) return;
        awaiting_probe_ = true;
        Segment syn;
        syn.src_addr = cfg_.attacker_addr;
        syn.src_port = static_cast<Port>(kProbeBasePort + report_.probes_sent % 1000);
        syn.dst_addr = cfg_.endpoint.addr;
        syn.dst_port = cfg_.endpoint.port;
        syn.flags = kSyn;
        syn.seq = attack_rng_.next_u32();
        syn.mss_option = 1460;
        probe_port_ = syn.src_port;
        ++report_.probes_sent;
        send(HostBehavior::Attacker, syn);
        push(clock_.now + kProbeTimeout, ProbeTick{probe_generation_});
    }

    // Hosts ---------------------------------------------------------------

    void handle(Arrive& a) {
        trace(TraceKind::Deliver, describe(a.seg));
        switch (topo_.hosts.at(a.seg.dst_addr)) {
            case HostBehavior::Listener: at_server(a); break;
            case HostBehavior::Attacker: at_attacker(a.seg); break;
            case HostBehavior::DropAll:
                for (const auto& r : victim_.receive(a.seg)) send(HostBehavior::DropAll, r);
                break;
            case HostBehavior::LegitClient: at_legit(a.seg); break;
        }
    }

    void at_server(const Arrive& a) {
        EndpointOutput out = listener_.on_segment(a.seg, clock_.now);
        absorb(out, a.guess_ordinal);
    }

    void absorb(EndpointOutput& out, std::uint64_t guess_ordinal) {
        for (const auto& seg : out.outbound) send(HostBehavior::Listener, seg);
        bool forged = false;
        for (const auto& ev : out.events) {
            const std::string who = format_address(ev.tuple.client_addr) + ":" + std::to_string(ev.tuple.client_port);
            switch (ev.kind) {
                case EndpointEventKind::CookieModeEngaged:
                    trace(TraceKind::ModeChange, "mode=cookie " + ev.detail);
                    break;
                case EndpointEventKind::CookieModeDisengaged:
                    trace(TraceKind::ModeChange, "mode=normal " + ev.detail);
                    break;
                case EndpointEventKind::Established:
                    trace(TraceKind::Established, "client=" + who + " isn=" + std::to_string(ev.isn) + " via=" + ev.detail);
                    break;
                case EndpointEventKind::LogPlanted:
                    trace(TraceKind::LogPlanted, "client=" + who + " isn=" + std::to_string(ev.isn));
                    if (ev.tuple == plan_.spoofed) {
                        report_.forgeries.push_back({clock_.now, ev.isn, guess_ordinal});
                        if (!report_.first_forgery_time) {
                            report_.first_forgery_time = clock_.now;
                            report_.first_forgery_guess = guess_ordinal;
                        }
                        forged = true;
                    }
                    break;
                case EndpointEventKind::HalfOpenExpired:
                    trace(TraceKind::Expired, "client=" + who + " " + ev.detail);
                    break;
                case EndpointEventKind::Blocked:
                    trace(TraceKind::Blocked, "client=" + who + " flags=" + ev.detail);
                    break;
                case EndpointEventKind::Malformed:
                    break;
            }
        }
        refresh_server_tick();
        if (forged && cfg_.stop_on_forgery) halt("forgery");
    }

    void refresh_server_tick() {
        const auto d = listener_.next_deadline();
        if (d && (!server_tick_at_ || *d < *server_tick_at_)) {
            server_tick_at_ = d;
            push(*d, ServerTick{});
        }
    }

    void handle(ServerTick&) {
        if (!server_tick_at_ || clock_.now != *server_tick_at_) return;  // superseded
        server_tick_at_.reset();
        EndpointOutput out = listener_.tick(clock_.now);
        absorb(out, 0);
    }

    void at_attacker(const Segment& seg) {
        if (!awaiting_probe_ || seg.dst_port != probe_port_ || !(seg.has(kSyn) && seg.has(kAck))) return;
        awaiting_probe_ = false;
        ++probe_generation_;
        begin_sweep(clock_.now, estimate_counter_from_synack(seg, cfg_.endpoint.layout));
    }

    void handle(FloodTick&) {
        send(HostBehavior::Attacker, flood_.next());
        if (flood_burst_left_ > 0 && --flood_burst_left_ == 0 && cfg_.flood_rate > 0) {
            flood_sustain_t0_ = clock_.now;
        }
        if (flood_burst_left_ == 0 && cfg_.flood_rate > 0) {
            push(guess_send_time(flood_sustain_t0_, ++flood_sustained_, cfg_.flood_rate), FloodTick{});
        }
    }

    void handle(LegitSyn&) {
        Segment syn;
        syn.src_addr = *cfg_.legit_addr;
        syn.src_port = cfg_.legit_port;
        syn.dst_addr = cfg_.endpoint.addr;
        syn.dst_port = cfg_.endpoint.port;
        syn.flags = kSyn;
        syn.seq = legit_isn_ = legit_rng_.next_u32();
        syn.mss_option = 1460;
        send(HostBehavior::LegitClient, syn);
    }

    void at_legit(const Segment& seg) {
        if (legit_done_ || seg.dst_port != cfg_.legit_port || !(seg.has(kSyn) && seg.has(kAck))) return;
        legit_done_ = true;
        Segment ack;
        ack.src_addr = seg.dst_addr;
        ack.src_port = seg.dst_port;
        ack.dst_addr = seg.src_addr;
        ack.dst_port = seg.src_port;
        ack.flags = kAck;
        ack.seq = legit_isn_ + 1;
        ack.ack = seg.seq + 1;
        ack.payload = "GET /index.html HTTP/1.1\r\nHost: server\r\n\r\n";
        send(HostBehavior::LegitClient, ack);
    }

    void handle(Halt& h) { halt(h.reason); }

    const ScenarioConfig& cfg_;
    const TraceSink& sink_;
    SimClock clock_;
    Topology topo_;
    Listener listener_;
    RandomStream loss_rng_;
    RandomStream attack_rng_;
    RandomStream legit_rng_;
    FloodSource flood_;
    DropAllHost victim_;

    std::priority_queue<Queued, std::vector<Queued>, Later> queue_;
    std::uint64_t order_ = 0;
    std::uint64_t trace_seq_ = 0;
    bool halted_ = false;

    AttackPlan plan_;
    GuessState guess_state_;
    SimTime guess_phase_at_ = 0;
    SimTime sweep_t0_ = 0;
    bool awaiting_probe_ = false;
    std::uint64_t probe_generation_ = 0;
    Port probe_port_ = 0;

    std::size_t flood_burst_left_ = 0;
    SimTime flood_sustain_t0_ = 0;
    std::uint64_t flood_sustained_ = 0;

    std::optional<SimTime> server_tick_at_;
    SeqNum legit_isn_ = 0;
    bool legit_done_ = false;

    std::map<HostBehavior, std::uint64_t> transmits_;
    SimReport report_;
    std::vector<TraceEvent> trace_;
};

}  // namespace

SimResult run(const ScenarioConfig& config, const TraceSink& sink) {
    config.validate();
    return Simulation(config, sink).run();
}

}  // namespace syncookie

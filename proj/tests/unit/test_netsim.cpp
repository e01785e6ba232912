#include <doctest.h>

#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "syncookie/netsim.hpp"

using namespace syncookie;

namespace {

ScenarioConfig small_scenario(StrategyKind strategy, unsigned hash_bits) {
    ScenarioConfig cfg;
    cfg.endpoint.backlog_max = 8;
    cfg.endpoint.layout = CookieLayout::with_hash_bits(hash_bits);
    cfg.strategy = strategy;
    cfg.freeze_timer = true;
    cfg.seed = 2024;
    cfg.time_budget = 30 * kMicrosPerSecond;
    return cfg;
}

std::size_t count_kind(const std::vector<TraceEvent>& t, TraceKind k) {
    return static_cast<std::size_t>(std::count_if(t.begin(), t.end(), [k](const auto& e) { return e.kind == k; }));
}

// "Drop <describe> reason=X" -> "<describe>"
std::string segment_part(const TraceEvent& e) {
    if (e.kind == TraceKind::Drop) return e.detail.substr(0, e.detail.rfind(" reason="));
    return e.detail;
}

}  // namespace

TEST_CASE("guess budget zero: empty run") {
    auto cfg = small_scenario(StrategyKind::Stride, 8);
    cfg.guess_budget = 0;
    const auto r = run(cfg).report;
    CHECK(r.guesses_sent == 0);
    CHECK(r.forgeries.empty());
    CHECK_FALSE(r.first_forgery_time);
    CHECK(r.stop_reason == "guess-budget");
    CHECK(r.log_snapshot.empty());
}

TEST_CASE("structured search at H=8 with a frozen timer forges within 8*2^8 guesses") {
    auto cfg = small_scenario(StrategyKind::Structured, 8);
    const auto result = run(cfg);
    const auto& r = result.report;
    REQUIRE(r.first_forgery_time);
    CHECK(*r.first_forgery_guess <= 2048);
    CHECK(r.probes_sent == 1);
    CHECK(r.stop_reason == "forgery");
    CHECK(r.log_snapshot.find("10.0.0.7 - - [") == 0);
    REQUIRE(r.forgeries.size() == 1);

    const FourTuple spoofed{cfg.spoof_addr, cfg.spoof_port, cfg.endpoint.addr, cfg.endpoint.port};
    const CounterValue frozen = cfg.start_time / (64 * kMicrosPerSecond);
    const auto oracle = valid_cookie_set(spoofed, frozen, cfg.effective_key(), cfg.endpoint.layout,
                                         cfg.endpoint.table, cfg.endpoint.window);
    CHECK(oracle.contains(r.forgeries[0].isn));
    CHECK(r.victim_transmits == 0);
    CHECK(count_kind(result.trace, TraceKind::LogPlanted) >= 1);
}

TEST_CASE("identical config and seed give identical report and trace") {
    for (auto strategy : {StrategyKind::Stride, StrategyKind::Structured, StrategyKind::Random}) {
        auto cfg = small_scenario(strategy, 8);
        cfg.loss_rate = 0.05;
        const auto a = run(cfg);
        const auto b = run(cfg);
        CHECK(a.report.to_json() == b.report.to_json());
        CHECK(export_trace(a.trace) == export_trace(b.trace));
        cfg.seed++;
        CHECK(export_trace(run(cfg).trace) != export_trace(a.trace));
    }
}

TEST_CASE("trace sink sees the same events as the recorded trace") {
    auto cfg = small_scenario(StrategyKind::Random, 6);
    std::string streamed;
    const auto result = run(cfg, [&](const TraceEvent& e) { streamed += format_trace_line(e); });
    CHECK(streamed == export_trace(result.trace));
    cfg.record_trace = false;
    CHECK(run(cfg).trace.empty());
}

TEST_CASE("conservation and causality of the gateway") {
    auto cfg = small_scenario(StrategyKind::Stride, 10);
    cfg.loss_rate = 0.1;
    const auto result = run(cfg);
    const auto& trace = result.trace;
    CHECK(count_kind(trace, TraceKind::Send) == count_kind(trace, TraceKind::Deliver) + count_kind(trace, TraceKind::Drop));
    CHECK(count_kind(trace, TraceKind::Send) == result.report.packets_total);

    std::map<std::string, std::deque<SimTime>> in_flight;
    for (const auto& e : trace) {
        if (e.kind == TraceKind::Send) {
            in_flight[e.detail].push_back(e.time);
        } else if (e.kind == TraceKind::Deliver || e.kind == TraceKind::Drop) {
            auto& q = in_flight[segment_part(e)];
            REQUIRE_FALSE(q.empty());
            if (e.kind == TraceKind::Deliver) REQUIRE(e.time >= q.front() + cfg.latency);
            q.pop_front();
        }
    }
    for (const auto& [k, q] : in_flight) REQUIRE(q.empty());

    std::uint64_t last = 0, seq = 0;
    for (const auto& e : trace) {
        REQUIRE(e.time >= last);
        REQUIRE(e.seq == seq++);
        last = e.time;
    }
}

TEST_CASE("deliver: loss extremes and the 3 sigma band") {
    Topology topo;
    topo.hosts[1] = HostBehavior::Listener;
    Segment s;
    s.dst_addr = 1;

    RandomStream rng(3);
    topo.loss_rate = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto d = deliver(topo, rng, s, 100);
        REQUIRE(d.delivered);
        REQUIRE(d.at == 100 + topo.latency);
    }
    topo.loss_rate = 1.0;
    for (int i = 0; i < 1000; ++i) REQUIRE_FALSE(deliver(topo, rng, s, 100).delivered);

    topo.loss_rate = 0.5;
    std::uint64_t delivered = 0;
    for (int i = 0; i < 10000; ++i) delivered += deliver(topo, rng, s, 100).delivered;
    CHECK(testing::within_three_sigma(delivered, 10000, 0.5));

    s.dst_addr = 2;
    const auto d = deliver(topo, rng, s, 100);
    CHECK_FALSE(d.delivered);
    CHECK(d.reason == DropReason::UnknownHost);
}

TEST_CASE("whole-run loss extremes") {
    auto cfg = small_scenario(StrategyKind::Stride, 10);
    cfg.guess_budget = 500;
    cfg.loss_rate = 0.0;
    auto t = run(cfg).trace;
    CHECK(count_kind(t, TraceKind::Send) == count_kind(t, TraceKind::Deliver) +
                                                 count_kind(t, TraceKind::Drop));
    cfg.loss_rate = 1.0;
    t = run(cfg).trace;
    CHECK(count_kind(t, TraceKind::Deliver) == 0);
}

TEST_CASE("SimClock counter") {
    SimClock c;
    c.now = 3600 * kMicrosPerSecond;
    const CounterValue start = c.counter();
    SimClock frozen = c;
    frozen.freeze();
    frozen.advance_to(c.now + 600 * kMicrosPerSecond);
    CHECK(frozen.counter() == start);

    c.now = 64 * 100 * kMicrosPerSecond;
    const CounterValue t0 = c.counter();
    c.advance_to(c.now + 128 * kMicrosPerSecond);
    CHECK(c.counter() == t0 + 2);
    c.advance_to(c.now - 5);  // never moves backwards
    CHECK(c.counter() == t0 + 2);
}

TEST_CASE("frozen timer keeps every minted cookie on one counter") {
    auto cfg = small_scenario(StrategyKind::Structured, 8);
    cfg.time_budget = 600 * kMicrosPerSecond;  // ten simulated minutes
    cfg.stop_on_forgery = false;
    cfg.rate = 100;
    const auto r = run(cfg).report;
    // With the counter pinned every sweep re-forges the same eight cookies.
    const FourTuple spoofed{cfg.spoof_addr, cfg.spoof_port, cfg.endpoint.addr, cfg.endpoint.port};
    const auto oracle = valid_cookie_set(spoofed, cfg.start_time / (64 * kMicrosPerSecond), cfg.effective_key(),
                                         cfg.endpoint.layout, cfg.endpoint.table, cfg.endpoint.window);
    REQUIRE(r.forgeries.size() >= 16);
    std::set<Isn> seen;
    for (const auto& f : r.forgeries) {
        REQUIRE(oracle.contains(f.isn));
        seen.insert(f.isn);
    }
    CHECK(seen.size() == 8);
    CHECK(r.sweep_restarts >= 2);
}

TEST_CASE("victim never transmits") {
    for (auto strategy : {StrategyKind::Stride, StrategyKind::Structured, StrategyKind::Random}) {
        auto cfg = small_scenario(strategy, 8);
        cfg.stop_on_forgery = false;
        cfg.time_budget = 5 * kMicrosPerSecond;
        const auto res = run(cfg);
        CHECK(res.report.victim_transmits == 0);
        CHECK(res.report.victim_received > 0);
        std::uint64_t synacks_to_victim = 0;
        for (const auto& e : res.trace) {
            synacks_to_victim += e.kind == TraceKind::Deliver && e.detail.find("dst=10.0.0.7:") != std::string::npos;
        }
        CHECK(res.report.victim_received == synacks_to_victim);
    }
}

TEST_CASE("legitimate client completes a handshake when nothing is blocked") {
    auto cfg = small_scenario(StrategyKind::Random, 24);
    cfg.legit_addr = parse_address("10.0.0.20");
    cfg.legit_start = 2 * kMicrosPerSecond;
    cfg.time_budget = 3 * kMicrosPerSecond;
    const auto r = run(cfg).report;
    CHECK(r.log_snapshot.find("10.0.0.20 - - [") != std::string::npos);
    CHECK(r.forgeries.empty());
}

TEST_CASE("rate gate blocks the real owner of a spoofed address") {
    auto cfg = small_scenario(StrategyKind::Random, 24);
    cfg.endpoint.defense = DefenseConfig{};
    cfg.rate = 1'000'000;  // one forged ACK per microsecond
    cfg.legit_addr = cfg.spoof_addr;
    cfg.legit_start = 2 * kMicrosPerSecond;
    cfg.time_budget = 3 * kMicrosPerSecond;
    const auto res = run(cfg);
    bool legit_blocked = false;
    for (const auto& e : res.trace) {
        if (e.kind == TraceKind::Blocked && e.detail.find("client=10.0.0.7:50000 flags=SYN") != std::string::npos) {
            legit_blocked = true;
        }
    }
    CHECK(legit_blocked);
    CHECK(res.report.log_snapshot.empty());
    CHECK(res.report.server.blocked > 0);
}

TEST_CASE("unfrozen timer: probe-driven structured search still forges") {
    auto cfg = small_scenario(StrategyKind::Structured, 10);
    cfg.freeze_timer = false;
    cfg.start_time = 64 * 1000 * kMicrosPerSecond - 50'000;  // counter ticks 50 ms into the run
    cfg.rate = 100'000;
    const auto r = run(cfg).report;
    REQUIRE(r.first_forgery_time);
    CHECK(*r.first_forgery_guess <= 8 * 1024);
}

TEST_CASE("scenario validation names the field") {
    auto expect_field = [](ScenarioConfig cfg, const std::string& field) {
        try {
            cfg.validate();
            FAIL("expected ConfigError for " << field);
        } catch (const ConfigError& e) {
            CHECK(e.field() == field);
        }
    };
    ScenarioConfig base;
    auto c = base;
    c.rate = 0;
    expect_field(c, "rate");
    c = base;
    c.spoof_addr = c.endpoint.addr;
    expect_field(c, "spoof-addr");
    c = base;
    c.stride = 10;
    expect_field(c, "stride");
    c = base;
    c.loss_rate = 1.5;
    expect_field(c, "loss");
    c = base;
    c.endpoint.layout.hash_bits = 2;
    expect_field(c, "hash-bits");
    c = base;
    c.guess_budget.reset();
    c.time_budget.reset();
    expect_field(c, "time-budget-s");
    CHECK_THROWS_AS(run(c), ConfigError);
}

TEST_CASE("trace lines never carry the secret") {
    auto cfg = small_scenario(StrategyKind::Structured, 8);
    cfg.key = SecretKey::from_hex("deadbeefcafebabe0011223344556677");
    const auto res = run(cfg);
    const auto text = export_trace(res.trace) + res.report.to_json();
    CHECK(text.find("deadbeef") == std::string::npos);
    CHECK(text.find("key") == std::string::npos);
}

#include <doctest.h>

#include <filesystem>
#include <set>

#include "helpers.hpp"
#include "syncookie/bench_config.hpp"
#include "syncookie/campaign.hpp"
#include "syncookie/plot.hpp"

using namespace syncookie;

namespace {

std::size_t count_substr(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

Campaign small_campaign(StrategyKind s, unsigned h, std::uint64_t trials) {
    Campaign c;
    c.base.endpoint.backlog_max = 8;
    c.base.endpoint.layout = CookieLayout::with_hash_bits(h);
    c.base.strategy = s;
    c.base.freeze_timer = true;
    c.base.rate = 200'000;
    c.trials = trials;
    c.seed_base = 1000;
    c.threads = 2;
    return c;
}

}  // namespace

TEST_CASE("theoretical success probability") {
    const auto def = theoretical_success_probability(CookieLayout{}, AcceptWindow::standard(), MssTable::standard());
    CHECK(def.per_guess() == Rational{8, std::uint64_t{1} << 32});
    CHECK(def.valid == 8);
    CHECK(def.per_guess().reduced().num == 1);
    CHECK(def.per_guess().reduced().den == (std::uint64_t{1} << 29));

    const auto hist =
        theoretical_success_probability(CookieLayout{}, AcceptWindow::historical(), MssTable::historical());
    CHECK(hist.per_guess() == Rational{32, std::uint64_t{1} << 32});

    const auto h12 = theoretical_success_probability(CookieLayout::with_hash_bits(12), {}, MssTable::standard());
    CHECK(h12.per_guess() == Rational{8, 1 << 20});
    CHECK(h12.expected_guesses() == Rational{131072, 1});
    CHECK(to_string(h12.expected_guesses().reduced()) == "131072/1");
}

TEST_CASE("empirical per-guess frequency matches theory at H = 8, 10, 12") {
    const FourTuple victim{0x0A000007, 40000, 0x0A000001, 80};
    for (unsigned h : {8u, 10u, 12u}) {
        const auto layout = CookieLayout::with_hash_bits(h);
        AttackPlan plan;
        plan.spoofed = victim;
        plan.layout = layout;
        plan.strategy = UniformRandom{h * 31ull};
        auto gs = start_guessing(plan);
        const std::uint64_t n = 1'000'000;
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            const Isn g = guess_of(*next_guess(plan, gs));
            hits += validate_cookie(g, victim, 900, testing::test_key(), layout, MssTable::standard(), {}).valid();
        }
        const auto p = theoretical_success_probability(layout, {}, MssTable::standard());
        CHECK_MESSAGE(testing::within_three_sigma(hits, n, p.per_guess().value()), "H=" << h << " hits=" << hits);
    }
}

TEST_CASE("structured campaign at H=8: every trial within 2048 guesses") {
    const auto stats = run_campaign(small_campaign(StrategyKind::Structured, 8, 40));
    CHECK(stats.successes == 40);
    CHECK(stats.censored == 0);
    for (const auto& t : stats.trials) CHECK(t.guesses <= 2048);
}

TEST_CASE("campaign output is independent of thread count and repeatable") {
    auto c = small_campaign(StrategyKind::Random, 8, 12);
    const auto one = run_campaign(c);
    c.threads = 4;
    const auto four = run_campaign(c);
    CHECK(campaign_csv(one) == campaign_csv(four));
    CHECK(campaign_csv(one) == campaign_csv(run_campaign(c)));
    for (std::size_t i = 0; i < one.trials.size(); ++i) CHECK(one.trials[i].seed == 1000 + i);
}

TEST_CASE("halving the valid fraction doubles expected guesses") {
    // H=8 vs H=9 under uniform random guessing.
    const auto s8 = run_campaign(small_campaign(StrategyKind::Random, 8, 300));
    const auto s9 = run_campaign(small_campaign(StrategyKind::Random, 9, 300));
    CHECK(s8.theoretical_mean == doctest::Approx(8192));
    CHECK(s9.theoretical_mean == doctest::Approx(16384));
    CHECK(s8.mean == doctest::Approx(8192).epsilon(0.15));
    CHECK(s9.mean == doctest::Approx(16384).epsilon(0.15));
    CHECK(s9.mean / s8.mean == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("censoring and summary statistics") {
    std::vector<TrialOutcome> t(4);
    for (std::uint64_t i = 0; i < 4; ++i) {
        t[i].trial = 3 - i;  // out of order on purpose
        t[i].guesses = 10 * (i + 1);
    }
    t[0].censored = true;
    const auto s = summarize(t, 25.0);
    CHECK(s.trials.front().trial == 0);
    CHECK(s.successes == 3);
    CHECK(s.censored == 1);
    CHECK(s.mean == doctest::Approx(30.0));
    CHECK(s.variance == doctest::Approx(100.0));
    std::uint64_t binned = 0;
    for (auto n : s.histogram.counts) binned += n;
    CHECK(binned == 3);

    auto all = t;
    for (auto& x : all) x.censored = true;
    CHECK(summarize(all, 1.0).all_censored());

    auto c = small_campaign(StrategyKind::Random, 24, 2);
    c.timeout_guesses = 50;
    const auto stats = run_campaign(c);
    CHECK(stats.all_censored());
    for (const auto& tr : stats.trials) CHECK(tr.guesses == 50);
}

TEST_CASE("default timeout is fifty times the expected guesses") {
    auto c = small_campaign(StrategyKind::Random, 12, 1);
    CHECK(c.effective_timeout() == 50 * 131072);
    c.timeout_guesses = 7;
    CHECK(c.effective_timeout() == 7);
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("campaign CSV round-trips through analyze parsing") {
    const auto stats = run_campaign(small_campaign(StrategyKind::Structured, 6, 5));
    const auto csv = campaign_csv(stats);
    CHECK(csv.rfind("trial,seed,guesses,forgery_time_us,strategy,censored\n", 0) == 0);
    const auto parsed = parse_campaign_csv(csv);
    REQUIRE(parsed.size() == 5);
    const auto again = summarize(parsed, stats.theoretical_mean);
    CHECK(again.mean == stats.mean);
    CHECK(again.variance == stats.variance);
    CHECK(campaign_csv(again) == csv);
    CHECK_THROWS_AS(parse_campaign_csv("nope\n"), ConfigError);
    CHECK_THROWS_AS(parse_campaign_csv("trial,seed,guesses,forgery_time_us,strategy,censored\n1,2\n"), ConfigError);
}

TEST_CASE("timeline plot: one mark and one CSV row per forgery") {
    const auto dir = std::filesystem::temp_directory_path() / "syncookie_plot_test";
    std::filesystem::create_directories(dir);

    SimReport r;
    r.start_time = 1000;
    r.forgeries = {{1000 + 2'000'000, 5, 10}, {1000 + 9'000'000, 6, 20}, {1000 + 9'500'000, 7, 21}};
    const auto rows = timeline_from_report(r);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].time == 9'000'000);
    const auto svg_path = (dir / "run.svg").string();
    emit_timeline_plot(rows, svg_path);
    const auto svg = read_file(svg_path);
    const auto csv = read_file((dir / "run.csv").string());
    CHECK(count_substr(svg, "<circle class=\"mark\"") == 3);
    CHECK(count_substr(csv, "\n") == 1 + 3);
    CHECK(parse_timeline_csv(csv) == rows);

    SUBCASE("empty timeline needs the explicit flag") {
        CHECK_THROWS_AS(emit_timeline_plot({}, (dir / "empty.svg").string()), std::invalid_argument);
        CHECK_NOTHROW(emit_timeline_plot({}, (dir / "empty.svg").string(), true));
    }
    SUBCASE("multi-trial campaigns overlay one series per trial") {
        const auto stats = run_campaign(small_campaign(StrategyKind::Structured, 6, 4));
        const auto trows = timeline_from_stats(stats);
        CHECK(trows.size() == 4);
        const auto tsvg = render_timeline_svg(trows);
        CHECK(count_substr(tsvg, "<g class=\"series\"") == 4);
        CHECK(count_substr(tsvg, "<circle class=\"mark\"") == trows.size());
    }
    SUBCASE("unwritable path") {
        try {
            emit_timeline_plot(rows, "/nonexistent-dir/x/plot.svg");
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.path() == "/nonexistent-dir/x/plot.svg");
        }
    }
}

TEST_CASE("config text sections and CLI-named keys") {
    BenchConfig cfg;
    apply_config_text(cfg, R"(
; reduced-scale demo
[endpoint]
backlog = 16
hash-bits = 12
defense = 250
mss-table = 536,1460

[attack]
strategy = structured
rate = 1000
payload = GET /x HTTP/1.1\r\n\r\n
guess-budget = 77

[topology]
freeze-timer = true
seed = 99
legit-addr = 10.0.0.30

[campaign]
trials = 5
)");
    CHECK(cfg.scenario.endpoint.backlog_max == 16);
    CHECK(cfg.scenario.endpoint.layout.hash_bits == 12);
    REQUIRE(cfg.scenario.endpoint.defense);
    CHECK(cfg.scenario.endpoint.defense->min_gap == 250);
    CHECK(cfg.scenario.endpoint.table.values == std::vector<std::uint16_t>{536, 1460});
    CHECK(cfg.scenario.strategy == StrategyKind::Structured);
    CHECK(cfg.scenario.payload == "GET /x HTTP/1.1\r\n\r\n");
    CHECK(cfg.scenario.guess_budget == 77u);
    CHECK(cfg.scenario.freeze_timer);
    CHECK(cfg.scenario.seed == 99);
    CHECK(cfg.scenario.legit_addr == parse_address("10.0.0.30"));
    CHECK(cfg.campaign.trials == 5);

    apply_setting(cfg, "hash-bits", "8");
    CHECK(cfg.scenario.endpoint.layout.hash_bits == 8);
    apply_setting(cfg, "time-budget-s", "2.5");
    CHECK(cfg.scenario.time_budget == 2'500'000u);

    auto field_of = [&](auto fn) -> std::string {
        try {
            fn();
        } catch (const ConfigError& e) {
            return e.field();
        }
        return "";
    };
    CHECK(field_of([&] { apply_setting(cfg, "rate", "fast"); }) == "rate");
    CHECK(field_of([&] { apply_setting(cfg, "bogus", "1"); }) == "bogus");
    CHECK(field_of([&] { apply_config_text(cfg, "[attack]\nbacklog = 3\n"); }) == "backlog");
    CHECK(field_of([&] { apply_setting(cfg, "strategy", "linear"); }) == "strategy");
    CHECK(field_of([&] { apply_setting(cfg, "spoof-addr", "10.0.0"); }) == "spoof-addr");
    CHECK_THROWS_AS(apply_config_file(cfg, "/nonexistent/config.ini"), IoError);

    // Every key is unique, so each can be a flag of the same name.
    std::set<std::string> names;
    for (const auto& k : config_keys()) CHECK(names.insert(k.name).second);
    for (const char* flag : {"hash-bits", "strategy", "stride", "rate", "backlog", "freeze-timer", "defense",
                             "trials", "seed"}) {
        CHECK(names.contains(flag));
    }
}

#pragma once

// Monte Carlo campaigns over seeds and the closed-form success odds they are
// checked against.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "syncookie/bench_config.hpp"
#include "syncookie/cookie_layout.hpp"
#include "syncookie/netsim.hpp"

namespace syncookie {

struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    Rational reduced() const;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend bool operator==(const Rational& a, const Rational& b) {
        return static_cast<unsigned __int128>(a.num) * b.den == static_cast<unsigned __int128>(b.num) * a.den;
    }
};

std::string to_string(const Rational& r);

struct SuccessProbability {
    std::uint64_t valid = 0;  // |window| x |table|
    std::uint64_t space = 0;  // 2^(cookie width)

    Rational per_guess() const { return {valid, space}; }
    // Mean of the geometric distribution of independent uniform guesses.
    Rational expected_guesses() const { return {space, valid}; }
};

SuccessProbability theoretical_success_probability(const CookieLayout& layout, const AcceptWindow& window,
                                                   const MssTable& table);

struct Campaign {
    ScenarioConfig base;
    std::uint64_t trials = 1;
    std::uint64_t seed_base = 0;
    std::size_t threads = 0;
    std::optional<std::uint64_t> timeout_guesses;  // default 50x expected

    static Campaign from(const BenchConfig& cfg);

    std::uint64_t effective_timeout() const;
    void validate() const;  // throws ConfigError
};

struct TrialOutcome {
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    bool censored = false;
    std::uint64_t guesses = 0;            // to first forgery, or sent before timeout
    std::optional<SimTime> forgery_time;  // relative to run start
    std::string strategy;
    std::vector<Forgery> forgeries;  // every planted entry; times relative to run start
};

struct Histogram {
    double lo = 0;
    double width = 1;
    std::vector<std::uint64_t> counts;
};

struct CampaignStats {
    std::vector<TrialOutcome> trials;  // sorted by trial index
    std::uint64_t successes = 0;
    std::uint64_t censored = 0;
    double mean = 0;
    double variance = 0;  // sample variance (n-1)
    double theoretical_mean = 0;
    Histogram histogram;

    bool all_censored() const { return successes == 0; }
    std::string to_json() const;
};

// Aggregates outcomes in trial order, independent of completion order.
CampaignStats summarize(std::vector<TrialOutcome> trials, double theoretical_mean, std::size_t bins = 20);

CampaignStats run_campaign(const Campaign& c);

// trial,seed,guesses,forgery_time_us,strategy,censored
std::string campaign_csv(const CampaignStats& stats);
// Throws ConfigError("csv", ...) on malformed input.
std::vector<TrialOutcome> parse_campaign_csv(const std::string& text);

}  // namespace syncookie

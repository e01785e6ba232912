#include "syncookie/campaign.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <numeric>
#include <sstream>
#include <thread>

namespace syncookie {

Rational Rational::reduced() const {
    const std::uint64_t g = std::gcd(num, den);
    return g == 0 ? *this : Rational{num / g, den / g};
}

std::string to_string(const Rational& r) { return std::to_string(r.num) + "/" + std::to_string(r.den); }

SuccessProbability theoretical_success_probability(const CookieLayout& layout, const AcceptWindow& window,
                                                   const MssTable& table) {
    return {std::uint64_t{window.deltas} * table.size(), layout.space()};
}

Campaign Campaign::from(const BenchConfig& cfg) {
    Campaign c;
    c.base = cfg.scenario;
    c.trials = cfg.campaign.trials;
    c.seed_base = cfg.scenario.seed;
    c.threads = cfg.campaign.threads;
    c.timeout_guesses = cfg.campaign.timeout_guesses;
    return c;
}

std::uint64_t Campaign::effective_timeout() const {
    if (timeout_guesses) return *timeout_guesses;
    const auto p = theoretical_success_probability(base.endpoint.layout, base.endpoint.window, base.endpoint.table);
    return 50 * (p.space / p.valid);
}

void Campaign::validate() const {
    if (trials < 1) throw ConfigError("trials", "must be >= 1");
    if (effective_timeout() < 1) throw ConfigError("timeout-guesses", "must be >= 1");
    base.validate();
}

namespace {

TrialOutcome run_trial(const Campaign& c, std::uint64_t index) {
    ScenarioConfig cfg = c.base;
    cfg.seed = c.seed_base + index;
    cfg.record_trace = false;
    cfg.guess_budget = c.effective_timeout();
    cfg.time_budget.reset();
    const SimReport r = run(cfg).report;

    TrialOutcome t;
    t.trial = index;
    t.seed = cfg.seed;
    t.strategy = r.strategy;
    t.censored = !r.first_forgery_time.has_value();
    t.guesses = t.censored ? r.guesses_sent : *r.first_forgery_guess;
    if (r.first_forgery_time) t.forgery_time = *r.first_forgery_time - r.start_time;
    for (const auto& f : r.forgeries) t.forgeries.push_back({f.time - r.start_time, f.isn, f.guess_index});
    return t;
}

}  // namespace

CampaignStats summarize(std::vector<TrialOutcome> trials, double theoretical_mean, std::size_t bins) {
    std::sort(trials.begin(), trials.end(), [](const auto& a, const auto& b) { return a.trial < b.trial; });
    CampaignStats s;
    s.theoretical_mean = theoretical_mean;

    std::vector<double> xs;
    for (const auto& t : trials) {
        if (t.censored) {
            ++s.censored;
        } else {
            xs.push_back(static_cast<double>(t.guesses));
        }
    }
    s.successes = xs.size();
    if (!xs.empty()) {
        s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        if (xs.size() > 1) {
            double ss = 0;
            for (double x : xs) ss += (x - s.mean) * (x - s.mean);
            s.variance = ss / static_cast<double>(xs.size() - 1);
        }
        const double hi = *std::max_element(xs.begin(), xs.end());
        s.histogram.lo = 0;
        s.histogram.width = std::max(1.0, hi / static_cast<double>(bins));
        s.histogram.counts.assign(bins, 0);
        for (double x : xs) {
            auto b = static_cast<std::size_t>(x / s.histogram.width);
            ++s.histogram.counts[std::min(b, bins - 1)];
        }
    }
    s.trials = std::move(trials);
    return s;
}

CampaignStats run_campaign(const Campaign& c) {
    c.validate();
    std::vector<TrialOutcome> outcomes(c.trials);
    std::size_t workers = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<std::size_t>(workers, c.trials);

    std::atomic<std::uint64_t> next{0};
    auto work = [&] {
        for (std::uint64_t i; (i = next.fetch_add(1)) < c.trials;) outcomes[i] = run_trial(c, i);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    const auto p = theoretical_success_probability(c.base.endpoint.layout, c.base.endpoint.window, c.base.endpoint.table);
    return summarize(std::move(outcomes), p.expected_guesses().value());
}

std::string CampaignStats::to_json() const {
    nlohmann::ordered_json j;
    j["trials"] = trials.size();
    j["successes"] = successes;
    j["censored"] = censored;
    j["all_censored"] = all_censored();
    j["mean_guesses"] = mean;
    j["variance_guesses"] = variance;
    j["theoretical_mean_guesses"] = theoretical_mean;
    j["histogram"] = {{"lo", histogram.lo}, {"width", histogram.width}, {"counts", histogram.counts}};
    return j.dump(2) + "\n";
}

std::string campaign_csv(const CampaignStats& stats) {
    std::string out = "trial,seed,guesses,forgery_time_us,strategy,censored\n";
    for (const auto& t : stats.trials) {
        out += std::to_string(t.trial) + "," + std::to_string(t.seed) + "," + std::to_string(t.guesses) + ",";
        if (t.forgery_time) out += std::to_string(*t.forgery_time);
        out += "," + t.strategy + "," + (t.censored ? "1" : "0") + "\n";
    }
    return out;
}

std::vector<TrialOutcome> parse_campaign_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("trial,seed,guesses", 0) != 0) {
        throw ConfigError("csv", "missing campaign CSV header");
    }
    auto num = [](const std::string& field, std::size_t lineno) {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || p != field.data() + field.size()) {
            throw ConfigError("csv", "line " + std::to_string(lineno) + ": bad number '" + field + "'");
        }
        return v;
    };
    std::vector<TrialOutcome> out;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 6) throw ConfigError("csv", "line " + std::to_string(lineno) + ": expected 6 fields");
        TrialOutcome t;
        t.trial = num(f[0], lineno);
        t.seed = num(f[1], lineno);
        t.guesses = num(f[2], lineno);
        if (!f[3].empty()) t.forgery_time = num(f[3], lineno);
        t.strategy = f[4];
        t.censored = f[5] == "1";
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace syncookie

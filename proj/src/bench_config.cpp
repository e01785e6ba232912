#include "syncookie/bench_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace syncookie {

namespace {

template <typename T>
T parse_uint(const std::string& key, const std::string& v) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key, "expected true/false, got '" + v + "'");
}

Address parse_addr(const std::string& key, const std::string& v) {
    try {
        return parse_address(v);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}

SimTime seconds_to_micros(const std::string& key, const std::string& v) {
    const double s = parse_double(key, v);
    if (s < 0) throw ConfigError(key, "must not be negative");
    return static_cast<SimTime>(std::llround(s * kMicrosPerSecond));
}

std::vector<ConfigKey> build_keys() {
    using C = BenchConfig;
    using S = const std::string&;
    std::vector<ConfigKey> k;
    auto add = [&k](const char* section, const char* name, const char* help,
                    std::function<void(C&, S)> fn, bool is_switch = false) {
        k.push_back({section, name, help, is_switch, std::move(fn)});
    };

    // endpoint
    add("endpoint", "server-addr", "listener IPv4 address",
        [](C& c, S v) { c.scenario.endpoint.addr = parse_addr("server-addr", v); });
    add("endpoint", "server-port", "listener port",
        [](C& c, S v) { c.scenario.endpoint.port = parse_uint<Port>("server-port", v); });
    add("endpoint", "backlog", "half-open backlog capacity (tcp_max_syn_backlog)",
        [](C& c, S v) { c.scenario.endpoint.backlog_max = parse_uint<std::size_t>("backlog", v); });
    add("endpoint", "retransmit-limit", "SYN-ACK retransmissions before RST",
        [](C& c, S v) { c.scenario.endpoint.retransmit_limit = parse_uint<unsigned>("retransmit-limit", v); });
    add("endpoint", "retransmit-interval-ms", "first SYN-ACK retransmit gap, doubling",
        [](C& c, S v) {
            c.scenario.endpoint.retransmit_interval =
                parse_uint<SimTime>("retransmit-interval-ms", v) * kMicrosPerMilli;
        });
    add("endpoint", "hash-bits", "width of the keyed hash field",
        [](C& c, S v) { c.scenario.endpoint.layout.hash_bits = parse_uint<unsigned>("hash-bits", v); });
    add("endpoint", "timer-bits", "width of the timer field",
        [](C& c, S v) { c.scenario.endpoint.layout.timer_bits = parse_uint<unsigned>("timer-bits", v); });
    add("endpoint", "mss-bits", "width of the MSS index field",
        [](C& c, S v) { c.scenario.endpoint.layout.mss_bits = parse_uint<unsigned>("mss-bits", v); });
    add("endpoint", "mss-table", "comma-separated increasing MSS values", [](C& c, S v) {
        MssTable t;
        t.values.clear();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) t.values.push_back(parse_uint<std::uint16_t>("mss-table", item));
        c.scenario.endpoint.table = t;
    });
    add("endpoint", "window", "accepted timer deltas (2 means now and now-1)",
        [](C& c, S v) { c.scenario.endpoint.window.deltas = parse_uint<std::uint32_t>("window", v); });
    add("endpoint", "invalid-ack", "drop|rst for ACKs carrying a bad cookie", [](C& c, S v) {
        if (v == "drop") c.scenario.endpoint.invalid_ack = InvalidAckPolicy::Drop;
        else if (v == "rst") c.scenario.endpoint.invalid_ack = InvalidAckPolicy::Reset;
        else throw ConfigError("invalid-ack", "expected drop|rst, got '" + v + "'");
    });
    add("endpoint", "sticky-cookie-mode", "stay in cookie mode once engaged",
        [](C& c, S v) { c.scenario.endpoint.sticky_cookie_mode = parse_bool("sticky-cookie-mode", v); }, true);
    add("endpoint", "defense", "rate gate minimum gap in microseconds (0 disables)", [](C& c, S v) {
        const auto gap = parse_uint<SimTime>("defense", v);
        if (gap == 0) {
            c.scenario.endpoint.defense.reset();
        } else {
            if (!c.scenario.endpoint.defense) c.scenario.endpoint.defense.emplace();
            c.scenario.endpoint.defense->min_gap = gap;
        }
    });
    add("endpoint", "defense-block-ms", "rate gate block duration", [](C& c, S v) {
        if (!c.scenario.endpoint.defense) c.scenario.endpoint.defense.emplace();
        c.scenario.endpoint.defense->block_duration = parse_uint<SimTime>("defense-block-ms", v) * kMicrosPerMilli;
    });
    add("endpoint", "key", "server secret as 32 hex digits (default: derived from seed)", [](C& c, S v) {
        try {
            c.scenario.key = SecretKey::from_hex(v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("key", e.what());
        }
    });

    // attack
    add("attack", "strategy", "stride|structured|random",
        [](C& c, S v) { c.scenario.strategy = parse_strategy(v); });
    add("attack", "stride", "odd stride for stride search",
        [](C& c, S v) { c.scenario.stride = parse_uint<std::uint32_t>("stride", v); });
    add("attack", "start", "first stride-search guess (default: seeded)",
        [](C& c, S v) { c.scenario.stride_start = parse_uint<Isn>("start", v); });
    add("attack", "counter-estimate", "timer counter for structured search, or 'probe'", [](C& c, S v) {
        if (v == "probe") c.scenario.counter_estimate.reset();
        else c.scenario.counter_estimate = parse_uint<CounterValue>("counter-estimate", v);
    });
    add("attack", "rate", "forged ACKs per simulated second",
        [](C& c, S v) { c.scenario.rate = parse_uint<std::uint64_t>("rate", v); });
    add("attack", "payload", "forged request bytes (\\r\\n escapes)",
        [](C& c, S v) { c.scenario.payload = unescape(v); });
    add("attack", "flood", "initial SYN burst size (default backlog+1)",
        [](C& c, S v) { c.scenario.flood_count = parse_uint<std::size_t>("flood", v); });
    add("attack", "flood-rate", "sustained SYNs per second after the burst",
        [](C& c, S v) { c.scenario.flood_rate = parse_uint<std::uint64_t>("flood-rate", v); });
    add("attack", "attacker-addr", "attacker's real address",
        [](C& c, S v) { c.scenario.attacker_addr = parse_addr("attacker-addr", v); });
    add("attack", "spoof-addr", "spoofed victim address",
        [](C& c, S v) { c.scenario.spoof_addr = parse_addr("spoof-addr", v); });
    add("attack", "spoof-port", "spoofed victim port",
        [](C& c, S v) { c.scenario.spoof_port = parse_uint<Port>("spoof-port", v); });
    add("attack", "stop-on-forgery", "halt at the first planted log line",
        [](C& c, S v) { c.scenario.stop_on_forgery = parse_bool("stop-on-forgery", v); }, true);
    add("attack", "guess-budget", "maximum forged ACKs ('none' for unlimited)", [](C& c, S v) {
        if (v == "none") c.scenario.guess_budget.reset();
        else c.scenario.guess_budget = parse_uint<std::uint64_t>("guess-budget", v);
    });
    add("attack", "time-budget-s", "simulated run length in seconds (0 for unlimited)", [](C& c, S v) {
        const SimTime t = seconds_to_micros("time-budget-s", v);
        if (t == 0) c.scenario.time_budget.reset();
        else c.scenario.time_budget = t;
    });

    // topology
    add("topology", "latency-us", "one-way gateway latency",
        [](C& c, S v) { c.scenario.latency = parse_uint<SimTime>("latency-us", v); });
    add("topology", "loss", "per-segment loss probability",
        [](C& c, S v) { c.scenario.loss_rate = parse_double("loss", v); });
    add("topology", "freeze-timer", "pin the cookie counter for the whole run",
        [](C& c, S v) { c.scenario.freeze_timer = parse_bool("freeze-timer", v); }, true);
    add("topology", "start-s", "simulated clock at run start, seconds",
        [](C& c, S v) { c.scenario.start_time = seconds_to_micros("start-s", v); });
    add("topology", "legit-addr", "address of a legitimate client (optional)",
        [](C& c, S v) { c.scenario.legit_addr = parse_addr("legit-addr", v); });
    add("topology", "legit-port", "legitimate client port",
        [](C& c, S v) { c.scenario.legit_port = parse_uint<Port>("legit-port", v); });
    add("topology", "legit-start-ms", "legitimate client SYN time after run start",
        [](C& c, S v) { c.scenario.legit_start = parse_uint<SimTime>("legit-start-ms", v) * kMicrosPerMilli; });
    add("topology", "seed", "run seed (campaign: seed of trial 0)",
        [](C& c, S v) { c.scenario.seed = parse_uint<std::uint64_t>("seed", v); });

    // campaign
    add("campaign", "trials", "Monte Carlo trials",
        [](C& c, S v) { c.campaign.trials = parse_uint<std::uint64_t>("trials", v); });
    add("campaign", "threads", "worker threads (0: all cores)",
        [](C& c, S v) { c.campaign.threads = parse_uint<std::size_t>("threads", v); });
    add("campaign", "timeout-guesses", "per-trial guess cap before censoring",
        [](C& c, S v) { c.campaign.timeout_guesses = parse_uint<std::uint64_t>("timeout-guesses", v); });
    return k;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = build_keys();
    return keys;
}

void apply_setting(BenchConfig& cfg, const std::string& name, const std::string& value) {
    for (const auto& k : config_keys()) {
        if (k.name == name) {
            k.apply(cfg, value);
            return;
        }
    }
    throw ConfigError(name, "unknown configuration key");
}

void apply_config_text(BenchConfig& cfg, const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config", e.message() + " at line " + std::to_string(e.line()));
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError(section, "top-level keys must live in a section");
        for (const auto& [name, node] : body) {
            const auto& keys = config_keys();
            auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == name; });
            if (it == keys.end()) throw ConfigError(name, "unknown configuration key");
            if (it->section != section) {
                throw ConfigError(name, "belongs in section [" + it->section + "], found in [" + section + "]");
            }
            it->apply(cfg, node.data());
        }
    }
}

void apply_config_file(BenchConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

std::string unescape(const std::string& text) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '\\' || i + 1 == text.size()) {
            out += text[i];
            continue;
        }
        switch (text[++i]) {
            case 'r': out += '\r'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case '\\': out += '\\'; break;
            default:
                out += '\\';
                out += text[i];
        }
    }
    return out;
}

}  // namespace syncookie

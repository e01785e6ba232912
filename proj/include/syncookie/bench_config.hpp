#pragma once

// Flat key-value configuration with one section per module:
//
//   [endpoint]  backlog, hash-bits, defense, ...
//   [attack]    strategy, stride, rate, ...
//   [topology]  latency-us, loss, freeze-timer, seed, ...
//   [campaign]  trials, threads, timeout-guesses
//
// Key names are unique across sections and double as CLI flag names.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "syncookie/netsim.hpp"

namespace syncookie {

struct CampaignSettings {
    std::uint64_t trials = 100;
    std::size_t threads = 0;  // 0: hardware concurrency
    std::optional<std::uint64_t> timeout_guesses;  // default 50x expected guesses
};

struct BenchConfig {
    ScenarioConfig scenario;
    CampaignSettings campaign;
};

struct ConfigKey {
    std::string section;
    std::string name;
    std::string help;
    bool is_switch = false;  // boolean; bare CLI flag means "true"
    std::function<void(BenchConfig&, const std::string&)> apply;
};

const std::vector<ConfigKey>& config_keys();

// Throws ConfigError naming the key.
void apply_setting(BenchConfig& cfg, const std::string& name, const std::string& value);

// Parses INI text onto `cfg`. Unknown sections or keys are ConfigErrors.
void apply_config_text(BenchConfig& cfg, const std::string& text);

// Throws IoError when the file cannot be read.
void apply_config_file(BenchConfig& cfg, const std::string& path);

// "\r", "\n", "\t" and "\\" escapes as used by the payload key.
std::string unescape(const std::string& text);

}  // namespace syncookie

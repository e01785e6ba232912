#pragma once

// Forgery timelines: a CSV of record plus an SVG rendering of it.

#include <cstdint>
#include <string>
#include <vector>

#include "syncookie/campaign.hpp"
#include "syncookie/netsim.hpp"

namespace syncookie {

struct TimelineRow {
    std::uint64_t trial = 0;
    std::uint64_t index = 0;  // forgery ordinal within the trial
    SimTime time = 0;         // µs since run start
    Isn isn = 0;

    friend bool operator==(const TimelineRow&, const TimelineRow&) = default;
};

std::vector<TimelineRow> timeline_from_report(const SimReport& report, std::uint64_t trial = 0);
std::vector<TimelineRow> timeline_from_stats(const CampaignStats& stats);

// trial,index,time_us,isn
std::string timeline_csv(const std::vector<TimelineRow>& rows);
std::vector<TimelineRow> parse_timeline_csv(const std::string& text);  // throws ConfigError

// Cumulative step series per trial with one circle mark per row.
std::string render_timeline_svg(const std::vector<TimelineRow>& rows);

// Writes the SVG to `svg_path` and its CSV twin next to it (".csv").
// An empty timeline is refused with std::invalid_argument unless allow_empty.
// Throws IoError on write failure.
void emit_timeline_plot(const std::vector<TimelineRow>& rows, const std::string& svg_path, bool allow_empty = false);

// Helpers shared with the CLI. write_file throws IoError.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace syncookie

#include "syncookie/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace syncookie {

std::vector<TimelineRow> timeline_from_report(const SimReport& report, std::uint64_t trial) {
    std::vector<TimelineRow> rows;
    std::uint64_t i = 0;
    for (const auto& f : report.forgeries) rows.push_back({trial, i++, f.time - report.start_time, f.isn});
    return rows;
}

std::vector<TimelineRow> timeline_from_stats(const CampaignStats& stats) {
    std::vector<TimelineRow> rows;
    for (const auto& t : stats.trials) {
        std::uint64_t i = 0;
        for (const auto& f : t.forgeries) rows.push_back({t.trial, i++, f.time, f.isn});
    }
    return rows;
}

std::string timeline_csv(const std::vector<TimelineRow>& rows) {
    std::string out = "trial,index,time_us,isn\n";
    for (const auto& r : rows) {
        out += std::to_string(r.trial) + "," + std::to_string(r.index) + "," + std::to_string(r.time) + "," +
               std::to_string(r.isn) + "\n";
    }
    return out;
}

std::vector<TimelineRow> parse_timeline_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "trial,index,time_us,isn") {
        throw ConfigError("csv", "missing timeline CSV header 'trial,index,time_us,isn'");
    }
    std::vector<TimelineRow> rows;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty()) continue;
        std::uint64_t v[4];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int k = 0; k < 4; ++k) {
            auto [next, ec] = std::from_chars(p, end, v[k]);
            if (ec != std::errc{} || (k < 3 ? (next == end || *next != ',') : next != end)) {
                throw ConfigError("csv", "line " + std::to_string(lineno) + ": malformed timeline row");
            }
            p = next + 1;
        }
        rows.push_back({v[0], v[1], v[2], static_cast<Isn>(v[3])});
    }
    return rows;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string render_timeline_svg(const std::vector<TimelineRow>& rows) {
    constexpr double W = 800, H = 420, left = 70, right = 20, top = 40, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;

    std::map<std::uint64_t, std::vector<TimelineRow>> series;
    for (const auto& r : rows) series[r.trial].push_back(r);
    double max_t = 1.0;
    std::size_t max_n = 1;
    for (auto& [trial, pts] : series) {
        std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
        max_t = std::max(max_t, static_cast<double>(pts.back().time) / kMicrosPerSecond);
        max_n = std::max(max_n, pts.size());
    }
    max_t *= 1.05;
    auto x = [&](double s) { return left + pw * s / max_t; };
    auto y = [&](double n) { return top + ph - ph * n / static_cast<double>(max_n); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"420\" "
                      "viewBox=\"0 0 800 420\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"800\" height=\"420\" fill=\"white\"/>\n";
    svg += "<text x=\"400\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">Planted log entries over time</text>\n";
    svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top + ph) + "\" x2=\"" + fmt(left + pw) + "\" y2=\"" +
           fmt(top + ph) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" + fmt(top + ph) +
           "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double s = max_t * i / 5;
        svg += "<text x=\"" + fmt(x(s)) + "\" y=\"" + fmt(top + ph + 18) + "\" text-anchor=\"middle\">" + fmt(s) +
               "</text>\n";
    }
    for (std::size_t n = 0; n <= max_n; n += std::max<std::size_t>(1, max_n / 5)) {
        svg += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(y(static_cast<double>(n)) + 4) +
               "\" text-anchor=\"end\">" + std::to_string(n) + "</text>\n";
    }
    svg += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(H - 10) +
           "\" text-anchor=\"middle\">simulated time since attack start (s)</text>\n";
    svg += "<text transform=\"translate(18," + fmt(top + ph / 2) +
           ") rotate(-90)\" text-anchor=\"middle\">cumulative forgeries</text>\n";

    std::size_t color = 0;
    for (const auto& [trial, pts] : series) {
        const char* c = kPalette[color++ % std::size(kPalette)];
        svg += "<g class=\"series\" data-trial=\"" + std::to_string(trial) + "\" stroke=\"" + c + "\" fill=\"" + c +
               "\">\n";
        std::string path = "M" + fmt(x(0)) + "," + fmt(y(0));
        std::size_t n = 0;
        for (const auto& p : pts) {
            const double px = x(static_cast<double>(p.time) / kMicrosPerSecond);
            path += " H" + fmt(px) + " V" + fmt(y(static_cast<double>(++n)));
        }
        svg += "<path d=\"" + path + "\" fill=\"none\" stroke-width=\"1.5\"/>\n";
        n = 0;
        for (const auto& p : pts) {
            svg += "<circle class=\"mark\" cx=\"" + fmt(x(static_cast<double>(p.time) / kMicrosPerSecond)) +
                   "\" cy=\"" + fmt(y(static_cast<double>(++n))) + "\" r=\"3.5\"/>\n";
        }
        svg += "</g>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw IoError(path, "write failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit_timeline_plot(const std::vector<TimelineRow>& rows, const std::string& svg_path, bool allow_empty) {
    if (rows.empty() && !allow_empty) {
        throw std::invalid_argument("timeline has no forgery events; nothing to plot (allow an empty plot explicitly)");
    }
    write_file(svg_path, render_timeline_svg(rows));
    write_file(std::filesystem::path(svg_path).replace_extension(".csv").string(), timeline_csv(rows));
}

}  // namespace syncookie

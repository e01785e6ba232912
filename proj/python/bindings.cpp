#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "syncookie/bench_config.hpp"
#include "syncookie/campaign.hpp"
#include "syncookie/cookie_codec.hpp"
#include "syncookie/netsim.hpp"
#include "syncookie/plot.hpp"

namespace py = pybind11;
using namespace syncookie;

namespace {

BenchConfig configure(const std::map<std::string, std::string>& settings, const std::string& config_text) {
    BenchConfig cfg;
    if (!config_text.empty()) apply_config_text(cfg, config_text);
    for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
    return cfg;
}

FourTuple tuple_of(const std::string& client, Port cport, const std::string& server, Port sport) {
    return {parse_address(client), cport, parse_address(server), sport};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "SYN cookie codec, listener and attack simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<CookieLayout>(m, "CookieLayout")
        .def(py::init<>())
        .def_static("with_hash_bits", &CookieLayout::with_hash_bits, py::arg("hash_bits"))
        .def_readwrite("timer_bits", &CookieLayout::timer_bits)
        .def_readwrite("mss_bits", &CookieLayout::mss_bits)
        .def_readwrite("hash_bits", &CookieLayout::hash_bits)
        .def_property_readonly("width", &CookieLayout::width)
        .def_property_readonly("space", &CookieLayout::space);

    py::class_<SecretKey>(m, "SecretKey")
        .def_static("from_hex", &SecretKey::from_hex)
        .def_static("from_words", &SecretKey::from_words, py::arg("lo"), py::arg("hi"));

    m.def(
        "encode_cookie",
        [](const std::string& client, Port cport, const std::string& server, Port sport, CounterValue counter,
           MssIndex mss_index, const SecretKey& key, const CookieLayout& layout) {
            return encode_cookie(tuple_of(client, cport, server, sport), counter, mss_index, key, layout,
                                 MssTable::standard());
        },
        py::arg("client"), py::arg("client_port"), py::arg("server"), py::arg("server_port"), py::arg("counter"),
        py::arg("mss_index"), py::arg("key"), py::arg("layout") = CookieLayout{});

    m.def(
        "validate_cookie",
        [](Isn isn, const std::string& client, Port cport, const std::string& server, Port sport, CounterValue now,
           const SecretKey& key, const CookieLayout& layout) -> py::object {
            const auto v = validate_cookie(isn, tuple_of(client, cport, server, sport), now, key, layout,
                                           MssTable::standard(), AcceptWindow::standard());
            if (!v.valid()) return py::str(to_string(*v.rejection));
            return py::none();
        },
        "None when accepted, else the rejection reason", py::arg("isn"), py::arg("client"), py::arg("client_port"),
        py::arg("server"), py::arg("server_port"), py::arg("now"), py::arg("key"),
        py::arg("layout") = CookieLayout{});

    m.def(
        "valid_cookie_set",
        [](const std::string& client, Port cport, const std::string& server, Port sport, CounterValue now,
           const SecretKey& key, const CookieLayout& layout) {
            return valid_cookie_set(tuple_of(client, cport, server, sport), now, key, layout, MssTable::standard(),
                                    AcceptWindow::standard());
        },
        py::arg("client"), py::arg("client_port"), py::arg("server"), py::arg("server_port"), py::arg("now"),
        py::arg("key"), py::arg("layout") = CookieLayout{});

    m.def(
        "success_probability",
        [](const CookieLayout& layout) {
            const auto p = theoretical_success_probability(layout, AcceptWindow::standard(), MssTable::standard());
            return py::make_tuple(p.valid, p.space);
        },
        "(valid cookies, cookie space) for the standard window and table", py::arg("layout") = CookieLayout{});

    m.def(
        "simulate",
        [](const std::map<std::string, std::string>& settings, const std::string& config_text) {
            const auto cfg = configure(settings, config_text);
            SimResult res;
            {
                py::gil_scoped_release release;
                res = run(cfg.scenario);
            }
            py::dict out;
            out["report"] = res.report.to_json();
            out["trace"] = export_trace(res.trace);
            out["access_log"] = res.report.log_snapshot;
            out["timeline_csv"] = timeline_csv(timeline_from_report(res.report));
            return out;
        },
        py::arg("settings") = std::map<std::string, std::string>{}, py::arg("config_text") = "");

    m.def(
        "campaign",
        [](const std::map<std::string, std::string>& settings, const std::string& config_text) {
            const auto c = Campaign::from(configure(settings, config_text));
            CampaignStats stats;
            {
                py::gil_scoped_release release;
                stats = run_campaign(c);
            }
            py::dict out;
            out["stats"] = stats.to_json();
            out["csv"] = campaign_csv(stats);
            out["all_censored"] = stats.all_censored();
            return out;
        },
        py::arg("settings") = std::map<std::string, std::string>{}, py::arg("config_text") = "");

    m.def(
        "analyze",
        [](const std::string& csv, double theoretical_mean) {
            return summarize(parse_campaign_csv(csv), theoretical_mean).to_json();
        },
        py::arg("csv"), py::arg("theoretical_mean") = 0.0);

    m.def(
        "render_timeline_svg", [](const std::string& csv) { return render_timeline_svg(parse_timeline_csv(csv)); },
        py::arg("timeline_csv"));
}

#include <doctest.h>

#include <sstream>

#include "phasorsec/config_json.hpp"
#include "phasorsec/csv.hpp"
#include "phasorsec/errors.hpp"
#include "phasorsec/svg.hpp"

using namespace phasorsec;

namespace {

std::vector<ChannelSeries> small_capture() {
    SimConfig c;
    c.m = 3;
    c.duration_s = 2.0;
    c.f_nominal_hz = 60.4;
    c.noise_std_deg = 1.0;
    return generate(c);
}

}  // namespace

TEST_CASE("channel CSV round-trips bit-exactly") {
    const auto ch = small_capture();
    std::stringstream ss;
    write_channels(ss, ch, {"config_hash=abc seed=1"});
    const auto text = ss.str();
    CHECK(text.rfind("# config_hash=abc seed=1\ntime_s,channel_id,angle_deg,magnitude_pu\n", 0) == 0);
    const auto back = read_channels(ss);
    REQUIRE(back.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(back[c].channel_id == ch[c].channel_id);
        CHECK(back[c].rate_hz == 30.0);
        REQUIRE(back[c].size() == ch[c].size());
        for (std::size_t i = 0; i < ch[c].size(); ++i) {
            REQUIRE(back[c].samples[i].t == ch[c].samples[i].t);
            REQUIRE(back[c].samples[i].angle_deg == ch[c].samples[i].angle_deg);
        }
    }
}

TEST_CASE("CSV rows are sorted by channel id then time") {
    auto ch = small_capture();
    std::swap(ch[0], ch[2]);
    std::stringstream ss;
    write_channels(ss, ch);
    std::string line;
    std::getline(ss, line);
    std::getline(ss, line);
    CHECK(line.find(",632,") != std::string::npos);
}

TEST_CASE("unwrap CSV appends unwrapped_deg and roc") {
    std::vector<ChannelSeries> ch(1);
    ch[0].channel_id = "x";
    ch[0].rate_hz = 30.0;
    const double a[] = {170, 179, -175, -165};
    for (int i = 0; i < 4; ++i) ch[0].samples.push_back({Timestamp{i / 30.0}, a[i], 1.0});
    std::stringstream ss;
    write_unwrapped(ss, ch);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "time_s,channel_id,angle_deg,magnitude_pu,unwrapped_deg,roc");
    std::vector<std::string> rows;
    while (std::getline(ss, line)) rows.push_back(line);
    REQUIRE(rows.size() == 4);
    CHECK(rows[2] == "0.06666666666666667,x,-175,1,185,1");
    // the reader ignores the extra columns
    std::stringstream again;
    write_unwrapped(again, ch);
    CHECK(read_channels(again)[0].samples[3].angle_deg == -165.0);
}

TEST_CASE("malformed CSV is a format error") {
    auto parse = [](const std::string& s) {
        std::istringstream is(s);
        return read_channels(is);
    };
    CHECK_THROWS_AS(parse(""), FormatError);
    CHECK_THROWS_AS(parse("time_s,channel_id,angle_deg\n0,a,1\n"), FormatError);
    CHECK_THROWS_AS(parse("time_s,channel_id,angle_deg,magnitude_pu\n0,a,x,1\n0.5,a,1,1\n"), FormatError);
    CHECK_THROWS_AS(parse("time_s,channel_id,angle_deg,magnitude_pu\n0,a,190,1\n0.5,a,1,1\n"), FormatError);
    CHECK_THROWS_AS(parse("time_s,channel_id,angle_deg,magnitude_pu\n0,a,1,1\n"), FormatError);
    CHECK_THROWS_AS(parse("time_s,channel_id,angle_deg,magnitude_pu\n0,a,1,1\n1,a,1,1\n1.5,a,1,1\n"),
                    FormatError);
    CHECK_THROWS_AS(parse("time_s,channel_id,angle_deg,magnitude_pu\n1,a,1,1\n0,a,1,1\n"), FormatError);
    CHECK_THROWS_AS(parse("time_s,channel_id,angle_deg,magnitude_pu\n0,a,1\n"), FormatError);
    CHECK_NOTHROW(parse("# note\ntime_s,channel_id,angle_deg,magnitude_pu\r\n0,a,1,1\r\n0.5,a,2,1\r\n"));
}

TEST_CASE("experiment config parses and round-trips") {
    const auto j = Json::parse(R"({
        "seed": 42,
        "sim": {"m": 3, "duration_s": 10, "noise_std_deg": 1.5,
                "freq_wander": {"amplitude_hz": 0.01, "period_s": 120, "random_walk_hz": 0}},
        "events": [{"onset": 2.0, "shape": "ramp", "magnitude_deg": 15, "duration_s": 1,
                    "affected_channels": [{"channel": 0, "scale": 1.0}, {"channel": 2, "scale": 0.5}]}],
        "fdia": {"onset": 3.0, "attack_values": {"uniform": [0, 30]}, "affected_channels": [1]},
        "timing": {"onset": 4.0, "delay_T_s": 3},
        "detector": {"tau_perm": 0.1, "rule": "aggregate", "unwrap_baseline": "raw_window"},
        "outputs": {"svg_prefix": "run"}
    })");
    const auto c = parse_experiment(j);
    CHECK(c.seed == 42);
    CHECK(c.sim.m == 3);
    CHECK(c.sim.freq_wander.period_s == 120.0);
    REQUIRE(c.events.size() == 1);
    CHECK(c.events[0].shape == EventShape::Ramp);
    CHECK(c.events[0].affected[1].scale == 0.5);
    REQUIRE(c.fdia);
    CHECK(std::holds_alternative<UniformAttack>(c.fdia->values));
    REQUIRE(c.timing);
    CHECK(c.timing->delay_s == 3.0);
    CHECK_FALSE(c.timing->affected_channels);
    CHECK(c.detector.tau_perm == 0.1);
    CHECK(c.detector.rule == EvidenceRule::Aggregate);
    CHECK(c.detector.unwrap_baseline == UnwrapBaselineMode::RawWindow);
    CHECK(c.outputs.svg_prefix == "run");

    const auto again = parse_experiment(to_json(c));
    CHECK(to_json(again).dump() == to_json(c).dump());
    CHECK(config_hash(again) == config_hash(c));
    CHECK(config_hash(c).size() == 16);

    auto other = c;
    other.detector.tau_unwrap = 0.6;
    CHECK(config_hash(other) != config_hash(c));
}

TEST_CASE("seed fan-out is labelled and reproducible") {
    ExperimentConfig a;
    a.seed = 5;
    a.fdia = FdiaSpec{Timestamp{1.0}, UniformAttack{0, 30, 0}, {0}, 30.0};
    auto b = a;
    apply_seed_fanout(a);
    apply_seed_fanout(b);
    CHECK(a.sim.seed == b.sim.seed);
    CHECK(a.sim.seed != a.detector.seed);
    CHECK(std::get<UniformAttack>(a.fdia->values).seed != a.sim.seed);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_experiment(Json::parse(R"({"sim": {"duration_s": 0}})")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(Json::parse(R"({"sim": {"durration_s": 5}})")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(Json::parse(R"({"bogus": 1})")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(Json::parse(R"({"detector": {"tau_perm": "x"}})")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(Json::parse(R"({"detector": {"window_n": 4}})")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(Json::parse(R"({"timing": {"onset": 1}})")), ConfigError);
    CHECK_THROWS_AS(parse_experiment(Json::parse(R"({"events": [{"onset": 1, "affected_channels": [0]}]})")),
                    ConfigError);
    CHECK_THROWS_AS(load_experiment("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("classification JSON carries the evidence") {
    Classification c;
    c.verdict = Verdict::TimingAttack;
    c.window_index = 7;
    c.window_start.seconds = 23.5;
    c.evidence.e_r.errors_pct = {3.0, 2.0};
    c.evidence.e_rr.errors_pct = {3.1, 2.1};
    c.evidence.e_ru.errors_pct = {9.0, 4.0};
    c.evidence.e_rd.errors_pct = {3.0, 2.0};
    const auto j = to_json(c);
    CHECK(j["verdict"] == "TimingAttack");
    CHECK(j["window_start"] == 23.5);
    CHECK(j["e_ru"][0] == 9.0);
    CHECK(j["e_rr"].size() == 2);
}

TEST_CASE("svg chart is deterministic and embeds provenance") {
    PlotSeries s{"a", {1, 2, 3}, {4.0, 2.0, 1.0}};
    const PlotSpec spec{"Title <x>", "rank", "error", "config_hash=feed seed=3", true};
    const auto one = line_chart(spec, {s});
    CHECK(one == line_chart(spec, {s}));
    CHECK(one.find("<!-- config_hash=feed seed=3 -->") != std::string::npos);
    CHECK(one.find("Title &lt;x&gt;") != std::string::npos);
    CHECK(one.find("<polyline") != std::string::npos);
    CHECK(one.rfind("</svg>\n") == one.size() - 7);
}

TEST_CASE("baseline JSON accepts calibrate provenance") {
    const auto b = parse_baseline(Json::parse(
        R"({"e_ru": [5, 4], "gate_center": 5, "gate_spread": 1, "windows": 3, "config_hash": "00ff", "seed": 1})"));
    CHECK(b.e_ru.at(2) == 4.0);
    CHECK(b.windows == 3);
    CHECK_THROWS_AS(parse_baseline(Json::parse(R"({"e_ru": [5], "gate_center": 5, "gate_spread": 1, "x": 0})")),
                    ConfigError);
}

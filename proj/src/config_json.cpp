#include "phasorsec/config_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "phasorsec/errors.hpp"
#include "phasorsec/seed.hpp"

namespace phasorsec {

namespace {

void expect_object(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

void allow_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
    expect_object(j, where);
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

double get_num(const Json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

std::size_t get_count(const Json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw ConfigError(where + ": expected a non-negative integer");
    return j.get<std::size_t>();
}

std::uint64_t get_u64(const Json& j, const std::string& where) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ConfigError(where + ": expected an unsigned integer");
    return j.get<std::uint64_t>();
}

std::string get_str(const Json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

bool get_bool(const Json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError(where + ": expected a boolean");
    return j.get<bool>();
}

std::vector<double> get_nums(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : j) out.push_back(get_num(x, where));
    return out;
}

std::vector<std::size_t> get_indices(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of channel indices");
    std::vector<std::size_t> out;
    for (const auto& x : j) out.push_back(get_count(x, where));
    return out;
}

const char* shape_name(EventShape s) {
    switch (s) {
        case EventShape::Step: return "step";
        case EventShape::Ramp: return "ramp";
        case EventShape::Oscillation: return "oscillation";
    }
    return "?";
}

Json profile_json(const RankErrorProfile& p) { return Json(p.errors_pct); }

}  // namespace

SimConfig parse_sim(const Json& j) {
    allow_keys(j, "sim", {"m", "rate_hz", "duration_s", "seed", "f_nominal_hz", "freq_wander",
                          "channel_offsets_deg", "noise_std_deg", "channel_ids", "start_s"});
    SimConfig c;
    if (j.contains("m")) c.m = get_count(j["m"], "sim.m");
    if (j.contains("rate_hz")) c.rate_hz = get_num(j["rate_hz"], "sim.rate_hz");
    if (j.contains("duration_s")) c.duration_s = get_num(j["duration_s"], "sim.duration_s");
    if (j.contains("seed")) c.seed = get_u64(j["seed"], "sim.seed");
    if (j.contains("f_nominal_hz")) c.f_nominal_hz = get_num(j["f_nominal_hz"], "sim.f_nominal_hz");
    if (j.contains("freq_wander")) {
        const auto& w = j["freq_wander"];
        allow_keys(w, "sim.freq_wander", {"amplitude_hz", "period_s", "random_walk_hz"});
        if (w.contains("amplitude_hz"))
            c.freq_wander.amplitude_hz = get_num(w["amplitude_hz"], "sim.freq_wander.amplitude_hz");
        if (w.contains("period_s"))
            c.freq_wander.period_s = get_num(w["period_s"], "sim.freq_wander.period_s");
        if (w.contains("random_walk_hz"))
            c.freq_wander.random_walk_hz =
                get_num(w["random_walk_hz"], "sim.freq_wander.random_walk_hz");
    }
    if (j.contains("channel_offsets_deg"))
        c.channel_offsets_deg = get_nums(j["channel_offsets_deg"], "sim.channel_offsets_deg");
    if (j.contains("noise_std_deg")) c.noise_std_deg = get_num(j["noise_std_deg"], "sim.noise_std_deg");
    if (j.contains("channel_ids")) {
        if (!j["channel_ids"].is_array()) throw ConfigError("sim.channel_ids: expected an array");
        for (const auto& x : j["channel_ids"]) c.channel_ids.push_back(get_str(x, "sim.channel_ids"));
    }
    if (j.contains("start_s")) c.start_s = get_num(j["start_s"], "sim.start_s");
    validate(c);
    return c;
}

EventSpec parse_event(const Json& j) {
    allow_keys(j, "event", {"onset", "shape", "magnitude_deg", "affected_channels", "duration_s",
                            "frequency_hz"});
    EventSpec e;
    if (!j.contains("onset")) throw ConfigError("event: missing onset");
    e.onset.seconds = get_num(j["onset"], "event.onset");
    if (j.contains("shape")) {
        const auto s = get_str(j["shape"], "event.shape");
        if (s == "step") e.shape = EventShape::Step;
        else if (s == "ramp") e.shape = EventShape::Ramp;
        else if (s == "oscillation") e.shape = EventShape::Oscillation;
        else throw ConfigError("event.shape: expected step, ramp or oscillation");
    }
    if (j.contains("magnitude_deg")) e.magnitude_deg = get_num(j["magnitude_deg"], "event.magnitude_deg");
    if (j.contains("duration_s")) e.duration_s = get_num(j["duration_s"], "event.duration_s");
    if (j.contains("frequency_hz")) e.frequency_hz = get_num(j["frequency_hz"], "event.frequency_hz");
    if (!j.contains("affected_channels") || !j["affected_channels"].is_array())
        throw ConfigError("event.affected_channels: expected an array");
    for (const auto& a : j["affected_channels"]) {
        ChannelScale cs;
        if (a.is_number_integer()) {
            cs.channel = get_count(a, "event.affected_channels");
        } else {
            allow_keys(a, "event.affected_channels[]", {"channel", "scale"});
            if (!a.contains("channel")) throw ConfigError("event.affected_channels[]: missing channel");
            cs.channel = get_count(a["channel"], "event.affected_channels[].channel");
            if (a.contains("scale")) cs.scale = get_num(a["scale"], "event.affected_channels[].scale");
        }
        e.affected.push_back(cs);
    }
    if (e.affected.size() < 2) throw ConfigError("event: needs at least two affected channels");
    return e;
}

FdiaSpec parse_fdia(const Json& j) {
    allow_keys(j, "fdia", {"onset", "attack_values", "affected_channels", "max_abs_deg"});
    FdiaSpec f;
    if (!j.contains("onset")) throw ConfigError("fdia: missing onset");
    f.onset.seconds = get_num(j["onset"], "fdia.onset");
    if (!j.contains("attack_values")) throw ConfigError("fdia: missing attack_values");
    const auto& v = j["attack_values"];
    if (v.is_number()) {
        f.values = v.get<double>();
    } else if (v.is_array()) {
        f.values = get_nums(v, "fdia.attack_values");
    } else {
        allow_keys(v, "fdia.attack_values", {"uniform"});
        const auto lim = get_nums(v.at("uniform"), "fdia.attack_values.uniform");
        if (lim.size() != 2) throw ConfigError("fdia.attack_values.uniform: expected [lo, hi]");
        f.values = UniformAttack{lim[0], lim[1], 0};
    }
    if (!j.contains("affected_channels")) throw ConfigError("fdia: missing affected_channels");
    f.affected_channels = get_indices(j["affected_channels"], "fdia.affected_channels");
    if (f.affected_channels.empty()) throw ConfigError("fdia.affected_channels is empty");
    if (j.contains("max_abs_deg")) f.max_abs_deg = get_num(j["max_abs_deg"], "fdia.max_abs_deg");
    return f;
}

TimingSpec parse_timing(const Json& j) {
    allow_keys(j, "timing", {"onset", "delay_T_s", "affected_channels"});
    TimingSpec t;
    if (!j.contains("onset")) throw ConfigError("timing: missing onset");
    t.onset.seconds = get_num(j["onset"], "timing.onset");
    if (!j.contains("delay_T_s")) throw ConfigError("timing: missing delay_T_s");
    t.delay_s = get_num(j["delay_T_s"], "timing.delay_T_s");
    if (!(t.delay_s > 0.0)) throw ConfigError("timing.delay_T_s must be > 0");
    if (j.contains("affected_channels"))
        t.affected_channels = get_indices(j["affected_channels"], "timing.affected_channels");
    return t;
}

DetectorConfig parse_detector(const Json& j) {
    allow_keys(j, "detector", {"window_n", "L", "r_star", "r_perm", "tau_perm", "tau_unwrap",
                               "tau_gate", "K_perm", "seed", "profile_rank", "stride", "gate",
                               "unwrap_baseline", "permutation_basis", "rule"});
    DetectorConfig d;
    if (j.contains("window_n")) d.window_n = get_count(j["window_n"], "detector.window_n");
    if (j.contains("L") && !j["L"].is_null()) d.L = get_count(j["L"], "detector.L");
    if (j.contains("r_star")) d.r_star = get_count(j["r_star"], "detector.r_star");
    if (j.contains("r_perm")) d.r_perm = get_count(j["r_perm"], "detector.r_perm");
    if (j.contains("tau_perm")) d.tau_perm = get_num(j["tau_perm"], "detector.tau_perm");
    if (j.contains("tau_unwrap")) d.tau_unwrap = get_num(j["tau_unwrap"], "detector.tau_unwrap");
    if (j.contains("tau_gate")) d.tau_gate = get_num(j["tau_gate"], "detector.tau_gate");
    if (j.contains("K_perm")) d.K_perm = get_count(j["K_perm"], "detector.K_perm");
    if (j.contains("seed")) d.seed = get_u64(j["seed"], "detector.seed");
    if (j.contains("profile_rank")) d.profile_rank = get_count(j["profile_rank"], "detector.profile_rank");
    if (j.contains("stride")) d.stride = get_count(j["stride"], "detector.stride");
    if (j.contains("gate")) d.gate = get_bool(j["gate"], "detector.gate");
    if (j.contains("unwrap_baseline")) {
        const auto s = get_str(j["unwrap_baseline"], "detector.unwrap_baseline");
        if (s == "clean_reference") d.unwrap_baseline = UnwrapBaselineMode::CleanReference;
        else if (s == "raw_window") d.unwrap_baseline = UnwrapBaselineMode::RawWindow;
        else throw ConfigError("detector.unwrap_baseline: expected clean_reference or raw_window");
    }
    if (j.contains("permutation_basis")) {
        const auto s = get_str(j["permutation_basis"], "detector.permutation_basis");
        if (s == "detrended") d.permutation_basis = PermutationBasis::Detrended;
        else if (s == "raw") d.permutation_basis = PermutationBasis::Raw;
        else throw ConfigError("detector.permutation_basis: expected detrended or raw");
    }
    if (j.contains("rule")) {
        const auto s = get_str(j["rule"], "detector.rule");
        if (s == "single_rank") d.rule = EvidenceRule::SingleRank;
        else if (s == "aggregate") d.rule = EvidenceRule::Aggregate;
        else throw ConfigError("detector.rule: expected single_rank or aggregate");
    }
    validate(d);
    return d;
}

Baseline parse_baseline(const Json& j) {
    // config_hash and seed are provenance written by `calibrate`
    allow_keys(j, "baseline", {"e_ru", "gate_center", "gate_spread", "windows", "config_hash", "seed"});
    Baseline b;
    b.e_ru.errors_pct = get_nums(j.at("e_ru"), "baseline.e_ru");
    b.gate_center = get_num(j.at("gate_center"), "baseline.gate_center");
    b.gate_spread = get_num(j.at("gate_spread"), "baseline.gate_spread");
    if (j.contains("windows")) b.windows = get_count(j["windows"], "baseline.windows");
    return b;
}

ExperimentConfig parse_experiment(const Json& j) {
    allow_keys(j, "config", {"seed", "sim", "events", "fdia", "timing", "detector",
                             "reference_runs", "outputs"});
    ExperimentConfig c;
    if (j.contains("sim")) c.sim = parse_sim(j["sim"]);
    if (j.contains("seed")) c.seed = get_u64(j["seed"], "seed");
    else if (j.contains("sim") && j["sim"].contains("seed")) c.seed = c.sim.seed;
    if (j.contains("events")) {
        if (!j["events"].is_array()) throw ConfigError("events: expected an array");
        for (const auto& e : j["events"]) c.events.push_back(parse_event(e));
    }
    if (j.contains("fdia") && !j["fdia"].is_null()) c.fdia = parse_fdia(j["fdia"]);
    if (j.contains("timing") && !j["timing"].is_null()) c.timing = parse_timing(j["timing"]);
    if (j.contains("detector")) c.detector = parse_detector(j["detector"]);
    if (j.contains("reference_runs")) c.reference_runs = get_count(j["reference_runs"], "reference_runs");
    if (c.reference_runs < 1) throw ConfigError("reference_runs must be >= 1");
    if (j.contains("outputs")) {
        const auto& o = j["outputs"];
        allow_keys(o, "outputs", {"channels_csv", "verdicts_jsonl", "svg_prefix"});
        if (o.contains("channels_csv")) c.outputs.channels_csv = get_str(o["channels_csv"], "outputs.channels_csv");
        if (o.contains("verdicts_jsonl")) c.outputs.verdicts_jsonl = get_str(o["verdicts_jsonl"], "outputs.verdicts_jsonl");
        if (o.contains("svg_prefix")) c.outputs.svg_prefix = get_str(o["svg_prefix"], "outputs.svg_prefix");
    }
    return c;
}

Json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config " + path);
    try {
        return Json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

ExperimentConfig load_experiment(const std::string& path) {
    try {
        return parse_experiment(load_json(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

Json to_json(const SimConfig& c) {
    Json j;
    j["m"] = c.m;
    j["rate_hz"] = c.rate_hz;
    j["duration_s"] = c.duration_s;
    j["seed"] = c.seed;
    j["f_nominal_hz"] = c.f_nominal_hz;
    j["freq_wander"] = {{"amplitude_hz", c.freq_wander.amplitude_hz},
                        {"period_s", c.freq_wander.period_s},
                        {"random_walk_hz", c.freq_wander.random_walk_hz}};
    j["channel_offsets_deg"] = c.channel_offsets_deg;
    j["noise_std_deg"] = c.noise_std_deg;
    j["channel_ids"] = c.channel_ids;
    j["start_s"] = c.start_s;
    return j;
}

Json to_json(const EventSpec& e) {
    Json j;
    j["onset"] = e.onset.seconds;
    j["shape"] = shape_name(e.shape);
    j["magnitude_deg"] = e.magnitude_deg;
    Json a = Json::array();
    for (const auto& cs : e.affected) a.push_back({{"channel", cs.channel}, {"scale", cs.scale}});
    j["affected_channels"] = a;
    j["duration_s"] = e.duration_s;
    j["frequency_hz"] = e.frequency_hz;
    return j;
}

Json to_json(const FdiaSpec& f) {
    Json j;
    j["onset"] = f.onset.seconds;
    if (const auto* u = std::get_if<UniformAttack>(&f.values))
        j["attack_values"] = {{"uniform", {u->lo, u->hi}}};
    else if (const auto* a = std::get_if<double>(&f.values))
        j["attack_values"] = *a;
    else
        j["attack_values"] = std::get<std::vector<double>>(f.values);
    j["affected_channels"] = f.affected_channels;
    j["max_abs_deg"] = f.max_abs_deg;
    return j;
}

Json to_json(const TimingSpec& t) {
    Json j;
    j["onset"] = t.onset.seconds;
    j["delay_T_s"] = t.delay_s;
    if (t.affected_channels) j["affected_channels"] = *t.affected_channels;
    return j;
}

Json to_json(const DetectorConfig& d) {
    Json j;
    j["window_n"] = d.window_n;
    j["L"] = d.L ? Json(*d.L) : Json(nullptr);
    j["r_star"] = d.r_star;
    j["r_perm"] = d.r_perm;
    j["tau_perm"] = d.tau_perm;
    j["tau_unwrap"] = d.tau_unwrap;
    j["tau_gate"] = d.tau_gate;
    j["K_perm"] = d.K_perm;
    j["seed"] = d.seed;
    j["profile_rank"] = d.profile_rank;
    j["stride"] = d.stride;
    j["gate"] = d.gate;
    j["unwrap_baseline"] =
        d.unwrap_baseline == UnwrapBaselineMode::CleanReference ? "clean_reference" : "raw_window";
    j["permutation_basis"] =
        d.permutation_basis == PermutationBasis::Detrended ? "detrended" : "raw";
    j["rule"] = d.rule == EvidenceRule::SingleRank ? "single_rank" : "aggregate";
    return j;
}

Json to_json(const Baseline& b) {
    Json j;
    j["e_ru"] = b.e_ru.errors_pct;
    j["gate_center"] = b.gate_center;
    j["gate_spread"] = b.gate_spread;
    j["windows"] = b.windows;
    return j;
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["seed"] = c.seed;
    j["sim"] = to_json(c.sim);
    j["events"] = Json::array();
    for (const auto& e : c.events) j["events"].push_back(to_json(e));
    j["fdia"] = c.fdia ? to_json(*c.fdia) : Json(nullptr);
    j["timing"] = c.timing ? to_json(*c.timing) : Json(nullptr);
    j["detector"] = to_json(c.detector);
    j["reference_runs"] = c.reference_runs;
    j["outputs"] = {{"channels_csv", c.outputs.channels_csv},
                    {"verdicts_jsonl", c.outputs.verdicts_jsonl},
                    {"svg_prefix", c.outputs.svg_prefix}};
    return j;
}

void apply_seed_fanout(ExperimentConfig& cfg) {
    cfg.sim.seed = derive_seed(cfg.seed, "sim");
    cfg.detector.seed = derive_seed(cfg.seed, "permutation");
    if (cfg.fdia)
        if (auto* u = std::get_if<UniformAttack>(&cfg.fdia->values)) u->seed = derive_seed(cfg.seed, "fdia");
}

std::string config_hash(const Json& j) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

std::string config_hash(const ExperimentConfig& cfg) { return config_hash(to_json(cfg)); }

Json to_json(const Classification& c) {
    Json j;
    j["window_index"] = c.window_index;
    j["window_start"] = c.window_start.seconds;
    j["verdict"] = std::string(to_string(c.verdict));
    j["gate_fired"] = c.gate_fired;
    j["e_r"] = profile_json(c.evidence.e_r);
    j["e_rr"] = profile_json(c.evidence.e_rr);
    j["e_ru"] = profile_json(c.evidence.e_ru);
    j["e_rd"] = profile_json(c.evidence.e_rd);
    return j;
}

}  // namespace phasorsec

#include "phasorsec/experiment.hpp"

#include <cmath>
#include <fstream>

#include "phasorsec/csv.hpp"
#include "phasorsec/errors.hpp"
#include "phasorsec/seed.hpp"
#include "phasorsec/svg.hpp"
#include "phasorsec/unwrap.hpp"

namespace phasorsec {

namespace fs = std::filesystem;

namespace {

fs::path with_suffix(const std::string& name, const std::string& suffix) {
    if (suffix.empty()) return name;
    const fs::path p(name);
    return p.stem().string() + "_" + suffix + p.extension().string();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
}

std::size_t window_of(const std::vector<ChannelSeries>& ch, Timestamp t, std::size_t n) {
    const double pos = (t.seconds - ch[0].samples.front().t.seconds) * ch[0].rate_hz;
    const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(pos + 1e-6)));
    return k / n;
}

std::vector<double> window_slice(const ChannelSeries& ch, std::size_t w, std::size_t n) {
    std::vector<double> v;
    for (std::size_t i = w * n; i < std::min((w + 1) * n, ch.samples.size()); ++i)
        v.push_back(ch.samples[i].angle_deg);
    return v;
}

PlotSeries profile_series(const std::string& label, const RankErrorProfile& p) {
    PlotSeries s;
    s.label = label;
    for (std::size_t r = 1; r <= p.r_max(); ++r) {
        s.x.push_back(static_cast<double>(r));
        s.y.push_back(p.at(r));
    }
    return s;
}

}  // namespace

std::vector<ChannelSeries> apply_events(std::vector<ChannelSeries> channels,
                                        const std::vector<EventSpec>& events) {
    for (const auto& e : events) channels = inject_event(std::move(channels), e);
    return channels;
}

std::vector<ChannelSeries> simulate(const ExperimentConfig& cfg) {
    return apply_events(generate(cfg.sim), cfg.events);
}

std::vector<std::vector<ChannelSeries>> reference_runs(const ExperimentConfig& cfg) {
    std::vector<std::vector<ChannelSeries>> runs;
    for (std::size_t i = 0; i < cfg.reference_runs; ++i) {
        SimConfig s = cfg.sim;
        s.seed = derive_seed(cfg.seed, "reference", i);
        runs.push_back(generate(s));
    }
    return runs;
}

int exit_code_for(const std::vector<Classification>& verdicts) {
    bool attack = false, event = false;
    for (const auto& c : verdicts) {
        attack |= c.verdict == Verdict::FDIA || c.verdict == Verdict::TimingAttack;
        event |= c.verdict == Verdict::Event;
    }
    return attack ? kExitAttack : event ? kExitEvent : kExitNormal;
}

std::string jsonl_line(const Classification& c, const std::string& run,
                       const std::string& config_hash, std::uint64_t seed) {
    Json j = to_json(c);
    j["run"] = run;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    return j.dump();
}

ExperimentResult run_experiment(ExperimentConfig cfg, const fs::path& out_dir) {
    apply_seed_fanout(cfg);
    validate(cfg.sim);
    validate(cfg.detector);
    ExperimentResult res;
    res.config_hash = config_hash(cfg);
    fs::create_directories(out_dir);
    const std::string prov = "config_hash=" + res.config_hash + " seed=" + std::to_string(cfg.seed);

    const auto clean = simulate(cfg);
    const auto refs = reference_runs(cfg);
    const auto baselines = calibrate_per_window(refs, cfg.detector);

    const bool both = cfg.fdia && cfg.timing;
    if (cfg.timing) {
        RunOutput r{"timing", both ? "timing" : "", inject_timing(clean, *cfg.timing), {}};
        res.runs.push_back(std::move(r));
    }
    if (cfg.fdia) {
        RunOutput r{"fdia", both ? "fdia" : "", inject_fdia(clean, *cfg.fdia), {}};
        res.runs.push_back(std::move(r));
    }
    if (res.runs.empty()) res.runs.push_back(RunOutput{"clean", "", clean, {}});

    {
        const fs::path p = out_dir / cfg.outputs.channels_csv;
        write_channels_file(p.string(), clean, {prov + " run=clean"});
        res.files.push_back(p);
    }
    std::vector<Classification> all;
    for (auto& r : res.runs) {
        r.verdicts = classify_stream(r.channels, cfg.detector, baselines);
        all.insert(all.end(), r.verdicts.begin(), r.verdicts.end());
        if (r.label != "clean") {
            const fs::path p = out_dir / with_suffix("attacked.csv", r.suffix);
            write_channels_file(p.string(), r.channels, {prov + " run=" + r.label});
            res.files.push_back(p);
        }
        std::string body;
        for (const auto& c : r.verdicts) body += jsonl_line(c, r.label, res.config_hash, cfg.seed) + "\n";
        const fs::path p = out_dir / with_suffix(cfg.outputs.verdicts_jsonl, r.suffix);
        write_text(p, body);
        res.files.push_back(p);
    }
    res.exit_code = exit_code_for(all);

    // figures: the window holding the first attack onset on its first attacked channel
    const std::size_t n = cfg.detector.window_n;
    std::size_t w = 0, channel = 0;
    if (cfg.timing) {
        w = window_of(clean, cfg.timing->onset, n);
        channel = timing_channels(clean, *cfg.timing).front();
    } else if (cfg.fdia) {
        w = window_of(clean, cfg.fdia->onset, n);
        channel = cfg.fdia->affected_channels.front();
    }
    for (const auto& r : res.runs) {
        if (r.verdicts.empty()) throw SpecError("series shorter than one detector window");
        w = std::min(w, r.verdicts.size() - 1);
    }

    PlotSeries normal_series;
    std::vector<PlotSeries> angle_series;
    auto unwrapped_series = [&](const std::string& label, const std::vector<ChannelSeries>& ch) {
        const auto u = unwrap_series(window_slice(ch[channel], w, n));
        PlotSeries s;
        s.label = label;
        for (std::size_t i = 0; i < u.unwrapped_deg.size(); ++i) {
            s.x.push_back(ch[channel].samples[w * n + i].t.seconds);
            s.y.push_back(u.unwrapped_deg[i]);
        }
        return s;
    };
    angle_series.push_back(unwrapped_series("normal", clean));
    for (const auto& r : res.runs)
        if (r.label != "clean") angle_series.push_back(unwrapped_series(r.label, r.channels));

    const Timestamp start = clean[0].samples[w * n].t;
    const auto ev_clean = compute_evidence(assemble_matrix(clean, start, n), cfg.detector, w);
    std::vector<PlotSeries> raw{profile_series("normal", ev_clean.e_r)};
    std::vector<PlotSeries> unw{profile_series("normal", ev_clean.e_ru)};
    for (const auto& r : res.runs) {
        if (r.label == "clean") continue;
        const auto& ev = r.verdicts.at(w).evidence;
        raw.push_back(profile_series(r.label, ev.e_r));
        unw.push_back(profile_series(r.label, ev.e_ru));
    }
    const std::string wtag = " (window " + std::to_string(w) + ", channel " + clean[channel].channel_id + ")";
    const std::vector<std::pair<std::string, std::string>> figs = {
        {"unwrapped_angle.svg",
         line_chart({"Unwrapped phase angle" + wtag, "time (s)", "angle (deg)", prov, false}, angle_series)},
        {"profile_raw.svg",
         line_chart({"Low rank approximation error, raw angles", "rank r", "error (%)", prov, true}, raw)},
        {"profile_unwrapped.svg",
         line_chart({"Low rank approximation error, unwrapped angles", "rank r", "error (%)", prov, true}, unw)},
    };
    for (const auto& [name, svg] : figs) {
        const fs::path p = out_dir / (cfg.outputs.svg_prefix + "_" + name);
        write_text(p, svg);
        res.files.push_back(p);
    }
    return res;
}

}  // namespace phasorsec

// phasorsec command line: simulate, inject, unwrap, profile, detect, run, report.
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phasorsec/csv.hpp"
#include "phasorsec/errors.hpp"
#include "phasorsec/experiment.hpp"
#include "phasorsec/svg.hpp"
#include "phasorsec/unwrap.hpp"

namespace fs = std::filesystem;
using namespace phasorsec;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
};

ExperimentConfig load(const Globals& g) {
    ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_experiment(g.config);
    if (g.seed) cfg.seed = *g.seed;
    apply_seed_fanout(cfg);
    return cfg;
}

std::string provenance(const ExperimentConfig& cfg) {
    return "config_hash=" + config_hash(cfg) + " seed=" + std::to_string(cfg.seed);
}

// file under --out, or stdout when --out is not given
class Sink {
public:
    Sink(const Globals& g, const std::string& name) {
        if (g.out.empty()) return;
        fs::create_directories(g.out);
        path_ = (fs::path(g.out) / name).string();
        file_.open(path_, std::ios::binary);
        if (!file_) throw Error("cannot write " + path_);
    }
    std::ostream& stream() { return path_.empty() ? std::cout : file_; }
    ~Sink() {
        if (!path_.empty()) std::cerr << "wrote " << path_ << '\n';
    }

private:
    std::string path_;
    std::ofstream file_;
};

std::vector<std::string> suffixed(const std::string& name, bool two, const std::string& label) {
    if (!two) return {name};
    const fs::path p(name);
    return {p.stem().string() + "_" + label + p.extension().string()};
}

int cmd_simulate(const Globals& g) {
    const auto cfg = load(g);
    const auto ch = simulate(cfg);
    Sink out(g, cfg.outputs.channels_csv);
    write_channels(out.stream(), ch, {provenance(cfg) + " run=clean"});
    return kExitNormal;
}

int cmd_inject(const Globals& g, const std::string& input) {
    const auto cfg = load(g);
    if (!cfg.fdia && !cfg.timing) throw ConfigError("inject: config has neither fdia nor timing");
    const auto ch = read_channels_file(input);
    const bool two = cfg.fdia && cfg.timing;
    if (cfg.timing) {
        Sink out(g, suffixed("attacked.csv", two, "timing").front());
        write_channels(out.stream(), inject_timing(ch, *cfg.timing), {provenance(cfg) + " run=timing"});
    }
    if (cfg.fdia) {
        Sink out(g, suffixed("attacked.csv", two, "fdia").front());
        write_channels(out.stream(), inject_fdia(ch, *cfg.fdia), {provenance(cfg) + " run=fdia"});
    }
    return kExitNormal;
}

int cmd_unwrap(const Globals& g, const std::string& input) {
    const auto cfg = load(g);
    const auto ch = read_channels_file(input);
    Sink out(g, "unwrapped.csv");
    write_unwrapped(out.stream(), ch, {provenance(cfg)});
    return kExitNormal;
}

struct ProfileArgs {
    std::string input;
    std::optional<double> start;
    std::optional<std::size_t> n, L, r_max;
    bool unwrapped = false;
    std::string svg;
};

int cmd_profile(const Globals& g, const ProfileArgs& a) {
    const auto cfg = load(g);
    const auto ch = read_channels_file(a.input);
    const std::size_t n = a.n.value_or(cfg.detector.window_n);
    const Timestamp start{a.start.value_or(ch[0].samples.front().t.seconds)};
    const auto Y = assemble_matrix(ch, start, n);
    const Matrix M = a.unwrapped ? unwrap_matrix(Y) : Y.values();
    const auto H = build_hankel(M, a.L ? a.L : cfg.detector.L);
    const auto p = error_profile(H.values, a.r_max);

    Sink out(g, g.format == "jsonl" ? "profile.jsonl" : "profile.csv");
    auto& os = out.stream();
    if (g.format == "jsonl") {
        for (std::size_t r = 1; r <= p.r_max(); ++r)
            os << Json{{"rank", r}, {"error_pct", p.at(r)}, {"config_hash", config_hash(cfg)},
                       {"seed", cfg.seed}}.dump()
               << '\n';
    } else {
        os << "# " << provenance(cfg) << '\n' << "rank,error_pct\n";
        for (std::size_t r = 1; r <= p.r_max(); ++r) os << r << ',' << format_double(p.at(r)) << '\n';
    }
    if (!a.svg.empty()) {
        PlotSeries s;
        s.label = a.unwrapped ? "unwrapped" : "raw";
        for (std::size_t r = 1; r <= p.r_max(); ++r) {
            s.x.push_back(static_cast<double>(r));
            s.y.push_back(p.at(r));
        }
        std::ofstream f(a.svg, std::ios::binary);
        if (!f) throw Error("cannot write " + a.svg);
        f << line_chart({"Low rank approximation error", "rank r", "error (%)", provenance(cfg), true}, {s});
    }
    return kExitNormal;
}

struct DetectArgs {
    std::string input;
    std::vector<std::string> references;
    std::string baseline;
};

int cmd_detect(const Globals& g, const DetectArgs& a) {
    const auto cfg = load(g);
    const auto ch = read_channels_file(a.input);
    std::vector<Baseline> baselines;
    if (a.references.size() > 1) {
        std::vector<std::vector<ChannelSeries>> runs;
        for (const auto& r : a.references) runs.push_back(read_channels_file(r));
        baselines = calibrate_per_window(runs, cfg.detector);
    } else if (a.references.size() == 1) {
        baselines.push_back(calibrate_baseline(read_channels_file(a.references[0]), cfg.detector));
    } else if (!a.baseline.empty()) {
        baselines.push_back(parse_baseline(load_json(a.baseline)));
    } else if (cfg.detector.unwrap_baseline == UnwrapBaselineMode::CleanReference) {
        throw ConfigError(
            "detect needs a clean baseline: pass --reference or --baseline, or set "
            "detector.unwrap_baseline to raw_window");
    }
    const auto verdicts = classify_stream(ch, cfg.detector, baselines);
    const auto hash = config_hash(cfg);
    Sink out(g, g.format == "csv" ? "verdicts.csv" : "verdicts.jsonl");
    auto& os = out.stream();
    if (g.format == "csv") {
        os << "# " << provenance(cfg) << '\n'
           << "window_index,window_start,verdict,e_r1,e_rr" << cfg.detector.r_perm << ",e_rd"
           << cfg.detector.r_perm << ",e_ru1\n";
        for (const auto& c : verdicts)
            os << c.window_index << ',' << format_double(c.window_start.seconds) << ','
               << to_string(c.verdict) << ',' << format_double(c.evidence.e_r.at(1)) << ','
               << format_double(c.evidence.e_rr.at(cfg.detector.r_perm)) << ','
               << format_double(c.evidence.e_rd.at(cfg.detector.r_perm)) << ','
               << format_double(c.evidence.e_ru.at(1)) << '\n';
    } else {
        for (const auto& c : verdicts) os << jsonl_line(c, "detect", hash, cfg.seed) << '\n';
    }
    return exit_code_for(verdicts);
}

int cmd_calibrate(const Globals& g, const std::string& input) {
    const auto cfg = load(g);
    const auto b = calibrate_baseline(read_channels_file(input), cfg.detector);
    Sink out(g, "baseline.json");
    Json j = to_json(b);
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    out.stream() << j.dump(2) << '\n';
    return kExitNormal;
}

int cmd_run(const Globals& g) {
    if (g.config.empty()) throw ConfigError("run needs --config");
    ExperimentConfig cfg = load_experiment(g.config);
    if (g.seed) cfg.seed = *g.seed;
    const auto res = run_experiment(cfg, g.out.empty() ? fs::path("out") : fs::path(g.out));
    for (const auto& f : res.files) std::cerr << "wrote " << f.string() << '\n';
    for (const auto& r : res.runs) {
        std::map<std::string, int> counts;
        for (const auto& c : r.verdicts) ++counts[std::string(to_string(c.verdict))];
        std::cout << r.label << ':';
        for (const auto& [k, v] : counts) std::cout << ' ' << k << '=' << v;
        std::cout << '\n';
    }
    return res.exit_code;
}

int cmd_report(const Globals& g, const std::vector<std::string>& inputs) {
    std::vector<Classification> all;
    std::map<std::string, std::map<std::string, int>> counts;
    std::map<std::string, PlotSeries> eru;
    std::ostringstream flagged;
    for (const auto& path : inputs) {
        std::ifstream f(path);
        if (!f) throw FormatError("cannot open " + path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty()) continue;
            Json j;
            try {
                j = Json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
            if (!j.contains("verdict") || !j.contains("window_index"))
                throw FormatError(path + ":" + std::to_string(lineno) + ": not a verdict record");
            const std::string run = j.value("run", path);
            const std::string verdict = j["verdict"].get<std::string>();
            Classification c;
            c.verdict = verdict_from_string(verdict);
            all.push_back(c);
            ++counts[run][verdict];
            if (j.contains("e_ru") && !j["e_ru"].empty()) {
                auto& s = eru[run];
                s.label = run;
                s.x.push_back(j["window_index"].get<double>());
                s.y.push_back(j["e_ru"][0].get<double>());
            }
            if (verdict != "Normal")
                flagged << "| " << run << " | " << j["window_index"].get<std::size_t>() << " | "
                        << format_double(j.value("window_start", 0.0)) << " | " << verdict << " |\n";
        }
    }
    Sink out(g, "report.md");
    auto& os = out.stream();
    os << "# Verdict summary\n\n| run | Normal | Event | FDIA | TimingAttack |\n|---|---|---|---|---|\n";
    for (auto& [run, c] : counts)
        os << "| " << run << " | " << c["Normal"] << " | " << c["Event"] << " | " << c["FDIA"] << " | "
           << c["TimingAttack"] << " |\n";
    const auto f = flagged.str();
    if (!f.empty()) os << "\n## Flagged windows\n\n| run | window | start (s) | verdict |\n|---|---|---|---|\n" << f;
    if (!g.out.empty() && !eru.empty()) {
        std::vector<PlotSeries> series;
        for (auto& [k, s] : eru) series.push_back(s);
        std::ofstream svg(fs::path(g.out) / "report_e_ru.svg", std::ios::binary);
        svg << line_chart({"Unwrapped rank-1 error per window", "window", "e_ru(1) (%)", "", false}, series);
    }
    return exit_code_for(all);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Timing-attack detection on PMU phase-angle streams"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "JSON experiment config");
    app.add_option("--seed", g.seed, "root seed (overrides the config)");
    app.add_option("--out", g.out, "output directory (default: stdout or ./out for run)");
    app.add_option("--format", g.format, "tabular output format")->check(CLI::IsMember({"csv", "jsonl"}));
    app.fallthrough();

    std::string input;
    ProfileArgs pa;
    DetectArgs da;
    std::vector<std::string> report_inputs;

    auto* sim = app.add_subcommand("simulate", "write simulated channel CSV");
    auto* inj = app.add_subcommand("inject", "apply the configured fdia/timing attack to a CSV");
    inj->add_option("--input,-i", input, "channel CSV")->required();
    auto* unw = app.add_subcommand("unwrap", "add unwrapped_deg and roc columns");
    unw->add_option("--input,-i", input, "channel CSV")->required();
    auto* prof = app.add_subcommand("profile", "rank-error profile of one window");
    prof->add_option("--input,-i", pa.input, "channel CSV")->required();
    prof->add_option("--start", pa.start, "window start time (s)");
    prof->add_option("--n", pa.n, "window length (default detector.window_n)");
    prof->add_option("--L", pa.L, "Hankel rows per channel");
    prof->add_option("--rank-max", pa.r_max, "highest rank");
    prof->add_flag("--unwrapped", pa.unwrapped, "profile the unwrapped angles");
    prof->add_option("--svg", pa.svg, "also write an SVG chart");
    auto* det = app.add_subcommand("detect", "classify every window of a CSV");
    det->add_option("--input,-i", da.input, "channel CSV")->required();
    det->add_option("--reference", da.references, "attack-free capture(s) for the baseline");
    det->add_option("--baseline", da.baseline, "baseline JSON from `calibrate`");
    auto* cal = app.add_subcommand("calibrate", "baseline JSON from an attack-free capture");
    cal->add_option("--input,-i", input, "channel CSV")->required();
    auto* run = app.add_subcommand("run", "simulate, inject, detect and plot");
    auto* rep = app.add_subcommand("report", "summarize verdict JSONL files");
    rep->add_option("--input,-i", report_inputs, "verdict JSONL")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(g);
        if (*inj) return cmd_inject(g, input);
        if (*unw) return cmd_unwrap(g, input);
        if (*prof) return cmd_profile(g, pa);
        if (*det) return cmd_detect(g, da);
        if (*cal) return cmd_calibrate(g, input);
        if (*run) return cmd_run(g);
        if (*rep) return cmd_report(g, report_inputs);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const FormatError& e) {
        std::cerr << "data format error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

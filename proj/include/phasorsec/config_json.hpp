#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phasorsec/attack.hpp"
#include "phasorsec/detector.hpp"
#include "phasorsec/simulator.hpp"

namespace phasorsec {

using Json = nlohmann::ordered_json;

struct OutputPaths {
    std::string channels_csv = "channels.csv";
    std::string verdicts_jsonl = "verdicts.jsonl";
    std::string svg_prefix = "fig";
};

struct ExperimentConfig {
    std::uint64_t seed = 1;  // root of every derived seed
    SimConfig sim;
    std::vector<EventSpec> events;
    std::optional<FdiaSpec> fdia;
    std::optional<TimingSpec> timing;
    DetectorConfig detector;
    std::size_t reference_runs = 5;  // attack-free runs behind per-window baselines
    OutputPaths outputs;
};

// Parsers reject unknown keys and wrong types with ConfigError.
SimConfig parse_sim(const Json& j);
EventSpec parse_event(const Json& j);
FdiaSpec parse_fdia(const Json& j);
TimingSpec parse_timing(const Json& j);
DetectorConfig parse_detector(const Json& j);
Baseline parse_baseline(const Json& j);
ExperimentConfig parse_experiment(const Json& j);
ExperimentConfig load_experiment(const std::string& path);
Json load_json(const std::string& path);

Json to_json(const SimConfig& c);
Json to_json(const EventSpec& e);
Json to_json(const FdiaSpec& f);
Json to_json(const TimingSpec& t);
Json to_json(const DetectorConfig& d);
Json to_json(const Baseline& b);
Json to_json(const ExperimentConfig& c);

// Overwrite component seeds with labelled derivations of cfg.seed.
void apply_seed_fanout(ExperimentConfig& cfg);

// 16 hex digits, FNV-1a over the canonical JSON dump.
std::string config_hash(const ExperimentConfig& cfg);
std::string config_hash(const Json& j);

Json to_json(const Classification& c);

}  // namespace phasorsec

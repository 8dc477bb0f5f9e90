#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "phasorsec/config_json.hpp"

namespace phasorsec {

struct RunOutput {
    std::string label;  // "clean", "timing" or "fdia"
    std::string suffix; // file-name suffix, empty unless several runs
    std::vector<ChannelSeries> channels;
    std::vector<Classification> verdicts;
};

struct ExperimentResult {
    std::string config_hash;
    std::vector<RunOutput> runs;
    std::vector<std::filesystem::path> files;
    int exit_code = 0;
};

inline constexpr int kExitNormal = 0;
inline constexpr int kExitAttack = 2;
inline constexpr int kExitEvent = 3;
inline constexpr int kExitConfig = 64;
inline constexpr int kExitFormat = 65;

// Clean simulation with the configured events applied.
std::vector<ChannelSeries> simulate(const ExperimentConfig& cfg);
// Attack- and event-free runs that share the trajectory but not the noise.
std::vector<std::vector<ChannelSeries>> reference_runs(const ExperimentConfig& cfg);

std::vector<ChannelSeries> apply_events(std::vector<ChannelSeries> channels,
                                        const std::vector<EventSpec>& events);

// Attack precedes event: any attack verdict gives 2, else any event gives 3.
int exit_code_for(const std::vector<Classification>& verdicts);

std::string jsonl_line(const Classification& c, const std::string& run,
                       const std::string& config_hash, std::uint64_t seed);

// simulate -> inject -> detect -> write CSV/JSONL/SVG under out_dir.
// Seeds are fanned out from cfg.seed before anything runs.
ExperimentResult run_experiment(ExperimentConfig cfg, const std::filesystem::path& out_dir);

}  // namespace phasorsec

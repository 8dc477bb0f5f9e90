#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phasorsec/lowrank.hpp"
#include "phasorsec/types.hpp"

namespace phasorsec {

enum class Verdict { Normal, Event, FDIA, TimingAttack };

// What e^ru is compared against for the timing test.
enum class UnwrapBaselineMode {
    CleanReference,  // calibrated e^ru of attack-free windows
    RawWindow,       // e^r of the same window
};

// Which Hankel matrix the column permutation test runs on.
enum class PermutationBasis {
    Detrended,  // unwrapped, common-mode drift removed
    Raw,
};

enum class EvidenceRule {
    SingleRank,  // compare at r_star / r_perm
    Aggregate,   // sum of gaps over r <= 5
};

struct DetectorConfig {
    std::size_t window_n = 100;
    std::optional<std::size_t> L;  // default floor(n/2)+2
    std::size_t r_star = 1;
    std::size_t r_perm = 2;
    double tau_perm = 0.05;
    double tau_unwrap = 0.5;
    double tau_gate = 3.0;
    std::size_t K_perm = 5;
    std::uint64_t seed = 0;
    std::size_t profile_rank = 10;
    std::size_t stride = 0;  // 0: non-overlapping
    bool gate = true;
    UnwrapBaselineMode unwrap_baseline = UnwrapBaselineMode::CleanReference;
    PermutationBasis permutation_basis = PermutationBasis::Detrended;
    EvidenceRule rule = EvidenceRule::SingleRank;
};

// ConfigError on violated invariants.
void validate(const DetectorConfig& cfg);

struct Baseline {
    RankErrorProfile e_ru;     // reference unwrapped profile
    double gate_center = 0.0;  // median of e^ru(r_star)
    double gate_spread = 0.0;  // IQR of e^ru(r_star)
    std::size_t windows = 0;   // calibration windows used

    double gate_threshold(double tau_gate) const { return gate_center + tau_gate * gate_spread; }
};

struct Evidence {
    RankErrorProfile e_r;   // raw Hankel
    RankErrorProfile e_rr;  // permuted, mean over K draws
    RankErrorProfile e_ru;  // unwrapped Hankel
    RankErrorProfile e_rd;  // unpermuted reference of the permutation test
};

struct Classification {
    Verdict verdict = Verdict::Normal;
    Evidence evidence;
    Timestamp window_start;
    std::size_t window_index = 0;
    bool gate_fired = false;
};

std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

// Subtract the per-sample median (over channels) of the displacement since
// column 0. Removes the shared frequency drift.
Matrix remove_common_mode(const Matrix& U);

Evidence compute_evidence(const MeasurementMatrix& Y, const DetectorConfig& cfg,
                          std::size_t window_index = 0);

// true when e^ru(r_star) is above the calibrated band; always true without a baseline
bool anomaly_gate(const Evidence& ev, const DetectorConfig& cfg, const Baseline* baseline);
bool anomaly_gate(const MeasurementMatrix& Y, const DetectorConfig& cfg, const Baseline& baseline);

// Verdict from evidence alone.
Verdict decide(const Evidence& ev, const DetectorConfig& cfg, const Baseline* baseline,
               bool* gate_fired = nullptr);

// baseline may be null only with UnwrapBaselineMode::RawWindow.
Classification classify_window(const MeasurementMatrix& Y, const DetectorConfig& cfg,
                               const Baseline* baseline, std::size_t window_index = 0);

Baseline calibrate_baseline(std::span<const MeasurementMatrix> clean_windows,
                            const DetectorConfig& cfg);
// Every full window of one attack-free capture.
Baseline calibrate_baseline(std::span<const ChannelSeries> clean, const DetectorConfig& cfg);
// One baseline per window index, pooled over several attack-free captures of
// the same operating trajectory.
std::vector<Baseline> calibrate_per_window(std::span<const std::vector<ChannelSeries>> runs,
                                           const DetectorConfig& cfg);

std::size_t window_count(std::size_t samples, const DetectorConfig& cfg);

// `baselines` is empty, a single shared baseline, or one per window.
std::vector<Classification> classify_stream(std::span<const ChannelSeries> channels,
                                            const DetectorConfig& cfg,
                                            std::span<const Baseline> baselines);

using WarningSink = std::function<void(std::string_view)>;
// Default writes to stderr. Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

namespace serial {
std::vector<Classification> classify_stream(std::span<const ChannelSeries> channels,
                                            const DetectorConfig& cfg,
                                            std::span<const Baseline> baselines);
Baseline calibrate_baseline(std::span<const MeasurementMatrix> clean_windows,
                            const DetectorConfig& cfg);
}  // namespace serial

}  // namespace phasorsec

#pragma once

#include <cstdint>
#include <vector>

#include "phasorsec/types.hpp"

namespace phasorsec {

struct FrequencyWander {
    double amplitude_hz = 0.02;    // sinusoidal deviation
    double period_s = 300.0;
    double random_walk_hz = 0.001; // std per sample
};

struct SimConfig {
    std::size_t m = 6;
    double rate_hz = 30.0;
    double duration_s = 60.0;
    std::uint64_t seed = 1;
    double f_nominal_hz = 60.0;
    FrequencyWander freq_wander;
    std::vector<double> channel_offsets_deg;  // empty: all zero
    double noise_std_deg = 0.05;
    std::vector<std::string> channel_ids;     // empty: default bus labels
    double start_s = 0.0;
};

// ConfigError on any violated invariant.
void validate(const SimConfig& cfg);
std::size_t sample_count(const SimConfig& cfg);

std::vector<Timestamp> make_timestamps(Timestamp start, double rate_hz, std::size_t count);

std::vector<ChannelSeries> generate(const SimConfig& cfg);

enum class EventShape { Step, Ramp, Oscillation };

struct ChannelScale {
    std::size_t channel = 0;
    double scale = 1.0;  // (0, 1]
};

struct EventSpec {
    Timestamp onset;
    EventShape shape = EventShape::Step;
    double magnitude_deg = 10.0;
    std::vector<ChannelScale> affected;
    double duration_s = 1.0;    // ramp length / oscillation length
    double frequency_hz = 1.0;  // oscillation only
};

// Shape value at time offset dt >= 0 from onset, before scaling.
double event_profile(const EventSpec& spec, double dt);

// SpecError for fewer than two affected channels or bad scales,
// RangeError when the event does not fit the series.
std::vector<ChannelSeries> inject_event(std::vector<ChannelSeries> channels, const EventSpec& spec);

}  // namespace phasorsec

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "phasorsec/types.hpp"

namespace phasorsec {

// Independent draws per affected channel and sample from U[lo, hi].
struct UniformAttack {
    double lo = 0.0;
    double hi = 30.0;
    std::uint64_t seed = 0;
};

// constant, per-sample sequence (index 0 = first post-onset sample), or random
using AttackValues = std::variant<double, std::vector<double>, UniformAttack>;

struct FdiaSpec {
    Timestamp onset;
    AttackValues values = 0.0;
    std::vector<std::size_t> affected_channels;
    double max_abs_deg = 30.0;  // infinity disables the bound
};

struct TimingSpec {
    Timestamp onset;
    double delay_s = 1.0;
    // unset: every channel of the PMU that owns channel 0
    std::optional<std::vector<std::size_t>> affected_channels;
};

// theta'(t) = wrap(theta(t) + a(t)) for affected channels, t >= onset.
std::vector<ChannelSeries> inject_fdia(std::vector<ChannelSeries> channels, const FdiaSpec& spec);

// theta''(t) = theta(t + T) for affected channels, t >= onset. Emits
// `emit_count` samples per channel (default: source length - T*rate).
std::vector<ChannelSeries> inject_timing(const std::vector<ChannelSeries>& channels,
                                         const TimingSpec& spec,
                                         std::optional<std::size_t> emit_count = std::nullopt);

std::vector<std::size_t> timing_channels(const std::vector<ChannelSeries>& channels,
                                         const TimingSpec& spec);

}  // namespace phasorsec

#include "phasorsec/simulator.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "phasorsec/errors.hpp"
#include "phasorsec/seed.hpp"

namespace phasorsec {

namespace {

constexpr double kSystemHz = 60.0;
const std::vector<std::string> kDefaultIds = {"632", "633", "634", "671", "672", "692"};

std::string channel_label(const SimConfig& cfg, std::size_t c) {
    if (!cfg.channel_ids.empty()) return cfg.channel_ids[c];
    if (c < kDefaultIds.size()) return kDefaultIds[c];
    return "ch" + std::to_string(c);
}

}  // namespace

void validate(const SimConfig& cfg) {
    if (cfg.m < 1) throw ConfigError("sim.m must be >= 1");
    if (!(cfg.rate_hz > 0.0) || !std::isfinite(cfg.rate_hz))
        throw ConfigError("sim.rate_hz must be > 0");
    if (!(cfg.duration_s > 0.0) || !std::isfinite(cfg.duration_s))
        throw ConfigError("sim.duration_s must be > 0");
    if (!(cfg.freq_wander.amplitude_hz >= 0.0))
        throw ConfigError("sim.freq_wander.amplitude_hz must be >= 0");
    if (!(cfg.freq_wander.period_s > 0.0))
        throw ConfigError("sim.freq_wander.period_s must be > 0");
    if (!(cfg.freq_wander.random_walk_hz >= 0.0))
        throw ConfigError("sim.freq_wander.random_walk_hz must be >= 0");
    if (!(cfg.noise_std_deg >= 0.0)) throw ConfigError("sim.noise_std_deg must be >= 0");
    if (!std::isfinite(cfg.f_nominal_hz)) throw ConfigError("sim.f_nominal_hz must be finite");
    if (!(cfg.start_s >= 0.0)) throw ConfigError("sim.start_s must be >= 0");
    if (!cfg.channel_offsets_deg.empty() && cfg.channel_offsets_deg.size() != cfg.m)
        throw ConfigError("sim.channel_offsets_deg must have m entries");
    if (!cfg.channel_ids.empty() && cfg.channel_ids.size() != cfg.m)
        throw ConfigError("sim.channel_ids must have m entries");
    if (sample_count(cfg) < 1) throw ConfigError("sim produces no samples");
}

std::size_t sample_count(const SimConfig& cfg) {
    return static_cast<std::size_t>(std::llround(cfg.rate_hz * cfg.duration_s));
}

std::vector<Timestamp> make_timestamps(Timestamp start, double rate_hz, std::size_t count) {
    if (count < 1) throw SpecError("make_timestamps: count must be >= 1");
    std::vector<Timestamp> t(count);
    for (std::size_t k = 0; k < count; ++k)
        t[k].seconds = start.seconds + static_cast<double>(k) / rate_hz;
    return t;
}

std::vector<ChannelSeries> generate(const SimConfig& cfg) {
    validate(cfg);
    const std::size_t n = sample_count(cfg);
    const double dt = 1.0 / cfg.rate_hz;
    const auto ts = make_timestamps(Timestamp{cfg.start_s}, cfg.rate_hz, n);

    // common-mode phase advance
    std::vector<double> phase(n, 0.0);
    std::mt19937_64 walk_rng(derive_seed(cfg.seed, "sim.wander"));
    std::normal_distribution<double> walk(0.0, 1.0);
    const auto& fw = cfg.freq_wander;
    double w = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double f = cfg.f_nominal_hz +
                         fw.amplitude_hz * std::sin(2.0 * std::numbers::pi * ts[i].seconds / fw.period_s) +
                         w;
        phase[i + 1] = phase[i] + 360.0 * (f - kSystemHz) * dt;
        if (fw.random_walk_hz > 0.0) w += fw.random_walk_hz * walk(walk_rng);
    }

    std::vector<ChannelSeries> out(cfg.m);
    for (std::size_t c = 0; c < cfg.m; ++c) {
        auto& ch = out[c];
        ch.channel_id = channel_label(cfg, c);
        ch.rate_hz = cfg.rate_hz;
        ch.samples.resize(n);
        const double off = cfg.channel_offsets_deg.empty() ? 0.0 : cfg.channel_offsets_deg[c];
        std::mt19937_64 noise_rng(derive_seed(cfg.seed, "sim.noise", c));
        std::normal_distribution<double> noise(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            double x = off + phase[i];
            if (cfg.noise_std_deg > 0.0) x += cfg.noise_std_deg * noise(noise_rng);
            ch.samples[i] = PhasorSample{ts[i], wrap_angle(x), 1.0};
        }
    }
    return out;
}

double event_profile(const EventSpec& spec, double dt) {
    if (dt < 0.0) return 0.0;
    switch (spec.shape) {
        case EventShape::Step:
            return spec.magnitude_deg;
        case EventShape::Ramp:
            return dt >= spec.duration_s ? spec.magnitude_deg
                                         : spec.magnitude_deg * dt / spec.duration_s;
        case EventShape::Oscillation:
            if (dt >= spec.duration_s) return 0.0;
            return spec.magnitude_deg * std::sin(2.0 * std::numbers::pi * spec.frequency_hz * dt);
    }
    return 0.0;
}

std::vector<ChannelSeries> inject_event(std::vector<ChannelSeries> channels, const EventSpec& spec) {
    if (spec.affected.size() < 2)
        throw SpecError("event needs at least two affected channels");
    if (!std::isfinite(spec.magnitude_deg)) throw SpecError("event magnitude must be finite");
    if (!(spec.duration_s > 0.0)) throw SpecError("event duration must be > 0");
    if (spec.shape == EventShape::Oscillation && !(spec.frequency_hz > 0.0))
        throw SpecError("oscillation frequency must be > 0");
    std::set<std::size_t> seen;
    for (const auto& a : spec.affected) {
        if (a.channel >= channels.size())
            throw SpecError("event channel index " + std::to_string(a.channel) + " out of range");
        if (!(a.scale > 0.0 && a.scale <= 1.0))
            throw SpecError("event channel scale must lie in (0, 1]");
        if (!seen.insert(a.channel).second) throw SpecError("duplicate event channel");
    }
    for (const auto& a : spec.affected) {
        auto& ch = channels[a.channel];
        if (ch.samples.empty()) throw RangeError("event on empty channel");
        const double first = ch.samples.front().t.seconds;
        const double last = ch.samples.back().t.seconds;
        if (spec.onset.seconds < first - kTimeTolerance ||
            spec.onset.seconds + spec.duration_s > last + 1.0 / ch.rate_hz + kTimeTolerance)
            throw RangeError("event does not fit channel " + ch.channel_id);
        for (auto& s : ch.samples) {
            const double dt = s.t.seconds - spec.onset.seconds;
            if (dt < -kTimeTolerance) continue;
            s.angle_deg = wrap_angle(s.angle_deg + a.scale * event_profile(spec, std::max(dt, 0.0)));
        }
    }
    return channels;
}

}  // namespace phasorsec

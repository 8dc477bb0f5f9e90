#include "phasorsec/attack.hpp"

#include <cmath>
#include <random>
#include <set>

#include "phasorsec/errors.hpp"
#include "phasorsec/seed.hpp"

namespace phasorsec {

namespace {

// first sample index at or after t
std::size_t first_index_at(const ChannelSeries& ch, Timestamp t) {
    if (ch.samples.empty()) throw RangeError("channel " + ch.channel_id + " is empty");
    const double first = ch.samples.front().t.seconds;
    const double last = ch.samples.back().t.seconds;
    if (t.seconds < first - kTimeTolerance || t.seconds > last + kTimeTolerance)
        throw RangeError("onset outside extent of channel " + ch.channel_id);
    const double pos = (t.seconds - first) * ch.rate_hz;
    auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(pos - 1e-6)));
    return k;
}

void check_channels(const std::vector<std::size_t>& idx, std::size_t m) {
    if (idx.empty()) throw SpecError("attack needs a nonempty channel set");
    std::set<std::size_t> seen;
    for (auto c : idx) {
        if (c >= m) throw SpecError("attack channel index " + std::to_string(c) + " out of range");
        if (!seen.insert(c).second) throw SpecError("duplicate attack channel");
    }
}

void check_value(double a, double bound) {
    if (!std::isfinite(a)) throw SpecError("attack value must be finite");
    if (std::abs(a) > bound)
        throw SpecError("attack value " + std::to_string(a) + " exceeds bound " +
                        std::to_string(bound));
}

}  // namespace

std::vector<ChannelSeries> inject_fdia(std::vector<ChannelSeries> channels, const FdiaSpec& spec) {
    check_channels(spec.affected_channels, channels.size());
    if (const auto* u = std::get_if<UniformAttack>(&spec.values)) {
        if (!(u->lo <= u->hi)) throw SpecError("uniform attack needs lo <= hi");
        check_value(u->lo, spec.max_abs_deg);
        check_value(u->hi, spec.max_abs_deg);
    } else if (const auto* a = std::get_if<double>(&spec.values)) {
        check_value(*a, spec.max_abs_deg);
    } else {
        for (double a : std::get<std::vector<double>>(spec.values)) check_value(a, spec.max_abs_deg);
    }

    for (auto c : spec.affected_channels) {
        auto& ch = channels[c];
        const std::size_t k0 = first_index_at(ch, spec.onset);
        const std::size_t post = ch.samples.size() - k0;
        std::vector<double> a(post, 0.0);
        if (const auto* u = std::get_if<UniformAttack>(&spec.values)) {
            std::mt19937_64 rng(derive_seed(u->seed, "fdia", c));
            std::uniform_real_distribution<double> dist(u->lo, u->hi);
            for (auto& v : a) v = dist(rng);
        } else if (const auto* v = std::get_if<double>(&spec.values)) {
            std::fill(a.begin(), a.end(), *v);
        } else {
            const auto& seq = std::get<std::vector<double>>(spec.values);
            if (seq.size() < post)
                throw SpecError("attack sequence shorter than the post-onset segment");
            std::copy(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(post), a.begin());
        }
        for (std::size_t i = 0; i < post; ++i) {
            auto& s = ch.samples[k0 + i];
            if (a[i] != 0.0) s.angle_deg = wrap_angle(s.angle_deg + a[i]);
        }
    }
    return channels;
}

std::vector<std::size_t> timing_channels(const std::vector<ChannelSeries>& channels,
                                         const TimingSpec& spec) {
    if (spec.affected_channels) {
        check_channels(*spec.affected_channels, channels.size());
        return *spec.affected_channels;
    }
    if (channels.empty()) throw SpecError("timing attack on an empty channel list");
    std::vector<std::size_t> idx;
    const auto pmu = channels[0].pmu_id();
    for (std::size_t c = 0; c < channels.size(); ++c)
        if (channels[c].pmu_id() == pmu) idx.push_back(c);
    return idx;
}

std::vector<ChannelSeries> inject_timing(const std::vector<ChannelSeries>& channels,
                                         const TimingSpec& spec,
                                         std::optional<std::size_t> emit_count) {
    if (channels.empty()) throw SpecError("timing attack on an empty channel list");
    if (!(spec.delay_s > 0.0) || !std::isfinite(spec.delay_s))
        throw SpecError("timing delay must be > 0");
    const double rate = channels[0].rate_hz;
    const double shift_f = spec.delay_s * rate;
    const long long shift = std::llround(shift_f);
    if (std::abs(shift_f - static_cast<double>(shift)) > 1e-6 || shift < 1)
        throw SpecError("timing delay is not an integer number of samples");
    const auto k = static_cast<std::size_t>(shift);
    const auto affected = timing_channels(channels, spec);

    std::size_t shortest = channels[0].samples.size();
    for (const auto& ch : channels) shortest = std::min(shortest, ch.samples.size());
    if (shortest <= k) throw RangeError("series shorter than the timing delay");
    const std::size_t emit = emit_count.value_or(shortest - k);
    if (emit + k > shortest)
        throw RangeError("source does not extend T past the last emitted sample");

    std::vector<ChannelSeries> out;
    out.reserve(channels.size());
    for (const auto& ch : channels) {
        if (std::abs(ch.rate_hz - rate) > 1e-9 * rate)
            throw AlignmentError("timing attack needs a common rate");
        ChannelSeries o;
        o.channel_id = ch.channel_id;
        o.rate_hz = ch.rate_hz;
        o.samples.assign(ch.samples.begin(), ch.samples.begin() + static_cast<std::ptrdiff_t>(emit));
        out.push_back(std::move(o));
    }
    for (auto c : affected) {
        const auto& src = channels[c].samples;
        auto& dst = out[c].samples;
        const std::size_t k0 = first_index_at(channels[c], spec.onset);
        if (k0 >= emit) throw RangeError("timing onset after the last emitted sample");
        for (std::size_t i = k0; i < emit; ++i) {
            dst[i].angle_deg = src[i + k].angle_deg;
            dst[i].magnitude = src[i + k].magnitude;
        }
    }
    return out;
}

}  // namespace phasorsec

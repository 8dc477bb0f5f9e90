#include "phasorsec/types.hpp"

#include <cmath>

#include "phasorsec/errors.hpp"

namespace phasorsec {

std::vector<double> ChannelSeries::angles() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.angle_deg);
    return out;
}

std::string ChannelSeries::pmu_id() const {
    auto dot = channel_id.find('.');
    return dot == std::string::npos ? channel_id : channel_id.substr(0, dot);
}

void validate(const ChannelSeries& ch) {
    if (!(ch.rate_hz > 0.0) || !std::isfinite(ch.rate_hz))
        throw RangeError("channel " + ch.channel_id + ": rate must be positive");
    const double dt = 1.0 / ch.rate_hz;
    for (std::size_t i = 0; i < ch.samples.size(); ++i) {
        const auto& s = ch.samples[i];
        if (!std::isfinite(s.t.seconds) || !std::isfinite(s.angle_deg))
            throw DomainError("channel " + ch.channel_id + ": non-finite sample " +
                              std::to_string(i));
        if (s.t.seconds < 0.0)
            throw DomainError("channel " + ch.channel_id + ": negative timestamp");
        if (i > 0 && std::abs(s.t.seconds - ch.samples[i - 1].t.seconds - dt) >= kTimeTolerance)
            throw AlignmentError("channel " + ch.channel_id + ": non-uniform spacing at sample " +
                                 std::to_string(i));
    }
}

MeasurementMatrix::MeasurementMatrix(Matrix values, std::vector<std::string> channel_ids,
                                     Timestamp t0, double rate_hz)
    : values_(std::move(values)), ids_(std::move(channel_ids)), t0_(t0), rate_(rate_hz) {
    if (values_.rows() < 1) throw SpecError("measurement matrix needs m >= 1");
    if (values_.cols() < 4) throw SpecError("measurement matrix needs n >= 4");
    if (ids_.size() != static_cast<std::size_t>(values_.rows()))
        throw SpecError("channel_ids length does not match row count");
}

MeasurementMatrix assemble_matrix(std::span<const ChannelSeries> channels, Timestamp start,
                                  std::size_t n) {
    if (channels.empty()) throw SpecError("assemble_matrix: no channels");
    const double rate = channels[0].rate_hz;
    Matrix values(static_cast<Eigen::Index>(channels.size()), static_cast<Eigen::Index>(n));
    std::vector<std::string> ids;

    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = channels[c];
        if (std::abs(ch.rate_hz - rate) > 1e-9 * rate)
            throw AlignmentError("channel " + ch.channel_id + ": rate differs from channel " +
                                 channels[0].channel_id);
        if (ch.samples.empty())
            throw RangeError("channel " + ch.channel_id + " is empty");
        const double pos = (start.seconds - ch.samples.front().t.seconds) * rate;
        const long long k = std::llround(pos);
        if (k < 0 || static_cast<std::size_t>(k) + n > ch.samples.size())
            throw RangeError("window exceeds extent of channel " + ch.channel_id);
        if (std::abs(ch.samples[static_cast<std::size_t>(k)].t.seconds - start.seconds) >=
            kTimeTolerance) {
            // off-grid for the first channel means a bad start; off-grid for a
            // later one means the channels disagree
            if (c == 0) throw RangeError("window start is not on a sample boundary");
            throw AlignmentError("channel " + ch.channel_id + " is not aligned with channel " +
                                 channels[0].channel_id);
        }
        for (std::size_t j = 0; j < n; ++j)
            values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
                ch.samples[static_cast<std::size_t>(k) + j].angle_deg;
        ids.push_back(ch.channel_id);
    }
    return MeasurementMatrix(std::move(values), std::move(ids), start, rate);
}

double wrap_angle(double x) {
    if (!std::isfinite(x)) throw DomainError("wrap_angle: non-finite input");
    // fmod is exact, and both corrections below are exact by Sterbenz
    double r = std::fmod(x, 360.0);
    if (r > 180.0)
        r -= 360.0;
    else if (r <= -180.0)
        r += 360.0;
    return r == 0.0 ? 0.0 : r;  // no negative zero
}

}  // namespace phasorsec

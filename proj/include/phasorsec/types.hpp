#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace phasorsec {

struct Timestamp {
    double seconds = 0.0;  // since epoch, UTC

    auto operator<=>(const Timestamp&) const = default;
};

struct PhasorSample {
    Timestamp t;
    double angle_deg = 0.0;  // wrapped, (-180, 180]
    double magnitude = 1.0;  // per unit, not used by detection
};

struct ChannelSeries {
    std::string channel_id;
    double rate_hz = 30.0;
    std::vector<PhasorSample> samples;

    std::size_t size() const { return samples.size(); }
    std::vector<double> angles() const;
    // label prefix before the first '.', or the whole label
    std::string pmu_id() const;
};

// Throws DomainError for non-finite timestamps/angles, RangeError for a
// non-positive rate, AlignmentError for non-uniform spacing.
void validate(const ChannelSeries& ch);

using Matrix = Eigen::MatrixXd;

class MeasurementMatrix {
public:
    MeasurementMatrix(Matrix values, std::vector<std::string> channel_ids,
                      Timestamp t0, double rate_hz);

    std::size_t m() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t n() const { return static_cast<std::size_t>(values_.cols()); }
    const Matrix& values() const { return values_; }
    const std::vector<std::string>& channel_ids() const { return ids_; }
    Timestamp t0() const { return t0_; }
    double rate_hz() const { return rate_; }

private:
    Matrix values_;
    std::vector<std::string> ids_;
    Timestamp t0_;
    double rate_;
};

// Spacing tolerance shared by validation and window alignment.
inline constexpr double kTimeTolerance = 1e-6;

// Rows follow the order of `channels`; the window is n samples starting at
// `start`, which must coincide with a sample of every channel.
MeasurementMatrix assemble_matrix(std::span<const ChannelSeries> channels,
                                  Timestamp start, std::size_t n);

// Map to (-180, 180]. Throws DomainError for non-finite x.
double wrap_angle(double x);

}  // namespace phasorsec

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "phasorsec/types.hpp"

namespace phasorsec {

// Shortest round-trip decimal form.
std::string format_double(double x);

// Header `time_s,channel_id,angle_deg,magnitude_pu`, rows sorted by
// (channel_id, time_s). Each comment is written as a leading "# " line.
void write_channels(std::ostream& os, std::span<const ChannelSeries> channels,
                    const std::vector<std::string>& comments = {});

// Same layout with `unwrapped_deg,roc` appended; each channel is unwrapped
// over its whole extent.
void write_unwrapped(std::ostream& os, std::span<const ChannelSeries> channels,
                     const std::vector<std::string>& comments = {});

// Lines starting with '#' are skipped; extra columns are ignored. Channels
// come back sorted by id. FormatError on any malformed input.
std::vector<ChannelSeries> read_channels(std::istream& is);
std::vector<ChannelSeries> read_channels_file(const std::string& path);
void write_channels_file(const std::string& path, std::span<const ChannelSeries> channels,
                         const std::vector<std::string>& comments = {});

}  // namespace phasorsec

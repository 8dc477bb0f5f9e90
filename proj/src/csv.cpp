#include "phasorsec/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "phasorsec/errors.hpp"
#include "phasorsec/unwrap.hpp"

namespace phasorsec {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && *b == ' ') ++b;
    if (b < e && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        throw FormatError("line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

std::vector<std::size_t> id_order(std::span<const ChannelSeries> channels) {
    std::vector<std::size_t> idx(channels.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return channels[a].channel_id < channels[b].channel_id;
    });
    return idx;
}

void write_comments(std::ostream& os, const std::vector<std::string>& comments) {
    for (const auto& c : comments) os << "# " << c << '\n';
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

void write_channels(std::ostream& os, std::span<const ChannelSeries> channels,
                    const std::vector<std::string>& comments) {
    write_comments(os, comments);
    os << "time_s,channel_id,angle_deg,magnitude_pu\n";
    for (auto c : id_order(channels))
        for (const auto& s : channels[c].samples)
            os << format_double(s.t.seconds) << ',' << channels[c].channel_id << ','
               << format_double(s.angle_deg) << ',' << format_double(s.magnitude) << '\n';
}

void write_unwrapped(std::ostream& os, std::span<const ChannelSeries> channels,
                     const std::vector<std::string>& comments) {
    write_comments(os, comments);
    os << "time_s,channel_id,angle_deg,magnitude_pu,unwrapped_deg,roc\n";
    for (auto c : id_order(channels)) {
        const auto& ch = channels[c];
        const auto angles = ch.angles();
        const auto u = unwrap_series(angles);
        for (std::size_t i = 0; i < ch.samples.size(); ++i) {
            const auto& s = ch.samples[i];
            os << format_double(s.t.seconds) << ',' << ch.channel_id << ','
               << format_double(s.angle_deg) << ',' << format_double(s.magnitude) << ','
               << format_double(u.unwrapped_deg[i]) << ',' << u.roc[i] << '\n';
        }
    }
}

std::vector<ChannelSeries> read_channels(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        header = split(line);
        break;
    }
    if (header.empty()) throw FormatError("missing CSV header");
    auto col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw FormatError("CSV header lacks column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ct = col("time_s"), cid = col("channel_id"), ca = col("angle_deg"),
                      cm = col("magnitude_pu");

    std::map<std::string, ChannelSeries> by_id;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw FormatError("line " + std::to_string(lineno) + ": expected " +
                              std::to_string(header.size()) + " fields");
        PhasorSample s;
        s.t.seconds = parse_double(cells[ct], lineno);
        s.angle_deg = parse_double(cells[ca], lineno);
        s.magnitude = parse_double(cells[cm], lineno);
        if (!(s.angle_deg > -180.0 && s.angle_deg <= 180.0))
            throw FormatError("line " + std::to_string(lineno) + ": angle outside (-180, 180]");
        auto& ch = by_id[cells[cid]];
        ch.channel_id = cells[cid];
        if (!ch.samples.empty() && !(s.t > ch.samples.back().t))
            throw FormatError("line " + std::to_string(lineno) + ": timestamps not increasing in channel " +
                              cells[cid]);
        ch.samples.push_back(s);
    }

    std::vector<ChannelSeries> out;
    for (auto& [id, ch] : by_id) {
        if (ch.samples.size() < 2)
            throw FormatError("channel " + id + " has fewer than two samples");
        const double span = ch.samples.back().t.seconds - ch.samples.front().t.seconds;
        ch.rate_hz = static_cast<double>(ch.samples.size() - 1) / span;
        // snap to an integer rate when within tolerance
        const double r = std::round(ch.rate_hz);
        if (std::abs(ch.rate_hz - r) < 1e-6 * r) ch.rate_hz = r;
        try {
            validate(ch);
        } catch (const Error& e) {
            throw FormatError(e.what());
        }
        out.push_back(std::move(ch));
    }
    if (out.empty()) throw FormatError("CSV has no data rows");
    return out;
}

std::vector<ChannelSeries> read_channels_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open " + path);
    return read_channels(f);
}

void write_channels_file(const std::string& path, std::span<const ChannelSeries> channels,
                         const std::vector<std::string>& comments) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    write_channels(f, channels, comments);
}

}  // namespace phasorsec

#pragma once

// Tab-separated waveform export. Numbers are written in shortest round-trip
// form so re-import reproduces every sample bit for bit.
//
//   # shiftreg-waveform 1
//   # sample_interval <s>
//   # a2_tilt <rad>
//   # segment <phase> <cycle> <shape> <t0> <t1> <a1_0> <a1_1> <a2_0> <a2_1> <tilt_0> <tilt_1>
//   t  sA1  sA2  tilt_cmd  tilt_actual
//   ...

#include "shiftreg/control/sequence.hpp"
#include "shiftreg/error.hpp"
#include "shiftreg/io/format.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace shiftreg::control {

namespace detail {

using io::exact;

inline double parse_exact(const std::string& s, int line)
{
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError("malformed number '" + s + "' in waveform", line);
    return v;
}

} // namespace detail

inline void write_waveform(std::ostream& os, const ChannelWaveform& w)
{
    using detail::exact;
    os << "# shiftreg-waveform 1\n";
    os << "# sample_interval " << exact(w.sample_interval) << "\n";
    os << "# a2_tilt " << exact(w.a2_tilt) << "\n";
    for (const auto& s : w.segments)
        os << "# segment " << to_string(s.phase) << ' ' << s.cycle << ' ' << to_string(s.shape) << ' '
           << exact(s.t_begin) << ' ' << exact(s.t_end) << ' ' << exact(s.a1_begin) << ' ' << exact(s.a1_end)
           << ' ' << exact(s.a2_begin) << ' ' << exact(s.a2_end) << ' ' << exact(s.tilt_begin) << ' '
           << exact(s.tilt_end) << "\n";
    os << "t\tsA1\tsA2\ttilt_cmd\ttilt_actual\n";
    for (std::size_t i = 0; i < w.t.size(); ++i) {
        const double actual = w.tilt_actual.empty() ? w.tilt_cmd[i] : w.tilt_actual[i];
        os << exact(w.t[i]) << '\t' << exact(w.scale_a1[i]) << '\t' << exact(w.scale_a2[i]) << '\t'
           << exact(w.tilt_cmd[i]) << '\t' << exact(actual) << '\n';
    }
}

inline ChannelWaveform read_waveform(std::istream& is)
{
    ChannelWaveform w;
    std::string line;
    int n = 0;
    bool header_seen = false, magic = false;
    while (std::getline(is, line)) {
        ++n;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, key;
            ls >> hash >> key;
            if (key == "shiftreg-waveform") {
                int version = 0;
                ls >> version;
                if (version != 1)
                    throw ConfigError("unsupported waveform version", n);
                magic = true;
            } else if (key == "sample_interval" || key == "a2_tilt") {
                std::string v;
                ls >> v;
                (key == "a2_tilt" ? w.a2_tilt : w.sample_interval) = detail::parse_exact(v, n);
            } else if (key == "segment") {
                std::string phase, shape, f[8];
                Segment s{};
                ls >> phase >> s.cycle >> shape;
                for (auto& x : f)
                    ls >> x;
                if (!ls)
                    throw ConfigError("truncated segment record", n);
                s.phase = phase_from(phase);
                s.shape = ramp_shape_from(shape);
                double* dst[8] = {&s.t_begin, &s.t_end, &s.a1_begin, &s.a1_end,
                                  &s.a2_begin, &s.a2_end, &s.tilt_begin, &s.tilt_end};
                for (int k = 0; k < 8; ++k)
                    *dst[k] = detail::parse_exact(f[k], n);
                w.segments.push_back(s);
            }
            continue;
        }
        if (!header_seen) {
            if (line.rfind("t\t", 0) != 0)
                throw ConfigError("missing waveform column header", n);
            header_seen = true;
            continue;
        }
        std::string f[5];
        for (auto& x : f)
            if (!std::getline(ls, x, '\t'))
                throw ConfigError("waveform row needs 5 columns", n);
        w.t.push_back(detail::parse_exact(f[0], n));
        w.scale_a1.push_back(detail::parse_exact(f[1], n));
        w.scale_a2.push_back(detail::parse_exact(f[2], n));
        w.tilt_cmd.push_back(detail::parse_exact(f[3], n));
        w.tilt_actual.push_back(detail::parse_exact(f[4], n));
    }
    if (!magic)
        throw ConfigError("not a shiftreg waveform file");
    return w;
}

} // namespace shiftreg::control

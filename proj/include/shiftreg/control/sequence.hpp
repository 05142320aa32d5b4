#pragma once

// Compiles bucket-chain shift sequences into sampled control channels:
// depth scales of both arrays and the commanded incidence angle on A1.
//
// One cycle:  load → transport → handover_12 → return → handover_21
//   load         A1 full at -a/2, A2 off (hold, may be zero length)
//   transport    tilt ramps -a/2 → +a/2, A1 full, A2 off
//   handover_12  crossfade A1 → A2 at +a/2
//   return       tilt ramps back to -a/2 with A1 off
//   handover_21  crossfade A2 → A1; A1's next site now overlaps A2

#include "shiftreg/control/ramp.hpp"
#include "shiftreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace shiftreg::control {

enum class Phase { load, transport, handover_12, ret, handover_21, hold };

inline const char* to_string(Phase p)
{
    switch (p) {
    case Phase::load: return "load";
    case Phase::transport: return "transport";
    case Phase::handover_12: return "handover_12";
    case Phase::ret: return "return";
    case Phase::handover_21: return "handover_21";
    case Phase::hold: return "hold";
    }
    return "?";
}

inline Phase phase_from(const std::string& s)
{
    for (auto p : {Phase::load, Phase::transport, Phase::handover_12, Phase::ret, Phase::handover_21, Phase::hold})
        if (s == to_string(p))
            return p;
    throw ConfigError("unknown waveform phase label '" + s + "'");
}

struct ShiftSequenceSpec {
    double transport_duration = 2e-3;
    double handover_duration = 5e-3;
    double return_duration = 5e-3;
    double load_duration = 0.0;
    int cycle_count = 1;
    RampShape ramp_shape = RampShape::minimum_jerk;
    RampShape crossfade_shape = RampShape::linear;
    bool symmetric_handover = false;
    double sample_rate = 100e3;

    void validate() const
    {
        if (!(transport_duration > 0.0) || !(handover_duration > 0.0) || !(return_duration > 0.0))
            throw PhysicsError("shift sequence durations must be positive");
        if (!(load_duration >= 0.0))
            throw PhysicsError("load duration must be non-negative");
        if (cycle_count < 1)
            throw PhysicsError("cycle_count must be at least 1");
        if (!(sample_rate > 0.0))
            throw PhysicsError("sample rate must be positive");
    }
};

// Geometry the compiler needs: the incidence angle that displaces A1's foci
// by half a trap separation, and how many cycles the illuminated register
// supports.
struct ShiftGeometry {
    double half_shift_tilt = 62.5e-3; // rad
    int capacity = 5;
};

// A piece of the timeline. Channel values are linear interpolations (through
// `shape`) between the start and end values.
struct Segment {
    Phase phase;
    int cycle = 0;
    double t_begin = 0.0;
    double t_end = 0.0;
    RampShape shape = RampShape::linear;
    double a1_begin = 0.0, a1_end = 0.0;
    double a2_begin = 0.0, a2_end = 0.0;
    double tilt_begin = 0.0, tilt_end = 0.0;

    double duration() const { return t_end - t_begin; }
    bool moves() const { return tilt_begin != tilt_end; }
};

struct ChannelSample {
    double scale_a1;
    double scale_a2;
    double tilt;
};

struct ChannelWaveform {
    double sample_interval = 1e-5;
    std::vector<double> t;
    std::vector<double> scale_a1;
    std::vector<double> scale_a2;
    std::vector<double> tilt_cmd;
    std::vector<double> tilt_actual;
    std::vector<Segment> segments;
    double a2_tilt = 0.0; // static incidence angle on A2 (nonzero in symmetric mode)

    double duration() const { return t.empty() ? 0.0 : t.back(); }
    std::size_t size() const { return t.size(); }

    // Analytic channel values of the compiled segments at time t.
    ChannelSample command_at(double time) const
    {
        if (segments.empty())
            return {0.0, 0.0, 0.0};
        auto it = std::upper_bound(segments.begin(), segments.end(), time,
                                   [](double v, const Segment& s) { return v < s.t_end; });
        const Segment& s = it == segments.end() ? segments.back() : *it;
        double u = s.duration() > 0.0 ? (time - s.t_begin) / s.duration() : 1.0;
        const double r = ramp(s.shape, u);
        return {s.a1_begin + (s.a1_end - s.a1_begin) * r, s.a2_begin + (s.a2_end - s.a2_begin) * r,
                s.tilt_begin + (s.tilt_end - s.tilt_begin) * r};
    }

    // Linear interpolation of the sampled channels.
    ChannelSample sampled_at(double time, bool actual_tilt = true) const
    {
        const auto& tilt = actual_tilt && !tilt_actual.empty() ? tilt_actual : tilt_cmd;
        if (time <= 0.0 || t.size() < 2)
            return {scale_a1.front(), scale_a2.front(), tilt.front()};
        if (time >= t.back())
            return {scale_a1.back(), scale_a2.back(), tilt.back()};
        auto i = static_cast<std::size_t>(time / sample_interval);
        i = std::min(i, t.size() - 2);
        while (i + 1 < t.size() - 1 && t[i + 1] < time)
            ++i;
        while (i > 0 && t[i] > time)
            --i;
        const double f = (time - t[i]) / (t[i + 1] - t[i]);
        auto lerp = [&](const std::vector<double>& v) { return v[i] + (v[i + 1] - v[i]) * f; };
        return {lerp(scale_a1), lerp(scale_a2), lerp(tilt)};
    }

    std::vector<const Segment*> segments_of(Phase p) const
    {
        std::vector<const Segment*> out;
        for (const auto& s : segments)
            if (s.phase == p)
                out.push_back(&s);
        return out;
    }
};

namespace detail {

inline void sample(ChannelWaveform& w, double sample_rate)
{
    w.sample_interval = 1.0 / sample_rate;
    const double total = w.segments.empty() ? 0.0 : w.segments.back().t_end;
    const auto n = static_cast<std::size_t>(std::ceil(total / w.sample_interval - 1e-9));
    w.t.clear();
    for (std::size_t i = 0; i <= n; ++i)
        w.t.push_back(std::min(static_cast<double>(i) * w.sample_interval, total));
    if (w.t.size() == 1 || w.t.back() != total)
        w.t.push_back(total);
    w.scale_a1.resize(w.t.size());
    w.scale_a2.resize(w.t.size());
    w.tilt_cmd.resize(w.t.size());
    for (std::size_t i = 0; i < w.t.size(); ++i) {
        auto c = w.command_at(w.t[i]);
        w.scale_a1[i] = c.scale_a1;
        w.scale_a2[i] = c.scale_a2;
        w.tilt_cmd[i] = c.tilt;
    }
    w.tilt_actual = w.tilt_cmd;
}

class SegmentBuilder {
public:
    SegmentBuilder(double a1, double a2, double tilt) : a1_(a1), a2_(a2), tilt_(tilt) {}

    void add(Phase p, int cycle, double duration, RampShape shape, double a1, double a2, double tilt)
    {
        segments_.push_back({p, cycle, t_, t_ + duration, shape, a1_, a1, a2_, a2, tilt_, tilt});
        t_ += duration;
        a1_ = a1;
        a2_ = a2;
        tilt_ = tilt;
    }

    std::vector<Segment> take() { return std::move(segments_); }

private:
    double t_ = 0.0;
    double a1_, a2_, tilt_;
    std::vector<Segment> segments_;
};

} // namespace detail

inline ChannelWaveform compile_cycle(const ShiftSequenceSpec& spec, const ShiftGeometry& geometry = {})
{
    spec.validate();
    if (spec.cycle_count > geometry.capacity)
        throw CapacityError("cycle_count " + std::to_string(spec.cycle_count) + " exceeds register capacity " +
                            std::to_string(geometry.capacity));
    const double h = geometry.half_shift_tilt;
    detail::SegmentBuilder b(1.0, 0.0, -h);
    for (int k = 0; k < spec.cycle_count; ++k) {
        b.add(Phase::load, k, spec.load_duration, RampShape::linear, 1.0, 0.0, -h);
        b.add(Phase::transport, k, spec.transport_duration, spec.ramp_shape, 1.0, 0.0, +h);
        b.add(Phase::handover_12, k, spec.handover_duration, spec.crossfade_shape, 0.0, 1.0, +h);
        b.add(Phase::ret, k, spec.return_duration, spec.ramp_shape, 0.0, 1.0, -h);
        b.add(Phase::handover_21, k, spec.handover_duration, spec.crossfade_shape, 1.0, 0.0, -h);
    }
    ChannelWaveform w;
    w.segments = b.take();
    w.a2_tilt = spec.symmetric_handover ? -h : 0.0;
    detail::sample(w, spec.sample_rate);
    return w;
}

// Single-protocol waveforms used by the coherence experiments.
enum class Protocol { rest, transport, handover_roundtrip, full_cycle };

inline const char* to_string(Protocol p)
{
    switch (p) {
    case Protocol::rest: return "rest";
    case Protocol::transport: return "transport_2ms";
    case Protocol::handover_roundtrip: return "handover_roundtrip";
    case Protocol::full_cycle: return "full_cycle";
    }
    return "?";
}

inline Protocol protocol_from(const std::string& s)
{
    for (auto p : {Protocol::rest, Protocol::transport, Protocol::handover_roundtrip, Protocol::full_cycle})
        if (s == to_string(p))
            return p;
    if (s == "transport")
        return Protocol::transport;
    throw ConfigError("unknown protocol '" + s + "'");
}

// Starting tilt of each protocol; atoms at rest are held there.
inline double protocol_start_tilt(Protocol p, const ShiftGeometry& g)
{
    switch (p) {
    case Protocol::rest:
    case Protocol::transport: return -g.half_shift_tilt;
    case Protocol::handover_roundtrip: return +g.half_shift_tilt;
    case Protocol::full_cycle: return 0.0;
    }
    return 0.0;
}

//   rest                hold in A1 at -a/2
//   transport           A1 moves -a/2 → +a/2, then holds
//   handover_roundtrip  at +a/2: A1 → A2 → A1, then holds
//   full_cycle          A1 moves 0 → +a/2, A1 → A2 → A1, then holds
// The active part starts at `start_delay`; the waveform lasts `total`.
inline ChannelWaveform compile_protocol(Protocol protocol, const ShiftSequenceSpec& spec, double start_delay,
                                        double total, const ShiftGeometry& geometry = {})
{
    ShiftSequenceSpec checked = spec;
    checked.cycle_count = 1;
    checked.validate();
    const double h = geometry.half_shift_tilt;
    const double start = protocol_start_tilt(protocol, geometry);
    detail::SegmentBuilder b(1.0, 0.0, start);
    double used = 0.0;
    if (start_delay > 0.0) {
        b.add(Phase::hold, 0, start_delay, RampShape::linear, 1.0, 0.0, start);
        used += start_delay;
    }
    switch (protocol) {
    case Protocol::rest:
        break;
    case Protocol::transport:
        b.add(Phase::transport, 0, spec.transport_duration, spec.ramp_shape, 1.0, 0.0, +h);
        used += spec.transport_duration;
        break;
    case Protocol::handover_roundtrip:
        b.add(Phase::handover_12, 0, spec.handover_duration, spec.crossfade_shape, 0.0, 1.0, +h);
        b.add(Phase::handover_21, 0, spec.handover_duration, spec.crossfade_shape, 1.0, 0.0, +h);
        used += 2.0 * spec.handover_duration;
        break;
    case Protocol::full_cycle:
        b.add(Phase::transport, 0, spec.transport_duration, spec.ramp_shape, 1.0, 0.0, +h);
        b.add(Phase::handover_12, 0, spec.handover_duration, spec.crossfade_shape, 0.0, 1.0, +h);
        b.add(Phase::handover_21, 0, spec.handover_duration, spec.crossfade_shape, 1.0, 0.0, +h);
        used += spec.transport_duration + 2.0 * spec.handover_duration;
        break;
    }
    if (total < used - 1e-15)
        throw PhysicsError("protocol '" + std::string(to_string(protocol)) + "' does not fit in the requested span");
    b.add(Phase::hold, 0, total - used, RampShape::linear, 1.0, 0.0, protocol == Protocol::rest ? start : +h);
    ChannelWaveform w;
    w.segments = b.take();
    w.a2_tilt = spec.symmetric_handover ? -h : 0.0;
    detail::sample(w, spec.sample_rate);
    return w;
}

enum class HandoverDirection { a1_to_a2, a2_to_a1 };

inline const char* to_string(HandoverDirection d)
{
    return d == HandoverDirection::a1_to_a2 ? "A1->A2" : "A2->A1";
}

// One isolated crossfade followed by a hold in the receiving array. A1→A2
// happens with A1 at +a/2, A2→A1 with A1 back at -a/2 (its next site then
// overlaps the loaded A2 site), as inside a full cycle.
inline ChannelWaveform compile_handover(HandoverDirection direction, const ShiftSequenceSpec& spec, double settle,
                                        const ShiftGeometry& geometry = {})
{
    ShiftSequenceSpec checked = spec;
    checked.cycle_count = 1;
    checked.validate();
    if (!(settle >= 0.0))
        throw PhysicsError("settle time must be non-negative");
    const double h = geometry.half_shift_tilt;
    const bool forward = direction == HandoverDirection::a1_to_a2;
    const double tilt = forward ? +h : -h;
    detail::SegmentBuilder b(forward ? 1.0 : 0.0, forward ? 0.0 : 1.0, tilt);
    b.add(forward ? Phase::handover_12 : Phase::handover_21, 0, spec.handover_duration, spec.crossfade_shape,
          forward ? 0.0 : 1.0, forward ? 1.0 : 0.0, tilt);
    b.add(Phase::hold, 0, settle, RampShape::linear, forward ? 0.0 : 1.0, forward ? 1.0 : 0.0, tilt);
    ChannelWaveform w;
    w.segments = b.take();
    w.a2_tilt = spec.symmetric_handover ? -h : 0.0;
    detail::sample(w, spec.sample_rate);
    return w;
}

// Plain hold of a given configuration (used for handover-free baselines).
inline ChannelWaveform compile_hold(double duration, double tilt, double scale_a1, double scale_a2,
                                    double sample_rate = 100e3, double a2_tilt = 0.0)
{
    detail::SegmentBuilder b(scale_a1, scale_a2, tilt);
    b.add(Phase::hold, 0, duration, RampShape::linear, scale_a1, scale_a2, tilt);
    ChannelWaveform w;
    w.segments = b.take();
    w.a2_tilt = a2_tilt;
    detail::sample(w, sample_rate);
    return w;
}

} // namespace shiftreg::control

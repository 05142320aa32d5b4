#include "shiftreg/control/mirror.hpp"
#include "shiftreg/control/ramp.hpp"
#include "shiftreg/control/sequence.hpp"
#include "shiftreg/control/waveform_io.hpp"
#include "shiftreg/optics/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace shiftreg;
using namespace shiftreg::control;

namespace {

constexpr RampShape all_shapes[] = {RampShape::linear, RampShape::smoothstep, RampShape::minimum_jerk};

// Settled at 0, then one ramp to `target` over `duration`, then a long hold.
ChannelWaveform single_move(double duration, double target, double rate, double lead = 1e-3, double tail = 5e-3)
{
    detail::SegmentBuilder b(1.0, 0.0, 0.0);
    b.add(Phase::hold, 0, lead, RampShape::linear, 1.0, 0.0, 0.0);
    b.add(Phase::transport, 0, duration, RampShape::linear, 1.0, 0.0, target);
    b.add(Phase::hold, 0, tail, RampShape::linear, 1.0, 0.0, target);
    ChannelWaveform w;
    w.segments = b.take();
    detail::sample(w, rate);
    return w;
}

MirrorModel noiseless(double f, double zeta)
{
    MirrorModel m;
    m.natural_frequency = physics::two_pi * f;
    m.damping_ratio = zeta;
    m.angle_noise_sigma = 0.0;
    return m;
}

} // namespace

TEST(Ramp, EndpointsMonotoneAndSymmetric)
{
    for (auto s : all_shapes) {
        EXPECT_EQ(ramp(s, 0.0), 0.0) << to_string(s);
        EXPECT_EQ(ramp(s, 1.0), 1.0) << to_string(s);
        EXPECT_EQ(ramp(s, -0.5), 0.0);
        EXPECT_EQ(ramp(s, 1.5), 1.0);
        double prev = 0.0;
        for (int i = 1; i <= 1000; ++i) {
            const double t = i / 1000.0, r = ramp(s, t);
            EXPECT_GE(r, prev);
            EXPECT_NEAR(ramp(s, 1.0 - t), 1.0 - r, 1e-14);
            prev = r;
        }
    }
}

TEST(Ramp, SmoothShapesStartAndStopAtRest)
{
    const double h = 1e-5;
    for (auto s : {RampShape::smoothstep, RampShape::minimum_jerk}) {
        EXPECT_NEAR(ramp(s, h) / h, 0.0, 1e-4);
        EXPECT_NEAR((1.0 - ramp(s, 1.0 - h)) / h, 0.0, 1e-4);
    }
    // Minimum jerk also has zero acceleration at both ends; peak velocity 15/8.
    EXPECT_NEAR(ramp(RampShape::minimum_jerk, h) / (h * h), 0.0, 1e-3);
    const double v = (ramp(RampShape::minimum_jerk, 0.5 + h) - ramp(RampShape::minimum_jerk, 0.5 - h)) / (2 * h);
    EXPECT_NEAR(v, 15.0 / 8.0, 1e-8);
    EXPECT_THROW(ramp_shape_from("cosine"), ConfigError);
    for (auto s : all_shapes)
        EXPECT_EQ(ramp_shape_from(to_string(s)), s);
}

TEST(Sequence, OneCycleLasts17msAndEndsWhereItStarts)
{
    ShiftSequenceSpec spec;
    const auto w = compile_cycle(spec);
    EXPECT_NEAR(w.duration(), 17e-3, 1e-15);
    ASSERT_EQ(w.segments.size(), 5u);
    const auto first = w.command_at(0.0), last = w.command_at(w.duration());
    EXPECT_EQ(first.tilt, last.tilt);
    EXPECT_EQ(first.scale_a1, 1.0);
    EXPECT_EQ(last.scale_a1, 1.0);
    EXPECT_EQ(last.scale_a2, 0.0);
    // Every crossfade conserves total scale; A2 is only on while A1 is not moving.
    for (double t = 0.0; t <= w.duration(); t += 1e-5) {
        const auto c = w.command_at(t);
        EXPECT_NEAR(c.scale_a1 + c.scale_a2, 1.0, 1e-12);
    }
    for (const auto* s : w.segments_of(Phase::transport))
        EXPECT_EQ(s->a2_begin + s->a2_end, 0.0);
}

TEST(Sequence, FiveCyclesShift275umAndSixExceedCapacity)
{
    ShiftSequenceSpec spec;
    spec.cycle_count = 5;
    const auto w = compile_cycle(spec);
    EXPECT_NEAR(w.duration(), 5 * 17e-3, 1e-14);
    optics::MicrolensArray a;
    optics::CellProjection p;
    p.measured_separation = 55e-6;
    double shift = 0.0;
    for (const auto* s : w.segments_of(Phase::transport))
        shift += p.displacement(a, s->tilt_end - s->tilt_begin);
    EXPECT_NEAR(shift, 275e-6, 1e-15);
    spec.cycle_count = 6;
    EXPECT_THROW(compile_cycle(spec), CapacityError);
}

TEST(Sequence, CyclesArePeriodic)
{
    ShiftSequenceSpec spec;
    spec.cycle_count = 3;
    spec.load_duration = 1e-3;
    const auto w = compile_cycle(spec);
    const double period = 18e-3;
    for (double t = 0.0; t < period; t += 7.3e-5) {
        const auto a = w.command_at(t), b = w.command_at(t + 2 * period);
        EXPECT_NEAR(a.tilt, b.tilt, 1e-12);
        EXPECT_NEAR(a.scale_a1, b.scale_a1, 1e-12);
    }
}

TEST(Sequence, ProtocolsFitTheirSpan)
{
    ShiftSequenceSpec spec;
    for (auto p : {Protocol::rest, Protocol::transport, Protocol::handover_roundtrip, Protocol::full_cycle}) {
        const auto w = compile_protocol(p, spec, 1e-3, 20e-3);
        EXPECT_NEAR(w.duration(), 20e-3, 1e-15) << to_string(p);
        EXPECT_EQ(protocol_from(to_string(p)), p);
    }
    EXPECT_THROW(compile_protocol(Protocol::full_cycle, spec, 1e-3, 10e-3), PhysicsError);
    EXPECT_THROW(protocol_from("teleport"), ConfigError);
}

TEST(Mirror, StepOvershootMatchesSecondOrderTheory)
{
    // 1 ns ramp stands in for a step at 1.5 kHz.
    const double zeta = 0.2;
    const auto w = single_move(1e-9, 1e-3, 1e6);
    const auto st = mirror_states(noiseless(1.5e3, zeta), w);
    double peak = 0.0;
    for (const auto& s : st)
        peak = std::max(peak, s.angle);
    const double expected = std::exp(-physics::pi * zeta / std::sqrt(1.0 - zeta * zeta));
    EXPECT_NEAR(expected, 0.527, 5e-4);
    EXPECT_NEAR(peak / 1e-3 - 1.0, expected, 1e-4);
}

TEST(Mirror, RampResponseMatchesClosedForm)
{
    // Unit-slope ramp into ωn²/(s² + 2ζωn s + ωn²):
    //   θ(t) = t - 2ζ/ωn + exp(-ζωn t) sin(ωd t + 2 acos ζ) / ωd
    const double f = 15e3, zeta = 0.02, wn = physics::two_pi * f, wd = wn * std::sqrt(1 - zeta * zeta);
    const double duration = 0.5e-3, target = 1e-2, slope = target / duration, lead = 1e-3;
    const auto w = single_move(duration, target, 1e6, lead);
    const auto st = mirror_states(noiseless(f, zeta), w);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.t.size(); ++i) {
        const double t = w.t[i] - lead;
        if (t <= 0.0 || t >= duration)
            continue;
        const double theory =
            slope * (t - 2 * zeta / wn + std::exp(-zeta * wn * t) * std::sin(wd * t + 2 * std::acos(zeta)) / wd);
        worst = std::max(worst, std::abs(st[i].angle - theory));
    }
    // RK4 phase error after ~8 periods is far below the ringing amplitude slope/ωd.
    EXPECT_LT(worst, 1e-4 * slope / wd);
}

TEST(Mirror, EnergyNeverGrowsDuringHolds)
{
    const double f = 15e3, zeta = 0.02, wn = physics::two_pi * f;
    const auto w = single_move(0.3e-3, 1e-2, 1e6);
    const auto st = mirror_states(noiseless(f, zeta), w);
    double prev = INFINITY;
    for (std::size_t i = 0; i < w.t.size(); ++i) {
        if (w.t[i] < 1.3e-3 + 1e-9)
            continue;
        const double d = st[i].angle - 1e-2;
        const double e = 0.5 * st[i].rate * st[i].rate + 0.5 * wn * wn * d * d;
        EXPECT_LE(e, prev * (1 + 1e-12) + 1e-30);
        prev = e;
    }
}

TEST(Mirror, IdealMirrorFollowsCommandAndNoiseHasConfiguredSigma)
{
    const auto w = single_move(0.5e-3, 1e-2, 1e5);
    const auto exact = mirror_states(MirrorModel::perfect(), w);
    for (std::size_t i = 0; i < w.t.size(); ++i)
        EXPECT_EQ(exact[i].angle, w.tilt_cmd[i]);

    MirrorModel noisy = MirrorModel::perfect();
    noisy.angle_noise_sigma = 22e-6;
    double sum = 0.0, sum2 = 0.0;
    const int n = 4000;
    for (int seed = 0; seed < n; ++seed) {
        const auto st = mirror_states(noisy, w, static_cast<std::uint64_t>(seed));
        const double off = st.back().angle - w.tilt_cmd.back();
        sum += off;
        sum2 += off * off;
    }
    const double mean = sum / n, sd = std::sqrt(sum2 / n - mean * mean);
    EXPECT_NEAR(mean, 0.0, 4.0 * 22e-6 / std::sqrt(double(n)));
    EXPECT_NEAR(sd, 22e-6, 0.05 * 22e-6);
    // Same seed, same draw.
    EXPECT_EQ(mirror_states(noisy, w, 5).back().angle, mirror_states(noisy, w, 5).back().angle);
}

TEST(Mirror, InvalidModelsAreRejected)
{
    const auto w = single_move(0.5e-3, 1e-2, 1e5);
    EXPECT_THROW(mirror_states(noiseless(-1.0, 0.2), w), PhysicsError);
    EXPECT_THROW(mirror_states(noiseless(1e3, 0.0), w), PhysicsError);
}

TEST(WaveformIo, RoundTripIsBitExact)
{
    ShiftSequenceSpec spec;
    spec.cycle_count = 2;
    spec.symmetric_handover = true;
    auto w = compile_cycle(spec);
    mirror_response(MirrorModel{}, w, 3);
    std::stringstream a;
    write_waveform(a, w);
    std::istringstream in(a.str());
    const auto r = read_waveform(in);
    ASSERT_EQ(r.size(), w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        EXPECT_EQ(r.t[i], w.t[i]);
        EXPECT_EQ(r.scale_a2[i], w.scale_a2[i]);
        EXPECT_EQ(r.tilt_actual[i], w.tilt_actual[i]);
    }
    ASSERT_EQ(r.segments.size(), w.segments.size());
    EXPECT_EQ(r.a2_tilt, w.a2_tilt);
    std::stringstream b;
    write_waveform(b, r);
    EXPECT_EQ(a.str(), b.str());
}

TEST(WaveformIo, MalformedInputReportsTheLine)
{
    std::istringstream bad("# shiftreg-waveform 1\nt\tsA1\tsA2\ttilt_cmd\ttilt_actual\n0\t1\t0\t0\t0\n1e-5\t1\tx\t0\t0\n");
    try {
        read_waveform(bad);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 4);
    }
    std::istringstream nomagic("t\tsA1\tsA2\ttilt_cmd\ttilt_actual\n");
    EXPECT_THROW(read_waveform(nomagic), ConfigError);
}

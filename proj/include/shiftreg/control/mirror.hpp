#pragma once

// Scanning-mirror response: a damped second-order system driven by the
// commanded incidence angle. Each move's settled target carries one static
// noise draw (the angular reproducibility of the scanner).

#include "shiftreg/control/sequence.hpp"
#include "shiftreg/dynamics/rng.hpp"
#include "shiftreg/error.hpp"
#include "shiftreg/physics/constants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace shiftreg::control {

struct MirrorModel {
    // Calibrated so that sub-millisecond moves ring near the radial trap
    // frequency; 1.5 kHz / 0.25 never excites the 17 kHz trap.
    double natural_frequency = physics::two_pi * 15e3; // rad/s
    double damping_ratio = 0.02;
    double angle_noise_sigma = 22e-6; // rad
    bool ideal = false;               // actual tilt == command (noise still applies)

    void validate() const
    {
        if (!(natural_frequency > 0.0))
            throw PhysicsError("mirror natural frequency must be positive");
        if (!(damping_ratio > 0.0 && damping_ratio < 2.0))
            throw PhysicsError("mirror damping ratio must lie in (0, 2)");
        if (!(angle_noise_sigma >= 0.0))
            throw PhysicsError("mirror angle noise must be non-negative");
    }

    static MirrorModel perfect()
    {
        MirrorModel m;
        m.ideal = true;
        m.angle_noise_sigma = 0.0;
        return m;
    }
};

// Commanded angle including the per-move noise offsets. The offset of a move
// blends from the previous target's draw to the new one with the ramp shape.
class NoisyCommand {
public:
    NoisyCommand(const ChannelWaveform& w, const MirrorModel& model, std::uint64_t seed) : w_(&w)
    {
        auto rng = dynamics::stream(seed, 0, 0x6d6972726f72ULL);
        dynamics::Gaussian gauss;
        double current = model.angle_noise_sigma > 0.0 ? model.angle_noise_sigma * gauss(rng) : 0.0;
        for (const auto& s : w.segments) {
            const double begin = current;
            if (s.moves() && model.angle_noise_sigma > 0.0)
                current = model.angle_noise_sigma * gauss(rng);
            begin_.push_back(begin);
            end_.push_back(current);
        }
    }

    double operator()(double t) const
    {
        const auto& segs = w_->segments;
        std::size_t k = 0;
        while (k + 1 < segs.size() && t >= segs[k].t_end)
            ++k;
        const auto& s = segs[k];
        const double u = s.duration() > 0.0 ? (t - s.t_begin) / s.duration() : 1.0;
        const double r = ramp(s.shape, u);
        return w_->command_at(t).tilt + begin_[k] + (end_[k] - begin_[k]) * r;
    }

private:
    const ChannelWaveform* w_;
    std::vector<double> begin_, end_;
};

struct MirrorState {
    double angle;
    double rate;
};

namespace detail {

inline MirrorState mirror_rhs(const MirrorState& s, double target, double wn, double zeta)
{
    return {s.rate, wn * wn * (target - s.angle) - 2.0 * zeta * wn * s.rate};
}

} // namespace detail

// Mirror state at every sample time. The mirror starts settled on the first
// command value. Integration: classic RK4 on the analytic (noisy) command,
// with substeps short compared to the mirror period.
inline std::vector<MirrorState> mirror_states(const MirrorModel& model, const ChannelWaveform& w,
                                              std::uint64_t seed = 0)
{
    model.validate();
    std::vector<MirrorState> out;
    if (w.t.empty())
        return out;
    NoisyCommand cmd(w, model, seed);
    out.reserve(w.t.size());
    if (model.ideal) {
        for (double t : w.t)
            out.push_back({cmd(t), 0.0});
        return out;
    }
    const double wn = model.natural_frequency;
    const double zeta = model.damping_ratio;
    MirrorState s{cmd(0.0), 0.0};
    out.push_back(s);
    const double max_sub = 0.02 / wn;
    for (std::size_t i = 1; i < w.t.size(); ++i) {
        const double span = w.t[i] - w.t[i - 1];
        const int n = std::max(1, static_cast<int>(std::ceil(span / max_sub)));
        const double h = span / n;
        for (int k = 0; k < n; ++k) {
            const double t0 = w.t[i - 1] + k * h;
            const double c0 = cmd(t0), cm = cmd(t0 + 0.5 * h), c1 = cmd(t0 + h);
            auto k1 = detail::mirror_rhs(s, c0, wn, zeta);
            auto k2 = detail::mirror_rhs({s.angle + 0.5 * h * k1.angle, s.rate + 0.5 * h * k1.rate}, cm, wn, zeta);
            auto k3 = detail::mirror_rhs({s.angle + 0.5 * h * k2.angle, s.rate + 0.5 * h * k2.rate}, cm, wn, zeta);
            auto k4 = detail::mirror_rhs({s.angle + h * k3.angle, s.rate + h * k3.rate}, c1, wn, zeta);
            s.angle += h / 6.0 * (k1.angle + 2.0 * k2.angle + 2.0 * k3.angle + k4.angle);
            s.rate += h / 6.0 * (k1.rate + 2.0 * k2.rate + 2.0 * k3.rate + k4.rate);
        }
        out.push_back(s);
    }
    return out;
}

// Fills w.tilt_actual from the simulated mirror.
inline void mirror_response(const MirrorModel& model, ChannelWaveform& w, std::uint64_t seed = 0)
{
    auto states = mirror_states(model, w, seed);
    w.tilt_actual.resize(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
        w.tilt_actual[i] = states[i].angle;
}

} // namespace shiftreg::control

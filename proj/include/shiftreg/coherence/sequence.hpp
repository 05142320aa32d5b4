#pragma once

// Ramsey and spin-echo pulse sequences. Pulse positions are given by their
// centres; the first π/2 pulse starts at t = 0.
//
//   echo:    π/2 centred at τ/2, π at τ/2 + t_π, π/2 at τ/2 + 2t_π (+ offset)
//   ramsey:  π/2 on [0, τ], second π/2 starting after a free gap

#include "shiftreg/error.hpp"
#include "shiftreg/physics/constants.hpp"

#include <string>
#include <vector>

namespace shiftreg::coherence {

struct Pulse {
    double center = 0.0;   // s
    double duration = 0.0; // s
    double area = 0.0;     // rad (π/2 or π)
    double phase = 0.0;    // rad, drive phase

    double begin() const { return center - 0.5 * duration; }
    double end() const { return center + 0.5 * duration; }
};

enum class SequenceKind { ramsey, echo };

struct PulseTiming {
    double pi_duration = 210e-6; // s; π/2 pulses take half, at the same Rabi frequency

    double rabi_frequency() const { return physics::pi / pi_duration; }
    double half_duration() const { return 0.5 * pi_duration; }
};

struct PulseSequence {
    SequenceKind kind = SequenceKind::echo;
    std::vector<Pulse> pulses;
    double t_pi = 0.0; // echo refocusing time; ramsey: free gap

    void validate() const
    {
        for (std::size_t i = 0; i < pulses.size(); ++i) {
            if (!(pulses[i].duration > 0.0))
                throw PhysicsError("pulse durations must be positive");
            if (i > 0 && pulses[i].begin() < pulses[i - 1].end() - 1e-15)
                throw PhysicsError("pulses must be ordered and non-overlapping");
        }
        if (!pulses.empty() && pulses.front().begin() < -1e-15)
            throw PhysicsError("pulse sequence starts before t = 0");
    }

    double end() const { return pulses.empty() ? 0.0 : pulses.back().end(); }

    static PulseSequence echo(double t_pi, const PulseTiming& timing, double final_offset = 0.0,
                              double final_phase = 0.0, double drive_phase = 0.0)
    {
        const double tau = timing.half_duration();
        PulseSequence s;
        s.kind = SequenceKind::echo;
        s.t_pi = t_pi;
        s.pulses = {{0.5 * tau, tau, 0.5 * physics::pi, drive_phase},
                    {0.5 * tau + t_pi, timing.pi_duration, physics::pi, drive_phase},
                    {0.5 * tau + 2.0 * t_pi + final_offset, tau, 0.5 * physics::pi, drive_phase + final_phase}};
        s.validate();
        return s;
    }

    static PulseSequence ramsey(double gap, const PulseTiming& timing, double final_phase = 0.0,
                                double drive_phase = 0.0)
    {
        const double tau = timing.half_duration();
        PulseSequence s;
        s.kind = SequenceKind::ramsey;
        s.t_pi = gap;
        s.pulses = {{0.5 * tau, tau, 0.5 * physics::pi, drive_phase},
                    {1.5 * tau + gap, tau, 0.5 * physics::pi, drive_phase + final_phase}};
        s.validate();
        return s;
    }

    // Every time at which the phase record is needed.
    std::vector<double> edges() const
    {
        std::vector<double> t{0.0};
        for (const auto& p : pulses) {
            t.push_back(p.begin());
            t.push_back(p.end());
        }
        return t;
    }
};

} // namespace shiftreg::coherence

#pragma once

// Rest-versus-protocol echo comparisons with a heating rate calibrated once on
// atoms at rest and then frozen.

#include "shiftreg/coherence/experiment.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <vector>

namespace shiftreg::coherence {

struct ProtocolComparison {
    control::Protocol protocol{};
    ContrastCurve rest;
    ContrastCurve moved;
    double ratio = 0.0; // T₂′(moved) / T₂′(rest)
    double ratio_error = 0.0;
};

struct CalibrationResult {
    double heating_rate = 0.0; // K/s
    double t2 = 0.0;           // s, rest T₂′ at that rate
    int iterations = 0;
    ContrastCurve curve;
};

class CoherenceStudy {
public:
    // `t_pi` is the echo scan; `max_heating_rate` bounds the recoil kicks
    // recorded per propagation (raised automatically during calibration).
    CoherenceStudy(CoherenceScenario scenario, std::vector<double> t_pi, double max_heating_rate = 40e-6)
        : sc_(std::move(scenario)), t_pi_(std::move(t_pi))
    {
        model_ = make_dephasing_model(sc_.scene.a1.beam.wavelength, sc_.scene.species);
        max_heating_ = max_heating_rate;
        if (t_pi_.empty())
            throw PhysicsError("echo scan needs at least one t_pi value");
    }

    const CoherenceScenario& scenario() const { return sc_; }
    const DephasingModel& model() const { return model_; }
    DephasingModel& model() { return model_; }
    const std::vector<double>& t_pi() const { return t_pi_; }

    // Everything one echo scan needs, plus the Ramsey reference.
    std::vector<double> scan_times() const
    {
        std::vector<PulseSequence> seqs{PulseSequence::ramsey(0.0, sc_.timing)};
        for (double tp : t_pi_)
            seqs.push_back(PulseSequence::echo(tp, sc_.timing));
        return required_times(seqs);
    }

    double scan_span() const { return PulseSequence::echo(*std::max_element(t_pi_.begin(), t_pi_.end()), sc_.timing).end(); }

    // Rest banks are keyed by |start tilt|: the degradation law is even and
    // the start sites at ±a/2 belong to the same lens.
    const TrajectoryBank& rest_bank(control::Protocol p)
    {
        const double tilt = std::abs(control::protocol_start_tilt(p, dynamics::Scene(sc_.scene).geometry()));
        auto& slot = rest_[tilt];
        if (!slot)
            slot = build(p, true);
        return *slot;
    }

    const TrajectoryBank& moved_bank(control::Protocol p)
    {
        if (p == control::Protocol::rest)
            return rest_bank(p);
        auto& slot = moved_[p];
        if (!slot)
            slot = build(p, false);
        return *slot;
    }

    // Echo contrast of atoms put through `p` (or held at its start when
    // at_rest), normalized by the Ramsey amplitude at t = 0 at rest.
    ContrastCurve echo_contrast_scan(control::Protocol p, bool at_rest = false)
    {
        const auto& rest = rest_bank(p);
        const double ref = ramsey_reference_amplitude(rest, model_, sc_.timing);
        const auto& bank = at_rest || p == control::Protocol::rest ? rest : moved_bank(p);
        auto c = echo_curve(bank, model_, sc_.timing, t_pi_, ref, sc_.shots, sc_.ensemble.seed);
        fit_curve(c);
        return c;
    }

    ProtocolComparison compare(control::Protocol p)
    {
        ProtocolComparison out;
        out.protocol = p;
        out.rest = echo_contrast_scan(p, true);
        out.moved = echo_contrast_scan(p);
        out.ratio = out.moved.fit.t2 / out.rest.fit.t2;
        out.ratio_error = out.ratio * std::hypot(out.moved.fit.t2_error / out.moved.fit.t2,
                                                 out.rest.fit.t2_error / out.rest.fit.t2);
        return out;
    }

    // Bisection on the heating rate until the rest T₂′ (transport start
    // configuration) matches `target`. The result is written into model().
    CalibrationResult calibrate(double target, double tolerance = 1e-4)
    {
        const auto p = control::Protocol::transport;
        for (int grow = 0; grow < 8; ++grow) {
            const double t2_max = rest_t2(p, max_heating_);
            if (t2_max < target)
                break;
            max_heating_ *= 4.0;
            rest_.clear();
            moved_.clear();
        }
        double lo = 0.0, hi = max_heating_;
        CalibrationResult r;
        for (r.iterations = 0; r.iterations < 60; ++r.iterations) {
            const double mid = 0.5 * (lo + hi);
            const double t2 = rest_t2(p, mid);
            if (t2 > target)
                lo = mid;
            else
                hi = mid;
            if (std::abs(t2 - target) <= tolerance * target || hi - lo <= 1e-12 * max_heating_)
                break;
        }
        model_.heating_rate = 0.5 * (lo + hi);
        r.heating_rate = model_.heating_rate;
        r.curve = echo_contrast_scan(p, true);
        r.t2 = r.curve.fit.t2;
        return r;
    }

private:
    double rest_t2(control::Protocol p, double heating)
    {
        const auto saved = model_.heating_rate;
        model_.heating_rate = heating;
        const auto& rest = rest_bank(p);
        const double ref = ramsey_reference_amplitude(rest, model_, sc_.timing);
        auto c = echo_curve(rest, model_, sc_.timing, t_pi_, ref, sc_.shots, sc_.ensemble.seed);
        model_.heating_rate = saved;
        try {
            return fit_gaussian_contrast(c.abscissa, c.contrast, c.sigma).t2;
        } catch (const FitError&) {
            return 0.0;
        }
    }

    std::unique_ptr<TrajectoryBank> build(control::Protocol p, bool at_rest)
    {
        auto m = model_;
        m.heating_rate = max_heating_;
        return std::make_unique<TrajectoryBank>(sc_, p, at_rest, scan_times(), scan_span(), m.kick_rate(),
                                                m.recoil_momentum);
    }

    CoherenceScenario sc_;
    std::vector<double> t_pi_;
    DephasingModel model_;
    double max_heating_ = 40e-6;
    std::map<double, std::unique_ptr<TrajectoryBank>> rest_;
    std::map<control::Protocol, std::unique_ptr<TrajectoryBank>> moved_;
};

} // namespace shiftreg::coherence

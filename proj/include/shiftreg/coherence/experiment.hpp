#pragma once

// Qubit evolution along simulated trajectories and the Ramsey / echo
// experiments built on it. One propagation (a TrajectoryBank) serves every
// pulse sequence that fits inside it; the homogeneous channel is applied at
// readout by thinning the recorded recoil kicks.

#include "shiftreg/coherence/dephasing.hpp"
#include "shiftreg/coherence/fit.hpp"
#include "shiftreg/coherence/qubit.hpp"
#include "shiftreg/coherence/sequence.hpp"
#include "shiftreg/control/mirror.hpp"
#include "shiftreg/control/sequence.hpp"
#include "shiftreg/dynamics/propagate.hpp"
#include "shiftreg/dynamics/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace shiftreg::coherence {

struct CoherenceScenario {
    dynamics::SceneConfig scene{};
    dynamics::EnsembleSpec ensemble{};
    dynamics::IntegratorConfig integrator{};
    control::ShiftSequenceSpec spec{};
    control::MirrorModel mirror = control::MirrorModel::perfect();
    PulseTiming timing{};
    int shots = 1; // atoms are split into this many shots for the detuning jitter
};

class TrajectoryBank {
public:
    // Propagates the scenario's ensemble through `protocol` (active part
    // starting when the first π/2 pulse ends) up to `span`, recording the
    // phase integral at `times` and recoil kicks at `max_kick_rate`. With
    // at_rest the atoms are instead held where `protocol` would start.
    TrajectoryBank(const CoherenceScenario& sc, control::Protocol protocol, bool at_rest, std::vector<double> times,
                   double span, double max_kick_rate, double recoil_momentum)
        : scene_(sc.scene), protocol_(protocol), at_rest_(at_rest || protocol == control::Protocol::rest),
          max_rate_(max_kick_rate)
    {
        const auto geom = scene_.geometry();
        auto spec = sc.spec;
        spec.symmetric_handover = sc.scene.symmetric;
        const double start_tilt = control::protocol_start_tilt(protocol, geom);
        auto w = at_rest_ ? control::compile_hold(span, start_tilt, 1.0, 0.0, spec.sample_rate, scene_.a2_tilt())
                          : control::compile_protocol(protocol, spec, sc.timing.half_duration(), span, geom);
        control::mirror_response(sc.mirror, w, sc.ensemble.seed);
        const auto start = scene_.a1_snapshot(start_tilt);
        const auto centre = sc.scene.a1.array.central_site();
        auto e = dynamics::sample_thermal(start, centre, sc.ensemble.temperature, sc.ensemble.atoms, sc.ensemble.seed,
                                          scene_.species());
        const auto site = start.site(centre);
        bottom_ = scene_.potential(site.center, scene_.a1_view(start_tilt, 1.0), scene_.a2_view(0.0)).value;

        times.push_back(0.0);
        times.push_back(span);
        dynamics::PropagationRequest req;
        req.duration = span;
        req.checkpoints = times;
        req.kicks = {max_kick_rate, recoil_momentum};
        record_ = dynamics::propagate(e, scene_, w, sc.integrator, req);
        order_.resize(record_.checkpoint_count());
        for (std::size_t k = 0; k < order_.size(); ++k)
            order_[k] = k;
        std::sort(order_.begin(), order_.end(),
                  [&](std::size_t i, std::size_t j) { return record_.checkpoint_times[i] < record_.checkpoint_times[j]; });
        span_ = record_.checkpoint_times.empty() ? 0.0 : *std::max_element(record_.checkpoint_times.begin(), record_.checkpoint_times.end());
        dt_ = record_.time_step;
        survivors_.assign(record_.atom_count, 0);
        for (std::size_t i = 0; i < record_.atom_count; ++i) {
            bool alive = true;
            for (std::size_t k = 0; k < record_.checkpoint_count(); ++k)
                alive = alive && record_.at(i, k).alive;
            survivors_[i] = alive ? 1 : 0;
        }
    }

    const dynamics::TrajectoryRecord& record() const { return record_; }
    const dynamics::Scene& scene() const { return scene_; }
    control::Protocol protocol() const { return protocol_; }
    bool at_rest() const { return at_rest_; }
    double span() const { return span_; }
    double max_kick_rate() const { return max_rate_; }
    double trap_bottom() const { return bottom_; } // J, start site centre
    bool survived(std::size_t atom) const { return survivors_[atom] != 0; }

    // ∫U dt from 0 to t for one atom (t must be a recorded time).
    double potential_integral(std::size_t atom, double t) const { return record_.at(atom, index_of(t)).potential_integral; }

    std::size_t index_of(double t) const
    {
        const double snapped = std::llround(t / dt_) * dt_;
        auto it = std::lower_bound(order_.begin(), order_.end(), snapped, [&](std::size_t k, double v) {
            return record_.checkpoint_times[k] < v - 0.25 * dt_;
        });
        if (it == order_.end() || std::abs(record_.checkpoint_times[*it] - snapped) > 0.25 * dt_)
            throw PhysicsError("time " + std::to_string(t) + " s is not covered by the trajectory record");
        return *it;
    }

private:
    dynamics::Scene scene_;
    control::Protocol protocol_;
    bool at_rest_ = false;
    double max_rate_ = 0.0;
    double bottom_ = 0.0;
    double span_ = 0.0;
    double dt_ = 1e-6;
    dynamics::TrajectoryRecord record_;
    std::vector<std::size_t> order_;
    std::vector<char> survivors_;
};

struct QubitRecord {
    double accumulated_phase = 0.0; // rad, trajectory + homogeneous, over the free periods
    Spinor state{};
    int pulses_applied = 0;
};

struct Readout {
    std::vector<QubitRecord> qubits; // one per atom; lost atoms keep the initial state
    double population_f2 = 0.0;      // mean over surviving atoms
    std::size_t detected = 0;
};

namespace detail {

// Phase (rad) accumulated by one atom over [a, b] relative to the drive.
struct PhaseSource {
    const TrajectoryBank& bank;
    const DephasingModel& model;
    double keep_fraction; // of the recorded kicks
    double reference;     // rad/s, drive detuning reference
    double jitter;        // rad/s, this atom's shot offset

    double operator()(std::size_t atom, double a, double b) const
    {
        const double ia = bank.potential_integral(atom, a);
        const double ib = bank.potential_integral(atom, b);
        double phi = model.eta * (-(ib - ia)) / physics::hbar - (reference - jitter) * (b - a);
        if (keep_fraction > 0.0 && !bank.record().kicks.empty()) {
            for (const auto& k : bank.record().kicks[atom]) {
                if (k.mark >= keep_fraction || k.time >= b)
                    continue;
                phi += model.frequency_step(k.energy) * (b - std::max(a, k.time));
            }
        }
        return phi;
    }
};

} // namespace detail

// Fraction of the recorded kicks that reproduces the model's heating rate.
inline double kick_keep_fraction(const TrajectoryBank& bank, const DephasingModel& model)
{
    const double rate = model.kick_rate();
    if (rate <= 0.0)
        return 0.0;
    if (rate > bank.max_kick_rate() * (1.0 + 1e-12))
        throw PhysicsError("heating rate exceeds the kick rate recorded in the trajectory bank");
    return rate / bank.max_kick_rate();
}

inline Readout evolve_qubits(const TrajectoryBank& bank, const DephasingModel& model, const PulseSequence& seq,
                             int shots = 1, std::uint64_t jitter_seed = 0)
{
    model.validate();
    seq.validate();
    if (seq.end() > bank.span() + 1e-12)
        throw PhysicsError("pulse sequence exceeds the trajectory span");
    const double reference = differential_shift(bank.trap_bottom(), model);
    const double keep = kick_keep_fraction(bank, model);
    std::vector<double> shot_offset(static_cast<std::size_t>(std::max(1, shots)), 0.0);
    if (model.detuning_jitter > 0.0) {
        auto g = dynamics::stream(jitter_seed, 0, 0x6a6974746572ULL);
        dynamics::Gaussian gauss;
        for (double& o : shot_offset)
            o = model.detuning_jitter * gauss(g);
    }
    Readout out;
    const std::size_t n = bank.record().atom_count;
    out.qubits.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        detail::PhaseSource phase{bank, model, keep, reference, shot_offset[i % shot_offset.size()]};
        QubitRecord q;
        double t = 0.0;
        for (const auto& p : seq.pulses) {
            if (p.begin() > t) {
                const double phi = phase(i, t, p.begin());
                q.state = precess(q.state, phi);
                q.accumulated_phase += phi;
            }
            const double detuning = phase(i, p.begin(), p.end()) / p.duration;
            // Squared pulses of fixed Rabi frequency; the area sets the duration.
            q.state = pulse(q.state, p.area / p.duration, detuning, p.phase, p.duration);
            ++q.pulses_applied;
            t = p.end();
        }
        if (bank.survived(i)) {
            sum += q.state.population_f2();
            ++out.detected;
        }
        out.qubits[i] = q;
    }
    if (out.detected == 0)
        throw StatisticsError("no atoms left to detect");
    out.population_f2 = sum / static_cast<double>(out.detected);
    return out;
}

struct ContrastPoint {
    double contrast = 0.0;
    double sigma = 0.0; // Monte Carlo standard error from detecting `detected` atoms
    std::size_t detected = 0;
};

// Fringe amplitude from four final-pulse phases, C = √(X² + Y²) with
// X = P(0) − P(π), Y = P(π/2) − P(3π/2). Each P is the detected F=2 fraction
// of the surviving atoms, with binomial variance P(1−P)/N. The quoted σ is
// averaged over the orientation of the fringe, (σ_X² + σ_Y²)/2, since the
// absolute fringe phase carries no information about the amplitude.
template <class MakeSequence>
inline ContrastPoint fringe_contrast(const TrajectoryBank& bank, const DephasingModel& model, MakeSequence make, int shots = 1, std::uint64_t jitter_seed = 0)
{
    double p[4];
    std::size_t detected = 0;
    for (int k = 0; k < 4; ++k) {
        const auto r = evolve_qubits(bank, model, make(0.5 * physics::pi * k), shots, jitter_seed);
        p[k] = r.population_f2;
        detected = r.detected;
    }
    const double nd = static_cast<double>(detected);
    const double x = p[0] - p[2], y = p[1] - p[3];
    auto var = [&](double q) { return std::max(0.0, q * (1.0 - q)) / nd; };
    ContrastPoint c;
    c.contrast = std::hypot(x, y);
    c.sigma = std::sqrt(0.5 * (var(p[0]) + var(p[2]) + var(p[1]) + var(p[3])));
    c.detected = detected;
    return c;
}

struct ContrastCurve {
    std::string label;
    std::vector<double> abscissa; // 2t_π or Ramsey gap, s
    std::vector<double> contrast; // normalized by the Ramsey amplitude at t = 0 for atoms at rest
    std::vector<double> sigma;
    bool fitted = false;
    GaussianFit fit{};

    void write(std::ostream& os) const
    {
        os << "# " << label << "\n2t_pi_s\tcontrast\tsigma\n";
        char buf[128];
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.9g\t%.9g\t%.9g\n", abscissa[i], contrast[i], sigma[i]);
            os << buf;
        }
    }
};

// Times the bank must record for a set of echo and Ramsey sequences.
inline std::vector<double> required_times(const std::vector<PulseSequence>& seqs)
{
    std::vector<double> t;
    for (const auto& s : seqs)
        for (double e : s.edges())
            t.push_back(e);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(), [](double a, double b) { return std::abs(a - b) < 1e-10; }), t.end());
    return t;
}

inline double ramsey_reference_amplitude(const TrajectoryBank& rest, const DephasingModel& model,
                                         const PulseTiming& timing)
{
    return fringe_contrast(rest, model, [&](double ph) { return PulseSequence::ramsey(0.0, timing, ph); })
        .contrast;
}

inline ContrastCurve echo_curve(const TrajectoryBank& bank, const DephasingModel& model, const PulseTiming& timing,
                                const std::vector<double>& t_pi, double reference_amplitude, int shots = 1,
                                std::uint64_t jitter_seed = 0)
{
    ContrastCurve c;
    c.label = std::string("echo ") + (bank.at_rest() ? "rest@" : "") + control::to_string(bank.protocol());
    for (double tp : t_pi) {
        const auto pt = fringe_contrast(
            bank, model, [&](double ph) { return PulseSequence::echo(tp, timing, 0.0, ph); }, shots, jitter_seed);
        c.abscissa.push_back(2.0 * tp);
        c.contrast.push_back(pt.contrast / reference_amplitude);
        c.sigma.push_back(pt.sigma / reference_amplitude);
    }
    return c;
}

inline ContrastCurve ramsey_curve(const TrajectoryBank& bank, const DephasingModel& model, const PulseTiming& timing,
                                  const std::vector<double>& gaps, int shots = 1, std::uint64_t jitter_seed = 0)
{
    ContrastCurve c;
    c.label = std::string("ramsey ") + (bank.at_rest() ? "rest@" : "") + control::to_string(bank.protocol());
    const double ref = ramsey_reference_amplitude(bank, model, timing);
    for (double g : gaps) {
        const auto pt = fringe_contrast(
            bank, model, [&](double ph) { return PulseSequence::ramsey(g, timing, ph); }, shots, jitter_seed);
        c.abscissa.push_back(g);
        c.contrast.push_back(pt.contrast / ref);
        c.sigma.push_back(pt.sigma / ref);
    }
    return c;
}

// First time the curve falls to 1/e, linearly interpolated.
inline double one_over_e_time(const ContrastCurve& c)
{
    const double level = std::exp(-1.0);
    for (std::size_t i = 1; i < c.abscissa.size(); ++i) {
        if (c.contrast[i] <= level && c.contrast[i - 1] > level) {
            const double f = (c.contrast[i - 1] - level) / (c.contrast[i - 1] - c.contrast[i]);
            return c.abscissa[i - 1] + f * (c.abscissa[i] - c.abscissa[i - 1]);
        }
    }
    throw StatisticsError("contrast never falls to 1/e within the scanned range");
}

// Leaves c.fitted false when the data do not constrain a Gaussian decay
// (e.g. a flat curve without homogeneous dephasing).
inline bool fit_curve(ContrastCurve& c)
{
    try {
        c.fit = fit_gaussian_contrast(c.abscissa, c.contrast, c.sigma);
        c.fitted = true;
    } catch (const FitError&) {
        c.fitted = false;
    }
    return c.fitted;
}

} // namespace shiftreg::coherence

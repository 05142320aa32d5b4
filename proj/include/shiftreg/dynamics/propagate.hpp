#pragma once

// Velocity-Verlet propagation of an ensemble through the time-dependent
// two-array potential. Atoms are independent: each one is stepped to the end
// with its own RNG stream, so the result does not depend on the number of
// workers.

#include "shiftreg/control/sequence.hpp"
#include "shiftreg/dynamics/ensemble.hpp"
#include "shiftreg/dynamics/scene.hpp"
#include "shiftreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace shiftreg::dynamics {

struct IntegratorConfig {
    double time_step = 1e-6;
    double loss_energy_margin = 0.0;   // lost when E > -margin·|local site depth|
    double capture_radius = 0.0;       // m; 0 = half the trap separation
    double axial_escape = 4.0;         // Rayleigh ranges beyond which an unbound atom counts as gone
    double background_lifetime = 0.5;  // s; 0 disables background loss
    double stability_limit = 0.15;     // max time_step · Ω_r
    unsigned threads = 1;

    void validate() const
    {
        if (!(time_step > 0.0))
            throw PhysicsError("integrator time step must be positive");
        if (!(loss_energy_margin >= 0.0) || !(capture_radius >= 0.0) || !(axial_escape > 0.0))
            throw PhysicsError("integrator loss parameters must be non-negative");
        if (!(background_lifetime >= 0.0))
            throw PhysicsError("background lifetime must be non-negative");
    }
};

// Photon-recoil kicks recorded along the trajectory (Poisson process). The
// trajectory itself is not perturbed; consumers decide what the recorded
// energy steps mean.
struct KickProcess {
    double rate = 0.0;     // 1/s
    double momentum = 0.0; // kg·m/s, ħk of the trap light
};

struct Kick {
    double time;   // s
    double energy; // J, v·Δp + |Δp|²/2m with Δp = ħk(ẑ + n̂)
    double mark;   // uniform in [0, 1), for thinning to a lower rate
};

struct PropagationRequest {
    double duration = -1.0;          // s; < 0 = waveform duration
    std::vector<double> checkpoints; // s; snapped to the step grid
    KickProcess kicks{};
};

struct AtomCheckpoint {
    Vec3 position{};
    Vec3 velocity{};
    double potential = 0.0;          // J
    double potential_integral = 0.0; // J·s since the start, trapezoidal on the step grid
    bool alive = true;
};

struct TrajectoryRecord {
    std::size_t atom_count = 0;
    std::size_t steps = 0;
    double time_step = 0.0;
    std::vector<double> checkpoint_times;
    std::vector<AtomCheckpoint> states; // atom-major: states[atom * checkpoints + k]
    std::vector<std::vector<Kick>> kicks;

    std::size_t checkpoint_count() const { return checkpoint_times.size(); }
    const AtomCheckpoint& at(std::size_t atom, std::size_t k) const { return states[atom * checkpoint_count() + k]; }
};

struct StepViews {
    optics::LatticeView a1;
    optics::LatticeView a2;
};

// Per-step lattice states from the waveform (actual mirror angle).
inline std::vector<StepViews> step_table(const Scene& scene, const control::ChannelWaveform& w, double dt,
                                         std::size_t steps)
{
    std::vector<StepViews> table(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        const auto c = w.sampled_at(static_cast<double>(n) * dt);
        table[n] = {scene.a1_view(c.tilt, c.scale_a1), scene.a2_view(c.scale_a2)};
    }
    return table;
}

namespace detail {

inline double nearest_lateral_distance2(const optics::LatticeView& v, const Vec3& p, double& site_depth)
{
    if (v.depth_scale <= 0.0 || v.snapshot == nullptr)
        return INFINITY;
    const auto& s = *v.snapshot;
    const auto idx = s.nearest(p.x - v.offset_x, p.y);
    const double dx = p.x - (s.center_x(idx.col) + v.offset_x);
    const double dy = p.y - s.center_y(idx.row);
    site_depth = s.depth(idx) * v.depth_scale;
    return dx * dx + dy * dy;
}

struct LossRule {
    double capture2;
    double margin;
    double axial_limit;

    bool lost(const Vec3& p, double energy, const StepViews& v) const
    {
        double d1 = 0.0, d2 = 0.0;
        const double r1 = nearest_lateral_distance2(v.a1, p, d1);
        const double r2 = nearest_lateral_distance2(v.a2, p, d2);
        const double local_depth = r1 <= r2 ? d1 : d2;
        if (!(energy > -margin * std::abs(local_depth)))
            return false;
        return std::min(r1, r2) > capture2 || std::abs(p.z) > axial_limit;
    }
};

} // namespace detail

inline TrajectoryRecord propagate(AtomEnsemble& ensemble, const Scene& scene, const control::ChannelWaveform& waveform,
                                  const IntegratorConfig& config, const PropagationRequest& request = {})
{
    config.validate();
    const double dt = config.time_step;
    if (dt * scene.max_radial_frequency() > config.stability_limit)
        throw PhysicsError("unstable time step: dt·Ω_r = " + std::to_string(dt * scene.max_radial_frequency()) +
                           " exceeds " + std::to_string(config.stability_limit));
    const double duration = request.duration < 0.0 ? waveform.duration() : request.duration;
    if (duration > waveform.duration() * (1.0 + 1e-12) + 1e-15)
        throw PhysicsError("waveform does not cover the requested propagation span");
    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
    const auto table = step_table(scene, waveform, dt, steps);

    TrajectoryRecord rec;
    rec.atom_count = ensemble.size();
    rec.steps = steps;
    rec.time_step = dt;
    std::vector<std::size_t> cp_steps;
    for (double t : request.checkpoints) {
        if (t < 0.0 || t > duration * (1.0 + 1e-12) + 1e-15)
            throw PhysicsError("checkpoint outside the propagation span");
        cp_steps.push_back(std::min<std::size_t>(steps, static_cast<std::size_t>(std::llround(t / dt))));
        rec.checkpoint_times.push_back(static_cast<double>(cp_steps.back()) * dt);
    }
    const std::size_t ncp = cp_steps.size();
    rec.states.resize(ensemble.size() * ncp);
    rec.kicks.resize(request.kicks.rate > 0.0 ? ensemble.size() : 0);

    const double sep = scene.separation();
    const double capture = config.capture_radius > 0.0 ? config.capture_radius : 0.5 * sep;
    const detail::LossRule loss{capture * capture, config.loss_energy_margin,
                                config.axial_escape * scene.a1_base().rayleigh_range()};
    const double m = ensemble.mass;
    const double inv_m = 1.0 / m;
    const std::uint64_t epoch = ensemble.epoch++;

    auto run_atom = [&](std::size_t i) {
        Atom& atom = ensemble.atoms[i];
        AtomCheckpoint* cps = ncp ? &rec.states[i * ncp] : nullptr;
        std::size_t next_cp = 0;
        auto fill_dead = [&](std::size_t from_cp, const AtomCheckpoint& last) {
            for (std::size_t k = from_cp; k < ncp; ++k) {
                cps[k] = last;
                cps[k].alive = false;
            }
        };
        if (!atom.alive) {
            fill_dead(0, AtomCheckpoint{atom.position, atom.velocity, 0.0, 0.0, false});
            return;
        }
        auto g = ensemble.rng(i, purpose::propagation_base + epoch);
        double t_background = INFINITY;
        if (config.background_lifetime > 0.0) {
            double u = uniform01(g);
            while (u <= 0.0)
                u = uniform01(g);
            t_background = -config.background_lifetime * std::log(u);
        }
        const auto& kp = request.kicks;
        double t_kick = INFINITY;
        std::vector<Kick>* kicks = kp.rate > 0.0 ? &rec.kicks[i] : nullptr;
        auto draw_interval = [&] {
            double u = uniform01(g);
            while (u <= 0.0)
                u = uniform01(g);
            return -std::log(u) / kp.rate;
        };
        if (kicks)
            t_kick = draw_interval();

        Vec3 r = atom.position, v = atom.velocity;
        auto s = scene.potential(r, table[0].a1, table[0].a2);
        double integral = 0.0;
        auto record_cp = [&](std::size_t n, bool alive) {
            while (next_cp < ncp && cp_steps[next_cp] == n)
                cps[next_cp++] = {r, v, s.value, integral, alive};
        };
        record_cp(0, true);
        for (std::size_t n = 0; n < steps; ++n) {
            v -= (0.5 * dt * inv_m) * s.gradient;
            r += dt * v;
            const double u_prev = s.value;
            s = scene.potential(r, table[n + 1].a1, table[n + 1].a2);
            v -= (0.5 * dt * inv_m) * s.gradient;
            integral += 0.5 * dt * (u_prev + s.value);
            if (!std::isfinite(s.value) || !std::isfinite(s.gradient.x) || !std::isfinite(s.gradient.y) ||
                !std::isfinite(s.gradient.z))
                throw PhysicsError("non-finite force on atom " + std::to_string(i) + " at step " + std::to_string(n + 1));
            const double t = static_cast<double>(n + 1) * dt;
            while (t >= t_kick) {
                Gaussian gauss;
                Vec3 dir{gauss(g), gauss(g), gauss(g)};
                dir *= 1.0 / std::sqrt(dir.norm2());
                const Vec3 dp = kp.momentum * (Vec3{0.0, 0.0, 1.0} + dir);
                kicks->push_back({t_kick, v.dot(dp) + 0.5 * inv_m * dp.norm2(), uniform01(g)});
                t_kick += draw_interval();
            }
            const double energy = 0.5 * m * v.norm2() + s.value;
            if (t >= t_background || loss.lost(r, energy, table[n + 1])) {
                atom.alive = false;
                atom.loss_time = t;
                record_cp(n + 1, false);
                fill_dead(next_cp, AtomCheckpoint{r, v, s.value, integral, false});
                break;
            }
            record_cp(n + 1, true);
        }
        atom.position = r;
        atom.velocity = v;
    };

    const std::size_t n_atoms = ensemble.size();
    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(std::max<std::size_t>(1, n_atoms))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n_atoms; ++i)
            run_atom(i);
        return rec;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n_atoms; i += workers)
                    run_atom(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return rec;
}

} // namespace shiftreg::dynamics

#pragma once

// Transport, handover and register experiments built on propagate().

#include "shiftreg/control/mirror.hpp"
#include "shiftreg/control/sequence.hpp"
#include "shiftreg/dynamics/ensemble.hpp"
#include "shiftreg/dynamics/propagate.hpp"
#include "shiftreg/dynamics/scene.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace shiftreg::dynamics {

// Site-binned counts on the regular grid of one lattice.
struct OccupancyGrid {
    int rows = 0;
    int cols = 0;
    double origin_x = 0.0; // x of column 0
    double origin_y = 0.0;
    double pitch = 0.0;
    std::vector<int> counts; // row-major

    int at(int r, int c) const { return counts[static_cast<std::size_t>(r) * cols + c]; }
    long total() const
    {
        long n = 0;
        for (int c : counts)
            n += c;
        return n;
    }
};

// Alive atoms binned to the nearest site of `lattice` (shifted by offset_x);
// atoms farther than `capture` from every site are not counted.
inline OccupancyGrid occupancy(const std::vector<Vec3>& positions, const optics::TrapArraySnapshot& lattice,
                               double offset_x, double capture)
{
    OccupancyGrid g;
    g.rows = lattice.rows;
    g.cols = lattice.cols;
    g.origin_x = lattice.origin_x + offset_x;
    g.origin_y = lattice.origin_y;
    g.pitch = lattice.separation;
    g.counts.assign(static_cast<std::size_t>(g.rows) * g.cols, 0);
    for (const auto& p : positions) {
        const auto idx = lattice.nearest(p.x - offset_x, p.y);
        const double dx = p.x - (lattice.center_x(idx.col) + offset_x);
        const double dy = p.y - lattice.center_y(idx.row);
        if (dx * dx + dy * dy <= capture * capture)
            ++g.counts[static_cast<std::size_t>(idx.row) * g.cols + idx.col];
    }
    return g;
}

struct TransportResult {
    std::size_t initial_atoms = 0;
    std::size_t surviving_atoms = 0;
    double retention = 0.0;         // raw surviving fraction
    double process_retention = 0.0; // retention divided by the background-gas survival over the run
    double retention_error = 0.0;   // binomial standard error
    TemperatureEstimate temperature{};
    Vec3 centroid{};
    Vec3 centroid_shift{}; // mean displacement of surviving atoms
    OccupancyGrid occupancy{};
};

namespace detail {

inline TransportResult summarize(const AtomEnsemble& before, const AtomEnsemble& after, double duration,
                                 const IntegratorConfig& cfg, const optics::TrapArraySnapshot& lattice,
                                 double lattice_offset_x, double capture)
{
    TransportResult r;
    r.initial_atoms = before.alive_count();
    std::vector<Vec3> alive;
    Vec3 sum{}, shift{};
    for (std::size_t i = 0; i < after.size(); ++i) {
        if (!after.atoms[i].alive || !before.atoms[i].alive)
            continue;
        alive.push_back(after.atoms[i].position);
        sum += after.atoms[i].position;
        shift += after.atoms[i].position - before.atoms[i].position;
    }
    r.surviving_atoms = alive.size();
    const double n0 = static_cast<double>(std::max<std::size_t>(1, r.initial_atoms));
    r.retention = static_cast<double>(r.surviving_atoms) / n0;
    r.retention_error = std::sqrt(std::max(0.0, r.retention * (1.0 - r.retention)) / n0);
    const double background = cfg.background_lifetime > 0.0 ? std::exp(-duration / cfg.background_lifetime) : 1.0;
    r.process_retention = r.retention / background;
    if (!alive.empty()) {
        r.centroid = sum * (1.0 / static_cast<double>(alive.size()));
        r.centroid_shift = shift * (1.0 / static_cast<double>(alive.size()));
    }
    if (alive.size() >= 2)
        r.temperature = estimate_temperature(after);
    r.occupancy = occupancy(alive, lattice, lattice_offset_x, capture);
    return r;
}

} // namespace detail

struct TransportRequest {
    double duration = 2e-3;
    control::RampShape shape = control::RampShape::minimum_jerk;
    control::MirrorModel mirror{};
    double settle = 5e-3; // hold after the move before the temperature is taken
    EnsembleSpec ensemble{};
    IntegratorConfig integrator{};
};

struct TransportScanRow {
    double duration = 0.0;
    TransportResult moved{};
    TransportResult fixed{}; // same atoms, same span, trap never moves
    double heating = 0.0;    // moved minus fixed temperature
    double heating_error = 0.0;
};

// One transport over a full trap separation (-a/2 → +a/2) plus the matching
// fixed-trap reference.
inline TransportScanRow run_transport(const Scene& scene, const TransportRequest& req)
{
    const auto geom = scene.geometry();
    control::ShiftSequenceSpec spec;
    spec.transport_duration = req.duration;
    spec.ramp_shape = req.shape;
    const double total = req.duration + req.settle;
    auto moving = control::compile_protocol(control::Protocol::transport, spec, 0.0, total, geom);
    control::mirror_response(req.mirror, moving, req.ensemble.seed);
    auto still = control::compile_protocol(control::Protocol::rest, spec, 0.0, total, geom);

    const double h = scene.half_shift_tilt();
    const auto start = scene.a1_snapshot(-h);
    const auto centre = scene.config().a1.array.central_site();
    const auto e0 = sample_thermal(start, centre, req.ensemble.temperature, req.ensemble.atoms, req.ensemble.seed,
                                   scene.species());
    const double capture = 0.5 * scene.separation();
    TransportScanRow row;
    row.duration = req.duration;
    {
        auto e = e0;
        propagate(e, scene, moving, req.integrator);
        row.moved = detail::summarize(e0, e, total, req.integrator, start, scene.separation(), capture);
    }
    {
        auto e = e0;
        propagate(e, scene, still, req.integrator);
        row.fixed = detail::summarize(e0, e, total, req.integrator, start, 0.0, capture);
    }
    row.heating = row.moved.temperature.value - row.fixed.temperature.value;
    row.heating_error = std::hypot(row.moved.temperature.standard_error, row.fixed.temperature.standard_error);
    return row;
}

// Each duration is repeated `reps` times with consecutive seeds and the
// repetitions are pooled by averaging.
inline std::vector<TransportScanRow> run_transport_scan(const Scene& scene, const std::vector<double>& durations,
                                                        int reps, const TransportRequest& base)
{
    std::vector<TransportScanRow> out;
    for (double d : durations) {
        TransportScanRow acc;
        acc.duration = d;
        double h = 0.0, h2 = 0.0, tm = 0.0, tf = 0.0, ret = 0.0, pret = 0.0;
        for (int k = 0; k < std::max(1, reps); ++k) {
            auto req = base;
            req.duration = d;
            req.ensemble.seed = base.ensemble.seed + static_cast<std::uint64_t>(k);
            auto row = run_transport(scene, req);
            if (k == 0)
                acc = row;
            h += row.heating;
            h2 += row.heating_error * row.heating_error;
            tm += row.moved.temperature.value;
            tf += row.fixed.temperature.value;
            ret += row.moved.retention;
            pret += row.moved.process_retention;
        }
        const double n = std::max(1, reps);
        acc.heating = h / n;
        acc.heating_error = std::sqrt(h2) / n;
        acc.moved.temperature.value = tm / n;
        acc.fixed.temperature.value = tf / n;
        acc.moved.retention = ret / n;
        acc.moved.process_retention = pret / n;
        acc.moved.retention_error /= std::sqrt(n);
        out.push_back(acc);
    }
    return out;
}

struct HandoverRequest {
    control::HandoverDirection direction = control::HandoverDirection::a1_to_a2;
    control::ShiftSequenceSpec spec{};
    double settle = 2e-3;
    EnsembleSpec ensemble{};
    IntegratorConfig integrator{};
};

// Atoms start in the giving array's overlap site and end in the receiver's.
// The scene's symmetric flag selects the geometry.
inline TransportResult run_handover(const Scene& scene, const HandoverRequest& req)
{
    auto spec = req.spec;
    spec.symmetric_handover = scene.config().symmetric;
    const auto w = control::compile_handover(req.direction, spec, req.settle, scene.geometry());
    const double h = scene.half_shift_tilt();
    const auto centre = scene.config().a1.array.central_site();
    const bool forward = req.direction == control::HandoverDirection::a1_to_a2;
    const auto giver = forward ? scene.a1_snapshot(+h) : scene.a2();
    const auto e0 = sample_thermal(giver, centre, req.ensemble.temperature, req.ensemble.atoms, req.ensemble.seed,
                                   scene.species());
    auto e = e0;
    propagate(e, scene, w, req.integrator);
    const auto receiver = forward ? scene.a2() : scene.a1_snapshot(-h);
    return detail::summarize(e0, e, w.duration(), req.integrator, receiver, 0.0, 0.5 * scene.separation());
}

struct RegisterRequest {
    int cycles = 3;
    control::ShiftSequenceSpec spec{};
    control::MirrorModel mirror = control::MirrorModel::perfect();
    int load_rows = 1;      // rows of the start column that get loaded, centred on the beam
    int start_column = 0;   // relative to the central lens; default puts the path around the beam centre
    bool auto_start = true; // start_column = -floor(cycles / 2)
    EnsembleSpec ensemble{};
    IntegratorConfig integrator{};
};

struct RegisterResult {
    TransportResult result{};    // after the last cycle
    TransportResult baseline{};  // same atoms held in the start site for the same time
    std::vector<OccupancyGrid> frames; // after 0, 1, ..., k cycles
    std::vector<double> frame_times;
    double expected_shift = 0.0;  // k·a
    double heating = 0.0;         // adiabatically referred, see below
    double heating_error = 0.0;
};

inline std::vector<optics::SiteIndex> register_load_sites(const Scene& scene, const RegisterRequest& req)
{
    const auto c = scene.config().a1.array.central_site();
    const int col = c.col + (req.auto_start ? -(req.cycles / 2) : req.start_column);
    std::vector<optics::SiteIndex> sites;
    for (int r = 0; r < std::max(1, req.load_rows); ++r)
        sites.push_back({c.row + r - (std::max(1, req.load_rows) - 1) / 2, col});
    return sites;
}

// k bucket-chain cycles. Heating is the final temperature scaled back to the
// start site's trap frequency (the adiabatic invariant E/Ω), minus the
// temperature of the same atoms held at the start; the beam envelope makes
// the end site shallower or deeper than the start.
inline RegisterResult run_register(const Scene& scene, const RegisterRequest& req)
{
    const auto geom = scene.geometry();
    if (req.cycles < 0)
        throw PhysicsError("cycle count must be non-negative");
    if (req.cycles > geom.capacity)
        throw CapacityError("cycle_count " + std::to_string(req.cycles) + " exceeds register capacity " +
                            std::to_string(geom.capacity));
    const double h = scene.half_shift_tilt();
    auto spec = req.spec;
    spec.symmetric_handover = scene.config().symmetric;
    control::ChannelWaveform w;
    std::vector<double> frame_times{0.0};
    if (req.cycles == 0) {
        w = control::compile_hold(spec.handover_duration, -h, 1.0, 0.0, spec.sample_rate, scene.a2_tilt());
    } else {
        spec.cycle_count = req.cycles;
        w = control::compile_cycle(spec, geom);
        for (const auto* s : w.segments_of(control::Phase::handover_21))
            frame_times.push_back(s->t_end);
    }
    control::mirror_response(req.mirror, w, req.ensemble.seed);
    const auto start = scene.a1_snapshot(-h);
    const auto sites = register_load_sites(scene, req);
    for (const auto& s : sites)
        if (!start.contains(s) || !start.contains({s.row, s.col + req.cycles}))
            throw CapacityError("register path leaves the lens grid");
    const auto e0 =
        sample_thermal(start, sites, req.ensemble.temperature, req.ensemble.atoms, req.ensemble.seed, scene.species());
    auto e = e0;
    PropagationRequest pr;
    pr.checkpoints = frame_times;
    const auto rec = propagate(e, scene, w, req.integrator, pr);

    RegisterResult out;
    out.expected_shift = req.cycles * scene.separation();
    out.frame_times = rec.checkpoint_times;
    const double capture = 0.5 * scene.separation();
    for (std::size_t k = 0; k < rec.checkpoint_count(); ++k) {
        std::vector<Vec3> alive;
        for (std::size_t i = 0; i < rec.atom_count; ++i)
            if (rec.at(i, k).alive)
                alive.push_back(rec.at(i, k).position);
        out.frames.push_back(occupancy(alive, start, 0.0, capture));
    }
    out.result = detail::summarize(e0, e, w.duration(), req.integrator, start, 0.0, capture);

    auto still = control::compile_hold(w.duration(), -h, 1.0, 0.0, spec.sample_rate, scene.a2_tilt());
    auto eb = e0;
    propagate(eb, scene, still, req.integrator);
    out.baseline = detail::summarize(e0, eb, w.duration(), req.integrator, start, 0.0, capture);

    double ratio = 1.0;
    {
        double d0 = 0.0, d1 = 0.0;
        for (const auto& s : sites) {
            d0 += start.depth(s);
            d1 += start.depth({s.row, s.col + req.cycles});
        }
        ratio = std::sqrt(d0 / d1); // Ω_start / Ω_end, same waist
    }
    out.heating = out.result.temperature.value * ratio - out.baseline.temperature.value;
    out.heating_error =
        std::hypot(out.result.temperature.standard_error * ratio, out.baseline.temperature.standard_error);
    return out;
}

struct CalibrationPoint {
    double depth_factor = 0.0;
    TransportResult result{};
};

// Sweeps the half-pitch depth factor of the tilt degradation law and runs the
// asymmetric A1→A2 handover at each value.
inline std::vector<CalibrationPoint> sweep_degradation(SceneConfig base, const std::vector<double>& depth_factors,
                                                       const HandoverRequest& req)
{
    std::vector<CalibrationPoint> out;
    base.symmetric = false;
    for (double d : depth_factors) {
        auto cfg = base;
        cfg.degradation.depth_factor_at_half_pitch = d;
        Scene scene(cfg);
        auto r = req;
        r.direction = control::HandoverDirection::a1_to_a2;
        out.push_back({d, run_handover(scene, r)});
    }
    return out;
}

} // namespace shiftreg::dynamics

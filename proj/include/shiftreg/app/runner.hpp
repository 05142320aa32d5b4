#pragma once

// Orchestration: one ExperimentConfig in, one Bundle out. Every experiment
// kind writes its tables, summary.tsv (metric, value, error, unit),
// checks.tsv (reference comparisons) and config.resolved.ini. Nothing in the
// bundle depends on the wall clock or on the worker count.

#include "shiftreg/app/bundle.hpp"
#include "shiftreg/app/config.hpp"
#include "shiftreg/app/image.hpp"
#include "shiftreg/app/version.hpp"
#include "shiftreg/coherence/study.hpp"
#include "shiftreg/control/waveform_io.hpp"
#include "shiftreg/dynamics/scenarios.hpp"
#include "shiftreg/io/format.hpp"
#include "shiftreg/optics/power.hpp"
#include "shiftreg/physics/dipole.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>
#include <string>
#include <vector>

namespace shiftreg::app {

struct Metric {
    std::string name;
    double value = 0.0;
    double error = 0.0; // 0 when not applicable
    std::string unit;
};

struct Check {
    std::string name;
    bool pass = false;
    std::string measured;
    std::string requirement;
};

struct RunResult {
    Bundle bundle;
    std::vector<Metric> metrics;
    std::vector<Check> checks;

    bool all_pass() const
    {
        for (const auto& c : checks)
            if (!c.pass)
                return false;
        return true;
    }
};

// Tab-separated table with a header row.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    Table& row(std::vector<std::string> cells)
    {
        if (cells.size() != columns_.size())
            throw std::logic_error("table row width mismatch");
        rows_.push_back(std::move(cells));
        return *this;
    }

    std::string str(const std::string& comment = {}) const
    {
        std::ostringstream os;
        if (!comment.empty())
            os << "# " << comment << "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i)
            os << (i ? "\t" : "") << columns_[i];
        os << "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i)
                os << (i ? "\t" : "") << r[i];
            os << "\n";
        }
        return os.str();
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

namespace detail {

inline std::string num(double v) { return io::sig(v, 9); }

class Recorder {
public:
    explicit Recorder(RunResult& r) : r_(r) {}

    void metric(std::string name, double value, double error, std::string unit)
    {
        r_.metrics.push_back({std::move(name), value, error, std::move(unit)});
    }

    void check(std::string name, bool pass, std::string measured, std::string requirement)
    {
        r_.checks.push_back({std::move(name), pass, std::move(measured), std::move(requirement)});
    }

    // |value - target| <= rel·target
    void within(const std::string& name, double value, double target, double rel, const std::string& unit)
    {
        check(name, std::abs(value - target) <= rel * std::abs(target), io::sig(value, 5) + " " + unit,
              io::sig(target, 4) + " " + unit + " ± " + io::sig(100.0 * rel, 3) + "%");
    }

private:
    RunResult& r_;
};

inline coherence::CoherenceScenario coherence_scenario(const ExperimentConfig& c)
{
    coherence::CoherenceScenario sc;
    sc.scene = c.scene;
    sc.ensemble = c.ensemble;
    sc.integrator = c.integrator;
    sc.spec = c.spec;
    sc.mirror = c.mirror;
    sc.timing = c.coherence.timing;
    sc.shots = c.coherence.shots;
    return sc;
}

inline std::string curve_table(const coherence::ContrastCurve& c, const char* abscissa)
{
    Table t({abscissa, "contrast", "sigma", "fit"});
    for (std::size_t i = 0; i < c.abscissa.size(); ++i)
        t.row({num(c.abscissa[i] * 1e3), num(c.contrast[i]), num(c.sigma[i]),
               c.fitted ? num(coherence::gaussian_model(c.fit.c0, c.fit.t2, c.abscissa[i])) : "nan"});
    return t.str(c.label);
}

inline void run_trap_parameters(const ExperimentConfig& c, RunResult& out, Recorder& rec)
{
    const auto& a = c.scene.a1;
    const auto& sp = c.scene.species;
    const auto centre = a.array.central_site();
    const double p = optics::per_lens_power(a.beam, a.array, centre);
    const double u = physics::dipole_potential_depth(p, a.waist, a.beam.wavelength, sp);
    const auto f = physics::trap_frequencies(u, a.waist, a.beam.wavelength, sp);
    const double zr = physics::rayleigh_range(a.waist, a.beam.wavelength);
    const double disp = c.scene.projection.displacement(a.array, 22e-6);
    const dynamics::Scene scene(c.scene);

    rec.metric("central_power", p * 1e3, 0, "mW");
    rec.metric("depth", -u / physics::kB * 1e6, 0, "uK");
    rec.metric("radial_frequency", f.radial / physics::two_pi * 1e-3, 0, "kHz");
    rec.metric("axial_frequency", f.axial / physics::two_pi, 0, "Hz");
    rec.metric("rayleigh_range", zr * 1e6, 0, "um");
    rec.metric("scattering_rate", physics::photon_scattering_rate(u, a.beam.wavelength, sp), 0, "1/s");
    rec.metric("trap_separation", scene.separation() * 1e6, 0, "um");
    rec.metric("half_shift_tilt", scene.half_shift_tilt() * 1e3, 0, "mrad");
    rec.metric("displacement_per_22urad", disp * 1e9, 0, "nm");
    rec.metric("register_capacity", scene.capacity(), 0, "cycles");

    rec.within("central trap power", p * 1e3, 5.7, 0.05, "mW");
    rec.within("central trap depth", -u / physics::kB * 1e6, 430.0, 0.05, "uK");
    rec.within("radial trap frequency", f.radial / physics::two_pi * 1e-3, 17.0, 0.05, "kHz");
    rec.within("axial trap frequency", f.axial / physics::two_pi, 820.0, 0.05, "Hz");
    rec.check("scanner resolution", disp <= 10e-9, io::sig(disp * 1e9, 4) + " nm per 22 urad", "<= 10 nm");

    Table t({"col_offset", "x_um", "power_mW", "depth_uK", "radial_kHz", "axial_Hz"});
    for (int col = 0; col < a.array.cols; ++col) {
        const double pc = optics::per_lens_power(a.beam, a.array, {centre.row, col});
        const double uc = physics::dipole_potential_depth(pc, a.waist, a.beam.wavelength, sp);
        const auto fc = physics::trap_frequencies(uc, a.waist, a.beam.wavelength, sp);
        t.row({std::to_string(col - centre.col), num((col - centre.col) * scene.separation() * 1e6), num(pc * 1e3),
               num(-uc / physics::kB * 1e6), num(fc.radial / physics::two_pi * 1e-3), num(fc.axial / physics::two_pi)});
    }
    out.bundle.add("central_row.tsv", t.str("traps along the central row of A1 at zero tilt"));
}

inline void run_transport_scan(const ExperimentConfig& c, RunResult& out, Recorder& rec)
{
    const dynamics::Scene scene(c.scene);
    dynamics::TransportRequest base;
    base.shape = c.spec.ramp_shape;
    base.mirror = c.mirror;
    base.settle = c.settle;
    base.ensemble = c.ensemble;
    base.integrator = c.integrator;
    auto durations = c.experiment.durations;
    std::sort(durations.begin(), durations.end());
    const auto rows = dynamics::run_transport_scan(scene, durations, c.experiment.repetitions, base);

    Table t({"duration_ms", "retention", "retention_error", "process_retention", "T_moved_uK", "T_fixed_uK",
             "heating_uK", "heating_error_uK"});
    for (const auto& r : rows) {
        t.row({num(r.duration * 1e3), num(r.moved.retention), num(r.moved.retention_error),
               num(r.moved.process_retention), num(r.moved.temperature.value * 1e6),
               num(r.fixed.temperature.value * 1e6), num(r.heating * 1e6), num(r.heating_error * 1e6)});
        const std::string tag = "@" + io::sig(r.duration * 1e3, 4) + "ms";
        rec.metric("heating" + tag, r.heating * 1e6, r.heating_error * 1e6, "uK");
        rec.metric("process_retention" + tag, r.moved.process_retention, r.moved.retention_error, "");
    }
    out.bundle.add("transport_scan.tsv", t.str("transport over one trap separation, " +
                                               std::string(control::to_string(c.spec.ramp_shape)) + " ramp"));

    // Commanded and actual tilt of the shortest move, for inspection.
    {
        control::ShiftSequenceSpec spec;
        spec.transport_duration = durations.front();
        spec.ramp_shape = c.spec.ramp_shape;
        auto w = control::compile_protocol(control::Protocol::transport, spec, 0.0, durations.front() + c.settle,
                                           scene.geometry());
        control::mirror_response(c.mirror, w, c.ensemble.seed);
        std::ostringstream os;
        control::write_waveform(os, w);
        out.bundle.add("waveform_shortest.tsv", os.str());
    }

    bool heat_mono = true, loss_mono = true;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const auto& a = rows[i];
        const auto& b = rows[i + 1];
        if (a.heating < b.heating - 2.0 * std::hypot(a.heating_error, b.heating_error))
            heat_mono = false;
        const double la = 1.0 - a.moved.process_retention, lb = 1.0 - b.moved.process_retention;
        if (la < lb - 2.0 * std::hypot(a.moved.retention_error, b.moved.retention_error))
            loss_mono = false;
    }
    rec.check("heating decreases with duration", heat_mono, heat_mono ? "monotone" : "not monotone",
              "non-increasing within 2 sigma");
    rec.check("loss decreases with duration", loss_mono, loss_mono ? "monotone" : "not monotone",
              "non-increasing within 2 sigma");
    const dynamics::TransportScanRow* r05 = nullptr;
    const dynamics::TransportScanRow* r2 = nullptr;
    for (const auto& r : rows) {
        if (std::abs(r.duration - 0.5e-3) < 1e-9)
            r05 = &r;
        if (std::abs(r.duration - 2e-3) < 1e-9)
            r2 = &r;
    }
    if (r05 && r2) {
        const double d = (r05->heating - r2->heating) * 1e6;
        rec.check("non-adiabatic onset", d > 5.0, io::sig(d, 4) + " uK (0.5 ms minus 2 ms)", "> 5 uK");
    }
    if (r2) {
        rec.check("2 ms transport retention", r2->moved.process_retention > 0.99,
                  io::sig(r2->moved.process_retention, 5), "> 0.99");
        if (c.mirror.ideal)
            rec.check("2 ms transport heating", r2->heating < 1.5e-6, io::sig(r2->heating * 1e6, 4) + " uK",
                      "< 1.5 uK");
    }
}

inline void run_handover(const ExperimentConfig& c, RunResult& out, Recorder& rec)
{
    dynamics::HandoverRequest req;
    req.spec = c.spec;
    req.settle = c.settle;
    req.ensemble = c.ensemble;
    req.integrator = c.integrator;

    Table t({"geometry", "direction", "retention", "retention_error", "process_retention", "T_uK", "T_error_uK"});
    for (bool sym : c.experiment.geometries) {
        auto cfg = c.scene;
        cfg.symmetric = sym;
        const dynamics::Scene scene(cfg);
        const std::string g = sym ? "symmetric" : "asymmetric";
        for (auto dir : c.experiment.directions) {
            req.direction = dir;
            const auto r = dynamics::run_handover(scene, req);
            t.row({g, control::to_string(dir), num(r.retention), num(r.retention_error), num(r.process_retention),
                   num(r.temperature.value * 1e6), num(r.temperature.standard_error * 1e6)});
            const std::string name = g + "_" + direction_key(dir);
            rec.metric("process_retention@" + name, r.process_retention, r.retention_error, "");
            const bool lossy = !sym && dir == control::HandoverDirection::a1_to_a2;
            if (lossy && c.experiment.depth_factors.empty())
                rec.within("asymmetric A1->A2 retention", r.process_retention, 0.80, 0.03 / 0.80, "");
            else if (!lossy)
                rec.check(g + " " + control::to_string(dir) + " retention", r.process_retention > 0.99,
                          io::sig(r.process_retention, 5), "> 0.99");
        }
    }
    out.bundle.add("handover.tsv", t.str("handover retention; process retention excludes background-gas loss"));

    if (c.experiment.depth_factors.empty())
        return;
    const auto sweep = dynamics::sweep_degradation(c.scene, c.experiment.depth_factors, req);
    Table s({"depth_factor", "retention", "retention_error", "process_retention", "T_uK"});
    for (const auto& p : sweep)
        s.row({num(p.depth_factor), num(p.result.retention), num(p.result.retention_error),
               num(p.result.process_retention), num(p.result.temperature.value * 1e6)});
    out.bundle.add("degradation_sweep.tsv", s.str("asymmetric A1->A2 handover versus half-pitch depth factor"));

    // One-point calibration: the depth factor at which the sweep crosses 80 %.
    double factor = std::nan("");
    for (std::size_t i = 0; i + 1 < sweep.size(); ++i) {
        const double ra = sweep[i].result.process_retention - 0.8;
        const double rb = sweep[i + 1].result.process_retention - 0.8;
        if (ra == 0.0)
            factor = sweep[i].depth_factor;
        else if (ra * rb < 0.0)
            factor = sweep[i].depth_factor + ra / (ra - rb) * (sweep[i + 1].depth_factor - sweep[i].depth_factor);
        if (!std::isnan(factor))
            break;
    }
    double retention = 0.0, err = 0.0;
    if (std::isnan(factor)) {
        double best = 1e9;
        for (const auto& p : sweep)
            if (std::abs(p.result.process_retention - 0.8) < best) {
                best = std::abs(p.result.process_retention - 0.8);
                retention = p.result.process_retention;
                err = p.result.retention_error;
                factor = p.depth_factor;
            }
        rec.metric("calibrated_depth_factor", std::nan(""), 0, "");
    } else {
        auto cfg = c.scene;
        cfg.symmetric = false;
        cfg.degradation.depth_factor_at_half_pitch = factor;
        auto r2 = req;
        r2.direction = control::HandoverDirection::a1_to_a2;
        const auto r = dynamics::run_handover(dynamics::Scene(cfg), r2);
        retention = r.process_retention;
        err = r.retention_error;
        rec.metric("calibrated_depth_factor", factor, 0, "");
    }
    rec.metric("calibrated_a1_to_a2_retention", retention, err, "");
    rec.within("asymmetric A1->A2 retention after calibration", retention, 0.80, 0.03 / 0.80, "");
}

inline void run_register(const ExperimentConfig& c, RunResult& out, Recorder& rec)
{
    const dynamics::Scene scene(c.scene);
    dynamics::RegisterRequest req;
    req.cycles = c.experiment.cycles;
    req.spec = c.spec;
    req.mirror = c.mirror;
    req.load_rows = c.experiment.load_rows;
    req.ensemble = c.ensemble;
    req.integrator = c.integrator;
    const auto r = dynamics::run_register(scene, req);

    Table t({"cycles", "expected_shift_um", "centroid_shift_um", "retention", "process_retention", "heating_uK",
             "heating_error_uK", "T_end_uK", "T_baseline_uK"});
    t.row({std::to_string(req.cycles), num(r.expected_shift * 1e6), num(r.result.centroid_shift.x * 1e6),
           num(r.result.retention), num(r.result.process_retention), num(r.heating * 1e6),
           num(r.heating_error * 1e6), num(r.result.temperature.value * 1e6),
           num(r.baseline.temperature.value * 1e6)});
    out.bundle.add("register.tsv", t.str(c.scene.symmetric ? "symmetric geometry" : "asymmetric geometry"));
    rec.metric("centroid_shift", r.result.centroid_shift.x * 1e6, 0, "um");
    rec.metric("expected_shift", r.expected_shift * 1e6, 0, "um");
    rec.metric("heating", r.heating * 1e6, r.heating_error * 1e6, "uK");
    rec.metric("process_retention", r.result.process_retention, r.result.retention_error, "");

    const auto images = render_register_images(r, c.image);
    double peak = 0.0;
    for (const auto& img : images)
        peak = std::max(peak, img.peak());
    Table f({"frame", "time_ms", "atoms_counted", "image_total", "image_centroid_x_um", "image_centroid_y_um"});
    std::vector<double> cx;
    for (std::size_t k = 0; k < images.size(); ++k) {
        const auto& img = images[k];
        const auto [x, y] = img.centroid();
        cx.push_back(x);
        f.row({std::to_string(k), num(r.frame_times[k] * 1e3), std::to_string(r.frames[k].total()), num(img.total()),
               num(x * 1e6), num(y * 1e6)});
        std::ostringstream pgm, grid, sites;
        write_pgm(pgm, img, peak);
        write_image_grid(grid, img);
        write_occupancy(sites, r.frames[k]);
        out.bundle.add("frame_" + std::to_string(k) + ".pgm", pgm.str());
        out.bundle.add("frame_" + std::to_string(k) + ".image.tsv", grid.str());
        out.bundle.add("frame_" + std::to_string(k) + ".sites.tsv", sites.str());
    }
    out.bundle.add("frames.tsv", f.str("frame k is taken after k shift cycles"));

    const double tol = 0.5e-6;
    const double dev = std::abs(r.result.centroid_shift.x - r.expected_shift);
    rec.check("register displacement", dev <= tol,
              io::sig(r.result.centroid_shift.x * 1e6, 6) + " um (expected " + io::sig(r.expected_shift * 1e6, 6) + ")",
              "within 0.5 um of k*a");
    rec.check("register heating", r.heating < 2e-6, io::sig(r.heating * 1e6, 4) + " uK", "< 2 uK");
    bool steps = cx.size() >= 2;
    for (std::size_t k = 1; k < cx.size(); ++k)
        steps = steps && std::abs(cx[k] - cx[k - 1] - scene.separation()) <= tol;
    if (cx.size() >= 2)
        rec.check("image centroid advances one site per cycle", steps,
                  io::sig((cx.back() - cx.front()) / (cx.size() - 1) * 1e6, 6) + " um per frame",
                  io::sig(scene.separation() * 1e6, 4) + " um ± 0.5 um");
}

inline void run_ramsey(const ExperimentConfig& c, RunResult& out, Recorder& rec)
{
    const auto sc = coherence_scenario(c);
    auto model = coherence::make_dephasing_model(c.scene.a1.beam.wavelength, c.scene.species, c.coherence.heating_rate);
    model.detuning_jitter = c.coherence.detuning_jitter;
    std::vector<double> gaps;
    const int steps = static_cast<int>(std::floor(c.coherence.ramsey_gap_max / c.coherence.ramsey_gap_step + 1e-9));
    for (int i = 0; i <= steps; ++i)
        gaps.push_back(i * c.coherence.ramsey_gap_step);
    std::vector<coherence::PulseSequence> seqs;
    for (double g : gaps)
        seqs.push_back(coherence::PulseSequence::ramsey(g, sc.timing));
    const coherence::TrajectoryBank bank(sc, control::Protocol::rest, true, coherence::required_times(seqs),
                                         seqs.back().end(), model.kick_rate(), model.recoil_momentum);
    auto curve = coherence::ramsey_curve(bank, model, sc.timing, gaps, sc.shots, c.ensemble.seed);
    out.bundle.add("ramsey.tsv", curve_table(curve, "gap_ms"));
    rec.metric("eta", model.eta, 0, "");
    rec.metric("trap_bottom_shift", model.eta * std::abs(bank.trap_bottom()) / physics::hbar / physics::two_pi, 0,
               "Hz");
    try {
        const double t = coherence::one_over_e_time(curve);
        rec.metric("one_over_e_time", t * 1e3, 0, "ms");
        rec.check("Ramsey 1/e time", t >= 2.5e-3 && t <= 10e-3, io::sig(t * 1e3, 4) + " ms", "2.5 to 10 ms");
    } catch (const StatisticsError&) {
        rec.metric("one_over_e_time", std::nan(""), 0, "ms");
        rec.check("Ramsey 1/e time", false, "no 1/e crossing within the scan", "2.5 to 10 ms");
    }
}

inline void run_echo(const ExperimentConfig& c, RunResult& out, Recorder& rec)
{
    coherence::CoherenceStudy st(coherence_scenario(c), c.coherence.t_pi);
    st.model().detuning_jitter = c.coherence.detuning_jitter;
    Table cal({"heating_rate_uK_per_s", "rest_T2_ms", "target_T2_ms", "iterations"});
    if (c.coherence.calibrate_t2 > 0.0) {
        const auto r = st.calibrate(c.coherence.calibrate_t2);
        cal.row({num(r.heating_rate * 1e6), num(r.t2 * 1e3), num(c.coherence.calibrate_t2 * 1e3),
                 std::to_string(r.iterations)});
        rec.metric("heating_rate", r.heating_rate * 1e6, 0, "uK/s");
        rec.check("heating calibration", std::abs(r.t2 - c.coherence.calibrate_t2) <= 2e-3,
                  io::sig(r.t2 * 1e3, 5) + " ms", io::sig(c.coherence.calibrate_t2 * 1e3, 4) + " ± 2 ms");
    } else {
        st.model().heating_rate = c.coherence.heating_rate;
        cal.row({num(c.coherence.heating_rate * 1e6), "nan", "nan", "0"});
        rec.metric("heating_rate", c.coherence.heating_rate * 1e6, 0, "uK/s");
    }
    out.bundle.add("calibration.tsv", cal.str("heating rate, frozen for all protocols"));

    auto protocols = c.experiment.protocols;
    if (protocols.empty())
        protocols = {control::Protocol::transport};
    Table fits({"protocol", "T2_rest_ms", "T2_rest_error_ms", "R2_rest", "T2_moved_ms", "T2_moved_error_ms",
                "R2_moved", "ratio", "ratio_error"});
    for (auto p : protocols) {
        const auto cmp = st.compare(p);
        const std::string name = control::to_string(p);
        out.bundle.add("echo_rest_" + name + ".tsv", curve_table(cmp.rest, "2t_pi_ms"));
        out.bundle.add("echo_" + name + ".tsv", curve_table(cmp.moved, "2t_pi_ms"));
        if (!cmp.rest.fitted || !cmp.moved.fitted) {
            fits.row({name, "nan", "nan", "nan", "nan", "nan", "nan", "nan", "nan"});
            rec.check("T2' ratio " + name, false, "fit failed", "1.00 ± 0.05");
            continue;
        }
        fits.row({name, num(cmp.rest.fit.t2 * 1e3), num(cmp.rest.fit.t2_error * 1e3), num(cmp.rest.fit.r_squared),
                  num(cmp.moved.fit.t2 * 1e3), num(cmp.moved.fit.t2_error * 1e3), num(cmp.moved.fit.r_squared),
                  num(cmp.ratio), num(cmp.ratio_error)});
        rec.metric("T2_rest@" + name, cmp.rest.fit.t2 * 1e3, cmp.rest.fit.t2_error * 1e3, "ms");
        rec.metric("T2_moved@" + name, cmp.moved.fit.t2 * 1e3, cmp.moved.fit.t2_error * 1e3, "ms");
        rec.metric("ratio@" + name, cmp.ratio, cmp.ratio_error, "");
        rec.check("T2' ratio " + name, std::abs(cmp.ratio - 1.0) <= 0.05,
                  io::sig(cmp.ratio, 4) + " ± " + io::sig(cmp.ratio_error, 2), "1.00 ± 0.05");
        const double r2 = std::min(cmp.rest.fit.r_squared, cmp.moved.fit.r_squared);
        rec.check("Gaussian fit quality " + name, r2 > 0.98, "R2 " + io::sig(r2, 4), "> 0.98");
    }
    out.bundle.add("fits.tsv", fits.str("Gaussian fits C0 exp(-(t/T2')^2) of the echo curves"));
}

inline std::string summary_table(const RunResult& r)
{
    Table t({"metric", "value", "error", "unit"});
    for (const auto& m : r.metrics)
        t.row({m.name, num(m.value), num(m.error), m.unit.empty() ? "-" : m.unit});
    return t.str();
}

inline std::string checks_table(const RunResult& r)
{
    Table t({"check", "result", "measured", "requirement"});
    for (const auto& c : r.checks)
        t.row({c.name, c.pass ? "PASS" : "FAIL", c.measured, c.requirement});
    return t.str("comparison with the reference values of the bundled recipes");
}

} // namespace detail

// Runs the experiment and assembles the bundle in memory.
inline RunResult execute(const ExperimentConfig& c)
{
    c.validate();
    RunResult out;
    detail::Recorder rec(out);
    switch (c.kind) {
    case ExperimentKind::trap_parameters: detail::run_trap_parameters(c, out, rec); break;
    case ExperimentKind::transport_scan: detail::run_transport_scan(c, out, rec); break;
    case ExperimentKind::handover: detail::run_handover(c, out, rec); break;
    case ExperimentKind::register_shift: detail::run_register(c, out, rec); break;
    case ExperimentKind::ramsey: detail::run_ramsey(c, out, rec); break;
    case ExperimentKind::echo:
    case ExperimentKind::protocols: detail::run_echo(c, out, rec); break;
    }
    out.bundle.add("config.resolved.ini", write_resolved(c));
    out.bundle.add("summary.tsv", detail::summary_table(out));
    out.bundle.add("checks.tsv", detail::checks_table(out));
    return out;
}

inline std::string provenance(const ExperimentConfig& c, const std::string& source, double runtime_s)
{
    std::ostringstream os;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    os << "tool = shiftreg " << version << "\nschema = " << schema_version << "\nexperiment = " << c.name
       << "\nkind = " << to_string(c.kind) << "\nsource = " << source << "\nseed = " << c.ensemble.seed
       << "\nthreads = " << c.integrator.threads << "\ncompiler = " << __VERSION__ << "\ncreated = " << stamp
       << "\nruntime_s = " << io::sig(runtime_s, 4) << "\n";
    return os.str();
}

// execute + commit_bundle. `source` is recorded in the provenance stamp.
inline RunResult run(const ExperimentConfig& c, const std::filesystem::path& out_dir, const std::string& source)
{
    const auto t0 = std::chrono::steady_clock::now();
    auto r = execute(c);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    commit_bundle(r.bundle, provenance(c, source, dt), out_dir);
    return r;
}

} // namespace shiftreg::app

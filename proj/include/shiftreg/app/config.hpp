#pragma once

// Resolved experiment configuration. A config file is validated against the
// schema, then every value is resolved (defaults filled in, units converted to
// SI) into ExperimentConfig. write_resolved() emits the canonical form that
// parses back to the same ExperimentConfig.

#include "shiftreg/app/schema.hpp"
#include "shiftreg/coherence/sequence.hpp"
#include "shiftreg/control/mirror.hpp"
#include "shiftreg/control/sequence.hpp"
#include "shiftreg/dynamics/ensemble.hpp"
#include "shiftreg/dynamics/propagate.hpp"
#include "shiftreg/dynamics/scene.hpp"
#include "shiftreg/error.hpp"
#include "shiftreg/io/format.hpp"
#include "shiftreg/io/keyvalue.hpp"
#include "shiftreg/physics/constants.hpp"
#include "shiftreg/physics/species.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace shiftreg::app {

enum class ExperimentKind { trap_parameters, transport_scan, handover, register_shift, ramsey, echo, protocols };

inline const char* to_string(ExperimentKind k)
{
    switch (k) {
    case ExperimentKind::trap_parameters: return "trap_parameters";
    case ExperimentKind::transport_scan: return "transport_scan";
    case ExperimentKind::handover: return "handover";
    case ExperimentKind::register_shift: return "register";
    case ExperimentKind::ramsey: return "ramsey";
    case ExperimentKind::echo: return "echo";
    case ExperimentKind::protocols: return "protocols";
    }
    return "?";
}

inline ExperimentKind experiment_kind_from(const std::string& s, int line = 0)
{
    for (auto k : {ExperimentKind::trap_parameters, ExperimentKind::transport_scan, ExperimentKind::handover,
                   ExperimentKind::register_shift, ExperimentKind::ramsey, ExperimentKind::echo,
                   ExperimentKind::protocols})
        if (s == to_string(k))
            return k;
    throw ConfigError("unknown experiment kind '" + s +
                          "' (expected trap_parameters, transport_scan, handover, register, ramsey, echo or protocols)",
                      line, "experiment.kind");
}

inline const char* direction_key(control::HandoverDirection d)
{
    return d == control::HandoverDirection::a1_to_a2 ? "a1_to_a2" : "a2_to_a1";
}

inline control::HandoverDirection direction_from(const std::string& s, int line = 0)
{
    for (auto d : {control::HandoverDirection::a1_to_a2, control::HandoverDirection::a2_to_a1})
        if (s == direction_key(d))
            return d;
    throw ConfigError("unknown handover direction '" + s + "' (expected a1_to_a2 or a2_to_a1)", line,
                      "experiment.directions");
}

struct ImageSpec {
    int pixels_per_site = 5;
    double blur = 0.0; // m, Gaussian point-spread sigma in the cell plane
    int window = 11;   // sites across, centred on the central lens; 0 = whole array
};

struct CoherenceSettings {
    coherence::PulseTiming timing{};
    double heating_rate = 0.0;  // K/s, used when calibrate_t2 is 0
    double calibrate_t2 = 0.0;  // s; > 0 calibrates the heating rate on atoms at rest
    std::vector<double> t_pi;   // s
    double detuning_jitter = 0.0; // rad/s
    int shots = 1;
    double ramsey_gap_max = 20e-3;
    double ramsey_gap_step = 0.25e-3;
};

struct ExperimentSettings {
    std::vector<double> durations;
    int repetitions = 1;
    std::vector<control::HandoverDirection> directions;
    std::vector<bool> geometries; // symmetric flag per entry
    int cycles = 3;
    int load_rows = 1;
    std::vector<double> depth_factors;
    std::vector<control::Protocol> protocols;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::trap_parameters;
    std::string name;
    dynamics::SceneConfig scene{};
    control::ShiftSequenceSpec spec{};
    control::MirrorModel mirror{};
    dynamics::EnsembleSpec ensemble{};
    dynamics::IntegratorConfig integrator{};
    double settle = 5e-3;
    CoherenceSettings coherence{};
    ExperimentSettings experiment{};
    ImageSpec image{};
    std::string output_directory;

    // Semantic checks that need more than the schema.
    void validate() const
    {
        scene.species.validate();
        for (const auto* a : {&scene.a1, &scene.a2}) {
            a->array.validate();
            a->beam.validate();
        }
        scene.projection.telescope.validate();
        scene.degradation.validate();
        spec.validate();
        mirror.validate();
        integrator.validate();
        if (!(scene.a1.waist > 0.0))
            throw PhysicsError("optics.waist must be positive");
        if (!(scene.projection.measured_separation >= 0.0))
            throw PhysicsError("optics.measured_separation must be non-negative");
        if (scene.nearest_sites < 1)
            throw PhysicsError("optics.nearest_sites must be at least 1");
        if (ensemble.atoms < 1 && kind != ExperimentKind::trap_parameters)
            throw PhysicsError("dynamics.atoms must be at least 1");
        if (!(ensemble.temperature >= 0.0))
            throw PhysicsError("dynamics.temperature must be non-negative");
        if (!(settle >= 0.0))
            throw PhysicsError("dynamics.settle must be non-negative");
        if (!(coherence.timing.pi_duration > 0.0))
            throw PhysicsError("coherence.pi_duration must be positive");
        if (!(coherence.heating_rate >= 0.0) || !(coherence.calibrate_t2 >= 0.0))
            throw PhysicsError("coherence heating rate and calibration target must be non-negative");
        if (coherence.shots < 1)
            throw PhysicsError("coherence.shots must be at least 1");
        if (!(coherence.ramsey_gap_step > 0.0) || !(coherence.ramsey_gap_max > 0.0))
            throw PhysicsError("Ramsey gap range must be positive");
        for (double t : coherence.t_pi)
            if (!(t > 0.0))
                throw PhysicsError("coherence.t_pi values must be positive");
        for (double d : experiment.durations)
            if (!(d > 0.0))
                throw PhysicsError("experiment.durations must be positive");
        if (experiment.repetitions < 1)
            throw PhysicsError("experiment.repetitions must be at least 1");
        if (experiment.cycles < 0)
            throw PhysicsError("experiment.cycles must be non-negative");
        if (experiment.load_rows < 1)
            throw PhysicsError("experiment.load_rows must be at least 1");
        if (image.pixels_per_site < 1 || image.window < 0 || !(image.blur >= 0.0))
            throw PhysicsError("image settings out of range");
        if ((kind == ExperimentKind::echo || kind == ExperimentKind::protocols) && coherence.t_pi.size() < 4)
            throw PhysicsError("the echo fit needs at least four coherence.t_pi values");
        if (kind == ExperimentKind::transport_scan && experiment.durations.empty())
            throw PhysicsError("transport_scan needs experiment.durations");
        if (kind == ExperimentKind::protocols && experiment.protocols.empty())
            throw PhysicsError("protocols needs experiment.protocols");
    }
};

namespace detail {

inline std::vector<double> default_t_pi()
{
    std::vector<double> t;
    for (int i = 0; i <= 8; ++i)
        t.push_back(15e-3 + 7.5e-3 * i);
    return t;
}

} // namespace detail

// `base_dir` resolves a relative species.file.
inline ExperimentConfig resolve(const io::KvDocument& doc, const std::filesystem::path& base_dir = {})
{
    validate_document(doc);
    ExperimentConfig c;
    c.kind = experiment_kind_from(doc.string("experiment.kind"), doc.line_of("experiment.kind"));
    c.name = doc.string_or("experiment.name", to_string(c.kind));

    auto& sc = c.scene;
    if (doc.has("species.file")) {
        auto p = std::filesystem::path(doc.string("species.file"));
        if (p.is_relative())
            p = base_dir / p;
        sc.species = physics::load_species_file(p.string());
    } else {
        sc.species = physics::species_from(doc, "species");
    }

    optics::ArrayOptics a;
    a.array.lens_pitch = doc.number_or("optics.lens_pitch", a.array.lens_pitch);
    a.array.lens_diameter = doc.number_or("optics.lens_diameter", a.array.lens_diameter);
    a.array.focal_length = doc.number_or("optics.focal_length", a.array.focal_length);
    a.array.rows = static_cast<int>(doc.integer_or("optics.rows", a.array.rows));
    a.array.cols = static_cast<int>(doc.integer_or("optics.cols", a.array.cols));
    a.waist = doc.number_or("optics.waist", a.waist);
    a.beam.total_power = doc.number_or("optics.power", a.beam.total_power);
    a.beam.beam_radius_1e2 = doc.number_or("optics.beam_radius", a.beam.beam_radius_1e2);
    a.beam.wavelength = doc.number_or("optics.wavelength", a.beam.wavelength);
    a.beam.transmission_factor = doc.number_or("optics.transmission", a.beam.transmission_factor);
    sc.a1 = a;
    sc.a2 = a;
    auto& tel = sc.projection.telescope;
    tel.lens1_focal = doc.number_or("optics.lens1_focal", tel.lens1_focal);
    tel.lens2_focal = doc.number_or("optics.lens2_focal", tel.lens2_focal);
    tel.numerical_aperture = doc.number_or("optics.numerical_aperture", tel.numerical_aperture);
    sc.projection.measured_separation = doc.number_or("optics.measured_separation", 55e-6);
    sc.degradation.depth_factor_at_half_pitch =
        doc.number_or("optics.depth_factor_half_pitch", sc.degradation.depth_factor_at_half_pitch);
    sc.degradation.waist_factor_at_half_pitch =
        doc.number_or("optics.waist_factor_half_pitch", sc.degradation.waist_factor_at_half_pitch);
    sc.symmetric = doc.boolean_or("optics.symmetric", false);
    sc.nearest_sites = static_cast<int>(doc.integer_or("optics.nearest_sites", sc.nearest_sites));
    sc.usable_depth_fraction = doc.number_or("optics.usable_depth_fraction", sc.usable_depth_fraction);

    auto& sp = c.spec;
    sp.transport_duration = doc.number_or("control.transport_duration", sp.transport_duration);
    sp.handover_duration = doc.number_or("control.handover_duration", sp.handover_duration);
    sp.return_duration = doc.number_or("control.return_duration", sp.return_duration);
    sp.load_duration = doc.number_or("control.load_duration", sp.load_duration);
    auto shape = [&](const char* key, control::RampShape& dst) {
        if (!doc.has(key))
            return;
        try {
            dst = control::ramp_shape_from(doc.string(key));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " (expected linear, smoothstep or minimum_jerk)",
                              doc.line_of(key), key);
        }
    };
    shape("control.ramp_shape", sp.ramp_shape);
    shape("control.crossfade_shape", sp.crossfade_shape);
    sp.sample_rate = doc.number_or("control.sample_rate", sp.sample_rate);
    sp.symmetric_handover = sc.symmetric;

    if (doc.boolean_or("control.mirror_ideal", false)) {
        c.mirror = control::MirrorModel::perfect();
    } else {
        c.mirror.natural_frequency =
            physics::two_pi * doc.number_or("control.mirror_frequency", c.mirror.natural_frequency / physics::two_pi);
        c.mirror.damping_ratio = doc.number_or("control.mirror_damping", c.mirror.damping_ratio);
        c.mirror.angle_noise_sigma = doc.number_or("control.mirror_noise", c.mirror.angle_noise_sigma);
    }

    const long atoms = doc.integer_or("dynamics.atoms", 2000);
    const long seed = doc.integer_or("dynamics.seed", 1);
    if (atoms < 0)
        throw ConfigError("'dynamics.atoms' must be non-negative", doc.line_of("dynamics.atoms"), "dynamics.atoms");
    if (seed < 0)
        throw ConfigError("'dynamics.seed' must be non-negative", doc.line_of("dynamics.seed"), "dynamics.seed");
    c.ensemble.atoms = static_cast<std::size_t>(atoms);
    c.ensemble.seed = static_cast<std::uint64_t>(seed);
    c.ensemble.temperature = doc.number_or("dynamics.temperature", c.ensemble.temperature);
    auto& ig = c.integrator;
    ig.time_step = doc.number_or("dynamics.time_step", ig.time_step);
    ig.background_lifetime = doc.number_or("dynamics.background_lifetime", ig.background_lifetime);
    ig.capture_radius = doc.number_or("dynamics.capture_radius", ig.capture_radius);
    ig.loss_energy_margin = doc.number_or("dynamics.loss_energy_margin", ig.loss_energy_margin);
    ig.axial_escape = doc.number_or("dynamics.axial_escape", ig.axial_escape);
    const long threads = doc.integer_or("dynamics.threads", 1);
    if (threads < 1)
        throw ConfigError("'dynamics.threads' must be at least 1", doc.line_of("dynamics.threads"),
                          "dynamics.threads");
    ig.threads = static_cast<unsigned>(threads);
    c.settle = doc.number_or("dynamics.settle", c.kind == ExperimentKind::handover ? 2e-3 : 5e-3);

    auto& co = c.coherence;
    co.timing.pi_duration = doc.number_or("coherence.pi_duration", co.timing.pi_duration);
    co.heating_rate = doc.number_or("coherence.heating_rate", 0.0);
    co.calibrate_t2 = doc.number_or("coherence.calibrate_t2", 0.0);
    co.t_pi = doc.has("coherence.t_pi") ? doc.numbers("coherence.t_pi") : detail::default_t_pi();
    co.detuning_jitter = physics::two_pi * doc.number_or("coherence.detuning_jitter_hz", 0.0);
    co.shots = static_cast<int>(doc.integer_or("coherence.shots", 1));
    co.ramsey_gap_max = doc.number_or("coherence.ramsey_gap_max", co.ramsey_gap_max);
    co.ramsey_gap_step = doc.number_or("coherence.ramsey_gap_step", co.ramsey_gap_step);

    auto& ex = c.experiment;
    if (doc.has("experiment.durations"))
        ex.durations = doc.numbers("experiment.durations");
    ex.repetitions = static_cast<int>(doc.integer_or("experiment.repetitions", 1));
    if (doc.has("experiment.directions"))
        for (const auto& w : words(doc, "experiment.directions"))
            ex.directions.push_back(direction_from(w, doc.line_of("experiment.directions")));
    else
        ex.directions = {control::HandoverDirection::a1_to_a2, control::HandoverDirection::a2_to_a1};
    if (doc.has("experiment.geometries")) {
        for (const auto& w : words(doc, "experiment.geometries")) {
            if (w != "symmetric" && w != "asymmetric")
                throw ConfigError("unknown geometry '" + w + "' (expected symmetric or asymmetric)",
                                  doc.line_of("experiment.geometries"), "experiment.geometries");
            ex.geometries.push_back(w == "symmetric");
        }
    } else {
        ex.geometries = {sc.symmetric};
    }
    ex.cycles = static_cast<int>(doc.integer_or("experiment.cycles", ex.cycles));
    ex.load_rows = static_cast<int>(doc.integer_or("experiment.load_rows", ex.load_rows));
    if (doc.has("experiment.depth_factors"))
        ex.depth_factors = doc.numbers("experiment.depth_factors");
    if (doc.has("experiment.protocols")) {
        for (const auto& w : words(doc, "experiment.protocols")) {
            try {
                ex.protocols.push_back(control::protocol_from(w));
            } catch (const std::exception& e) {
                throw ConfigError(e.what(), doc.line_of("experiment.protocols"), "experiment.protocols");
            }
        }
    }

    c.image.pixels_per_site = static_cast<int>(doc.integer_or("image.pixels_per_site", c.image.pixels_per_site));
    c.image.blur = doc.number_or("image.blur", c.image.blur);
    c.image.window = static_cast<int>(doc.integer_or("image.window", c.image.window));
    c.output_directory = doc.string_or("output.directory", "runs/" + c.name);

    try {
        c.validate();
    } catch (const PhysicsError& e) {
        // Out-of-range settings are config problems at this stage.
        throw ConfigError(e.what());
    }
    return c;
}

inline ExperimentConfig load_config_text(const std::string& text, const std::filesystem::path& base_dir = {})
{
    return resolve(io::KvDocument::parse(text), base_dir);
}

inline std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path)
{
    const auto text = read_text_file(path);
    try {
        return load_config_text(text, path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what(), 0, e.field());
    }
}

// Canonical config: every key, SI units, shortest round-trip numbers. The
// thread count is a property of the machine, not of the experiment, and is
// left out so bundles compare equal across worker counts.
inline std::string write_resolved(const ExperimentConfig& c)
{
    using io::exact;
    std::ostringstream os;
    auto list = [](const std::vector<double>& v, const char* unit) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + exact(v[i]) + " " + unit;
        return s;
    };
    const auto& a = c.scene.a1;
    const auto& sp = c.scene.species;
    os << "# resolved configuration, SI units\n";
    os << "schema = " << schema_version << "\n\n";
    os << "[experiment]\nkind = " << to_string(c.kind) << "\nname = " << c.name << "\n";
    if (!c.experiment.durations.empty())
        os << "durations = " << list(c.experiment.durations, "s") << "\n";
    os << "repetitions = " << c.experiment.repetitions << "\n";
    os << "directions = ";
    for (std::size_t i = 0; i < c.experiment.directions.size(); ++i)
        os << (i ? ", " : "") << direction_key(c.experiment.directions[i]);
    os << "\ngeometries = ";
    for (std::size_t i = 0; i < c.experiment.geometries.size(); ++i)
        os << (i ? ", " : "") << (c.experiment.geometries[i] ? "symmetric" : "asymmetric");
    os << "\ncycles = " << c.experiment.cycles << "\nload_rows = " << c.experiment.load_rows << "\n";
    if (!c.experiment.depth_factors.empty())
        os << "depth_factors = " << list(c.experiment.depth_factors, "") << "\n";
    if (!c.experiment.protocols.empty()) {
        os << "protocols = ";
        for (std::size_t i = 0; i < c.experiment.protocols.size(); ++i)
            os << (i ? ", " : "") << control::to_string(c.experiment.protocols[i]);
        os << "\n";
    }
    os << "\n[species]\nname = " << sp.name << "\nmass = " << exact(sp.mass) << " kg\n"
       << "d1_wavelength = " << exact(sp.d1_wavelength) << " m\nd2_wavelength = " << exact(sp.d2_wavelength)
       << " m\nnatural_linewidth_hz = " << exact(sp.natural_linewidth / physics::two_pi)
       << " Hz\nhyperfine_splitting_hz = " << exact(sp.hyperfine_splitting / physics::two_pi) << " Hz\n";
    const auto& tel = c.scene.projection.telescope;
    os << "\n[optics]\nlens_pitch = " << exact(a.array.lens_pitch) << " m\nlens_diameter = "
       << exact(a.array.lens_diameter) << " m\nfocal_length = " << exact(a.array.focal_length) << " m\nrows = "
       << a.array.rows << "\ncols = " << a.array.cols << "\nlens1_focal = " << exact(tel.lens1_focal)
       << " m\nlens2_focal = " << exact(tel.lens2_focal) << " m\nnumerical_aperture = "
       << exact(tel.numerical_aperture) << "\nmeasured_separation = " << exact(c.scene.projection.measured_separation)
       << " m\nwaist = " << exact(a.waist) << " m\npower = " << exact(a.beam.total_power)
       << " W\nbeam_radius = " << exact(a.beam.beam_radius_1e2) << " m\nwavelength = " << exact(a.beam.wavelength)
       << " m\ntransmission = " << exact(a.beam.transmission_factor)
       << "\ndepth_factor_half_pitch = " << exact(c.scene.degradation.depth_factor_at_half_pitch)
       << "\nwaist_factor_half_pitch = " << exact(c.scene.degradation.waist_factor_at_half_pitch)
       << "\nsymmetric = " << (c.scene.symmetric ? "true" : "false") << "\nnearest_sites = "
       << c.scene.nearest_sites << "\nusable_depth_fraction = " << exact(c.scene.usable_depth_fraction) << "\n";
    const auto& s = c.spec;
    os << "\n[control]\ntransport_duration = " << exact(s.transport_duration) << " s\nhandover_duration = "
       << exact(s.handover_duration) << " s\nreturn_duration = " << exact(s.return_duration)
       << " s\nload_duration = " << exact(s.load_duration) << " s\nramp_shape = " << control::to_string(s.ramp_shape)
       << "\ncrossfade_shape = " << control::to_string(s.crossfade_shape) << "\nsample_rate = "
       << exact(s.sample_rate) << " Hz\n";
    if (c.mirror.ideal)
        os << "mirror_ideal = true\n";
    else
        os << "mirror_ideal = false\nmirror_frequency = " << exact(c.mirror.natural_frequency / physics::two_pi)
           << " Hz\nmirror_damping = " << exact(c.mirror.damping_ratio) << "\nmirror_noise = "
           << exact(c.mirror.angle_noise_sigma) << " rad\n";
    const auto& ig = c.integrator;
    os << "\n[dynamics]\natoms = " << c.ensemble.atoms << "\nseed = " << c.ensemble.seed << "\ntemperature = "
       << exact(c.ensemble.temperature) << " K\ntime_step = " << exact(ig.time_step)
       << " s\nbackground_lifetime = " << exact(ig.background_lifetime) << " s\ncapture_radius = "
       << exact(ig.capture_radius) << " m\nloss_energy_margin = " << exact(ig.loss_energy_margin)
       << "\naxial_escape = " << exact(ig.axial_escape) << "\nsettle = " << exact(c.settle) << " s\n";
    const auto& co = c.coherence;
    os << "\n[coherence]\npi_duration = " << exact(co.timing.pi_duration) << " s\nheating_rate = "
       << exact(co.heating_rate) << " K/s\ncalibrate_t2 = " << exact(co.calibrate_t2)
       << " s\nt_pi = " << list(co.t_pi, "s") << "\ndetuning_jitter_hz = "
       << exact(co.detuning_jitter / physics::two_pi) << " Hz\nshots = " << co.shots
       << "\nramsey_gap_max = " << exact(co.ramsey_gap_max) << " s\nramsey_gap_step = "
       << exact(co.ramsey_gap_step) << " s\n";
    os << "\n[image]\npixels_per_site = " << c.image.pixels_per_site << "\nblur = " << exact(c.image.blur)
       << " m\nwindow = " << c.image.window << "\n";
    os << "\n[output]\ndirectory = " << c.output_directory << "\n";
    return os.str();
}

} // namespace shiftreg::app

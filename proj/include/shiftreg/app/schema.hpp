#pragma once

// Experiment config schema, version 1. Every key the loader understands is
// listed here with its type and the unit family it accepts; anything else is
// rejected with the offending line. docs/config.md describes the keys.

#include "shiftreg/error.hpp"
#include "shiftreg/io/keyvalue.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace shiftreg::app {

inline constexpr int schema_version = 1;

enum class ValueKind { number, integer, boolean, text, numbers, words };

enum class Dimension { none, length, time, angle, temperature, heating_rate, frequency, power, mass };

struct KeyDef {
    std::string_view key; // section.key, or a bare top-level key
    ValueKind kind;
    Dimension dim = Dimension::none;
};

inline const std::vector<KeyDef>& schema()
{
    using K = ValueKind;
    using D = Dimension;
    static const std::vector<KeyDef> keys = {
        {"schema", K::integer},
        {"experiment.kind", K::text},
        {"experiment.name", K::text},
        {"experiment.durations", K::numbers, D::time},
        {"experiment.repetitions", K::integer},
        {"experiment.directions", K::words},
        {"experiment.geometries", K::words},
        {"experiment.cycles", K::integer},
        {"experiment.load_rows", K::integer},
        {"experiment.depth_factors", K::numbers},
        {"experiment.protocols", K::words},

        {"species.file", K::text},
        {"species.name", K::text},
        {"species.mass", K::number, D::mass},
        {"species.d1_wavelength", K::number, D::length},
        {"species.d2_wavelength", K::number, D::length},
        {"species.natural_linewidth_hz", K::number, D::frequency},
        {"species.hyperfine_splitting_hz", K::number, D::frequency},

        {"optics.lens_pitch", K::number, D::length},
        {"optics.lens_diameter", K::number, D::length},
        {"optics.focal_length", K::number, D::length},
        {"optics.rows", K::integer},
        {"optics.cols", K::integer},
        {"optics.lens1_focal", K::number, D::length},
        {"optics.lens2_focal", K::number, D::length},
        {"optics.numerical_aperture", K::number},
        {"optics.measured_separation", K::number, D::length},
        {"optics.waist", K::number, D::length},
        {"optics.power", K::number, D::power},
        {"optics.beam_radius", K::number, D::length},
        {"optics.wavelength", K::number, D::length},
        {"optics.transmission", K::number},
        {"optics.depth_factor_half_pitch", K::number},
        {"optics.waist_factor_half_pitch", K::number},
        {"optics.symmetric", K::boolean},
        {"optics.nearest_sites", K::integer},
        {"optics.usable_depth_fraction", K::number},

        {"control.transport_duration", K::number, D::time},
        {"control.handover_duration", K::number, D::time},
        {"control.return_duration", K::number, D::time},
        {"control.load_duration", K::number, D::time},
        {"control.ramp_shape", K::text},
        {"control.crossfade_shape", K::text},
        {"control.sample_rate", K::number, D::frequency},
        {"control.mirror_ideal", K::boolean},
        {"control.mirror_frequency", K::number, D::frequency},
        {"control.mirror_damping", K::number},
        {"control.mirror_noise", K::number, D::angle},

        {"dynamics.atoms", K::integer},
        {"dynamics.seed", K::integer},
        {"dynamics.temperature", K::number, D::temperature},
        {"dynamics.time_step", K::number, D::time},
        {"dynamics.background_lifetime", K::number, D::time},
        {"dynamics.capture_radius", K::number, D::length},
        {"dynamics.loss_energy_margin", K::number},
        {"dynamics.axial_escape", K::number},
        {"dynamics.settle", K::number, D::time},
        {"dynamics.threads", K::integer},

        {"coherence.pi_duration", K::number, D::time},
        {"coherence.heating_rate", K::number, D::heating_rate},
        {"coherence.calibrate_t2", K::number, D::time},
        {"coherence.t_pi", K::numbers, D::time},
        {"coherence.detuning_jitter_hz", K::number, D::frequency},
        {"coherence.shots", K::integer},
        {"coherence.ramsey_gap_max", K::number, D::time},
        {"coherence.ramsey_gap_step", K::number, D::time},

        {"image.pixels_per_site", K::integer},
        {"image.blur", K::number, D::length},
        {"image.window", K::integer},

        {"output.directory", K::text},
    };
    return keys;
}

inline const KeyDef* find_key(std::string_view key)
{
    for (const auto& k : schema())
        if (k.key == key)
            return &k;
    return nullptr;
}

inline const char* to_string(Dimension d)
{
    switch (d) {
    case Dimension::none: return "dimensionless";
    case Dimension::length: return "length";
    case Dimension::time: return "time";
    case Dimension::angle: return "angle";
    case Dimension::temperature: return "temperature";
    case Dimension::heating_rate: return "heating rate";
    case Dimension::frequency: return "frequency";
    case Dimension::power: return "power";
    case Dimension::mass: return "mass";
    }
    return "?";
}

namespace detail {

// An empty unit always means base SI.
inline bool unit_allowed(Dimension d, std::string_view unit)
{
    if (unit.empty())
        return true;
    auto in = [&](std::initializer_list<std::string_view> l) {
        return std::find(l.begin(), l.end(), unit) != l.end();
    };
    switch (d) {
    case Dimension::none: return in({"1"});
    case Dimension::length: return in({"m", "mm", "um", "µm", "nm"});
    case Dimension::time: return in({"s", "ms", "us", "µs", "ns"});
    case Dimension::angle: return in({"rad", "mrad", "urad", "µrad"});
    case Dimension::temperature: return in({"K", "mK", "uK", "µK"});
    case Dimension::heating_rate: return in({"K/s", "mK/s", "uK/s", "µK/s"});
    case Dimension::frequency: return in({"Hz", "kHz", "MHz", "GHz"});
    case Dimension::power: return in({"W", "mW", "uW", "µW"});
    case Dimension::mass: return in({"kg", "u"});
    }
    return false;
}

inline std::string_view unit_of(std::string_view item)
{
    item = io::detail::trim(item);
    auto split = item.find_first_of(" \t");
    return split == std::string_view::npos ? std::string_view{} : io::detail::trim(item.substr(split));
}

inline void check_units(const io::KvDocument& doc, const std::string& key, Dimension dim)
{
    const auto& e = doc.entry(key);
    std::string_view rest = e.value;
    while (true) {
        auto comma = rest.find(',');
        auto unit = unit_of(rest.substr(0, comma));
        if (!unit_allowed(dim, unit))
            throw ConfigError("'" + key + "' expects a " + to_string(dim) + ", got unit '" + std::string(unit) + "'",
                              e.line, key);
        if (comma == std::string_view::npos)
            break;
        rest = rest.substr(comma + 1);
    }
}

} // namespace detail

// Comma-separated identifiers.
inline std::vector<std::string> words(const io::KvDocument& doc, const std::string& key)
{
    const auto& e = doc.entry(key);
    std::vector<std::string> out;
    std::string_view rest = e.value;
    while (true) {
        auto comma = rest.find(',');
        auto item = io::detail::trim(rest.substr(0, comma));
        if (item.empty())
            throw ConfigError("'" + key + "' has an empty list element", e.line, key);
        out.emplace_back(item);
        if (comma == std::string_view::npos)
            break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

// Structural validation: known sections and keys, parseable values, units of
// the right family, supported schema version. Semantic checks (positive
// durations, capacity, ...) happen when the config is resolved.
inline void validate_document(const io::KvDocument& doc)
{
    static constexpr std::array<std::string_view, 8> sections = {"experiment", "species", "optics",   "control",
                                                                 "dynamics",   "coherence", "image", "output"};
    for (const auto& s : doc.sections())
        if (std::find(sections.begin(), sections.end(), s.name) == sections.end())
            throw ConfigError("unknown section [" + s.name + "]", s.line, s.name);
    if (!doc.has("schema"))
        throw ConfigError("missing 'schema = " + std::to_string(schema_version) + "' at the top of the config", 1,
                          "schema");
    if (doc.integer("schema") != schema_version)
        throw ConfigError("unsupported schema version " + doc.string("schema") + " (this build reads " +
                              std::to_string(schema_version) + ")",
                          doc.line_of("schema"), "schema");
    if (!doc.has("experiment.kind"))
        throw ConfigError("missing required key 'experiment.kind'", 0, "experiment.kind");

    for (const auto& key : doc.keys()) {
        const auto* def = find_key(key);
        if (!def)
            throw ConfigError("unknown key '" + key + "'", doc.line_of(key), key);
        switch (def->kind) {
        case ValueKind::number:
            doc.number(key);
            detail::check_units(doc, key, def->dim);
            break;
        case ValueKind::numbers:
            doc.numbers(key);
            detail::check_units(doc, key, def->dim);
            break;
        case ValueKind::integer: doc.integer(key); break;
        case ValueKind::boolean: doc.boolean(key); break;
        case ValueKind::text:
            if (doc.string(key).empty())
                throw ConfigError("'" + key + "' must not be empty", doc.line_of(key), key);
            break;
        case ValueKind::words: words(doc, key); break;
        }
    }
    if (doc.has("species.file"))
        for (const auto& key : doc.keys())
            if (key.rfind("species.", 0) == 0 && key != "species.file")
                throw ConfigError("'" + key + "' cannot be combined with species.file", doc.line_of(key), key);
}

} // namespace shiftreg::app

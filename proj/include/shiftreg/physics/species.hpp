#pragma once

#include "shiftreg/error.hpp"
#include "shiftreg/io/keyvalue.hpp"
#include "shiftreg/physics/constants.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace shiftreg::physics {

struct AtomSpecies {
    std::string name;
    double mass = 0.0;                // kg
    double d1_wavelength = 0.0;       // m
    double d2_wavelength = 0.0;       // m
    double natural_linewidth = 0.0;   // rad/s, D2 line
    double hyperfine_splitting = 0.0; // rad/s, ground-state qubit pair

    void validate() const
    {
        if (!(mass > 0.0))
            throw PhysicsError("species '" + name + "': mass must be positive");
        if (!(d2_wavelength > 0.0) || !(d1_wavelength > d2_wavelength))
            throw PhysicsError("species '" + name + "': requires d1_wavelength > d2_wavelength > 0");
        if (!(natural_linewidth > 0.0))
            throw PhysicsError("species '" + name + "': natural_linewidth must be positive");
        if (!(hyperfine_splitting > 0.0))
            throw PhysicsError("species '" + name + "': hyperfine_splitting must be positive");
    }

    double d1_frequency() const { return angular_frequency(d1_wavelength); }
    double d2_frequency() const { return angular_frequency(d2_wavelength); }
};

// 85Rb, D-line data from Steck's reference tables.
inline AtomSpecies rubidium85()
{
    return AtomSpecies{
        .name = "Rb85",
        .mass = 84.911789738 * amu,
        .d1_wavelength = 794.978851156e-9,
        .d2_wavelength = 780.241368271e-9,
        .natural_linewidth = two_pi * 6.0666e6,
        .hyperfine_splitting = two_pi * 3.035732439e9,
    };
}

// Reads the species keys either from a standalone species file or from the
// [species] section of an experiment config. Missing keys fall back to 85Rb.
//
//   name = Rb85
//   mass = 84.911789738 u
//   d1_wavelength = 794.978851156 nm
//   d2_wavelength = 780.241368271 nm
//   natural_linewidth_hz = 6.0666 MHz      # divided by 2 pi on output
//   hyperfine_splitting_hz = 3.035732439 GHz
inline AtomSpecies species_from(const io::KvDocument& doc, const std::string& prefix = "")
{
    auto key = [&](const char* k) { return prefix.empty() ? std::string(k) : prefix + "." + k; };
    auto base = rubidium85();
    AtomSpecies s;
    s.name = doc.string_or(key("name"), base.name);
    s.mass = doc.number_or(key("mass"), base.mass);
    s.d1_wavelength = doc.number_or(key("d1_wavelength"), base.d1_wavelength);
    s.d2_wavelength = doc.number_or(key("d2_wavelength"), base.d2_wavelength);
    s.natural_linewidth = two_pi * doc.number_or(key("natural_linewidth_hz"), base.natural_linewidth / two_pi);
    s.hyperfine_splitting =
        two_pi * doc.number_or(key("hyperfine_splitting_hz"), base.hyperfine_splitting / two_pi);
    s.validate();
    return s;
}

inline AtomSpecies load_species_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open species file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    auto doc = io::KvDocument::parse(buf.str());
    static const char* known[] = {"name", "mass", "d1_wavelength", "d2_wavelength",
                                  "natural_linewidth_hz", "hyperfine_splitting_hz"};
    for (const auto& k : doc.keys()) {
        bool ok = false;
        for (auto* kn : known)
            ok = ok || k == kn;
        if (!ok)
            throw ConfigError("unknown species key '" + k + "'", doc.line_of(k), k);
    }
    return species_from(doc);
}

struct ThermalState {
    double temperature = 0.0; // K
    long atom_count = 0;

    void validate() const
    {
        if (!(temperature >= 0.0))
            throw PhysicsError("temperature must be non-negative");
        if (atom_count < 0)
            throw PhysicsError("atom_count must be non-negative");
    }
};

} // namespace shiftreg::physics

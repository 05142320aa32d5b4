#pragma once

#include "shiftreg/dynamics/rng.hpp"
#include "shiftreg/error.hpp"
#include "shiftreg/optics/snapshot.hpp"
#include "shiftreg/physics/dipole.hpp"
#include "shiftreg/physics/species.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace shiftreg::dynamics {

using optics::Vec3;

struct Atom {
    Vec3 position{};
    Vec3 velocity{};
    optics::SiteIndex home{};
    bool alive = true;
    double loss_time = -1.0; // s since the start of the losing propagation; < 0 while alive
};

struct AtomEnsemble {
    std::vector<Atom> atoms;
    double mass = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t epoch = 0; // bumped by every propagation so streams never repeat

    std::size_t size() const { return atoms.size(); }

    std::size_t alive_count() const
    {
        std::size_t n = 0;
        for (const auto& a : atoms)
            n += a.alive ? 1 : 0;
        return n;
    }

    std::mt19937_64 rng(std::size_t index, std::uint64_t purpose) const { return stream(seed, index, purpose); }
};

struct EnsembleSpec {
    double temperature = 15e-6;
    std::size_t atoms = 10000;
    std::uint64_t seed = 1;
};

namespace purpose {
constexpr std::uint64_t sampling = 1;
constexpr std::uint64_t propagation_base = 1000; // + epoch
} // namespace purpose

// Boltzmann sample in the harmonic approximation of each listed site,
// truncated at the trap depth. Atom i is loaded into sites[i % sites.size()].
inline AtomEnsemble sample_thermal(const optics::TrapArraySnapshot& snapshot, const std::vector<optics::SiteIndex>& sites,
                                   double temperature, std::size_t n, std::uint64_t seed,
                                   const physics::AtomSpecies& species)
{
    if (sites.empty())
        throw PhysicsError("sample_thermal needs at least one site");
    if (!(temperature >= 0.0))
        throw PhysicsError("temperature must be non-negative");
    AtomEnsemble e;
    e.mass = species.mass;
    e.seed = seed;
    e.atoms.resize(n);
    const double kT = physics::kB * temperature;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& idx = sites[i % sites.size()];
        const auto site = snapshot.site(idx);
        Atom& atom = e.atoms[i];
        atom.home = idx;
        atom.position = site.center;
        if (temperature == 0.0)
            continue;
        if (!(kT < std::abs(site.depth)))
            throw PhysicsError("temperature too high for the trap depth: unbound sampling");
        const auto f = physics::trap_frequencies(site.depth, site.waist, snapshot.wavelength, species);
        const double sx = std::sqrt(kT / (species.mass * f.radial * f.radial));
        const double sz = std::sqrt(kT / (species.mass * f.axial * f.axial));
        const double sv = std::sqrt(kT / species.mass);
        auto g = e.rng(i, purpose::sampling);
        Gaussian gauss;
        for (;;) {
            const Vec3 r{sx * gauss(g), sx * gauss(g), sz * gauss(g)};
            const Vec3 v{sv * gauss(g), sv * gauss(g), sv * gauss(g)};
            const double energy =
                0.5 * species.mass *
                (v.norm2() + f.radial * f.radial * (r.x * r.x + r.y * r.y) + f.axial * f.axial * r.z * r.z);
            if (energy < std::abs(site.depth)) {
                atom.position = site.center + r;
                atom.velocity = v;
                break;
            }
        }
    }
    return e;
}

inline AtomEnsemble sample_thermal(const optics::TrapArraySnapshot& snapshot, optics::SiteIndex site,
                                   double temperature, std::size_t n, std::uint64_t seed,
                                   const physics::AtomSpecies& species)
{
    return sample_thermal(snapshot, std::vector<optics::SiteIndex>{site}, temperature, n, seed, species);
}

struct TemperatureEstimate {
    double value = 0.0;          // K
    double standard_error = 0.0; // K
    std::size_t atoms = 0;
};

// Kinetic temperature m·var(v)/k_B per axis, averaged over the axes,
// surviving atoms only.
inline TemperatureEstimate estimate_temperature(const AtomEnsemble& e)
{
    double mean[3] = {0, 0, 0};
    std::size_t n = 0;
    for (const auto& a : e.atoms) {
        if (!a.alive)
            continue;
        mean[0] += a.velocity.x;
        mean[1] += a.velocity.y;
        mean[2] += a.velocity.z;
        ++n;
    }
    if (n < 2)
        throw StatisticsError("temperature estimate needs at least 2 surviving atoms");
    for (double& m : mean)
        m /= static_cast<double>(n);
    double var[3] = {0, 0, 0};
    for (const auto& a : e.atoms) {
        if (!a.alive)
            continue;
        const double d[3] = {a.velocity.x - mean[0], a.velocity.y - mean[1], a.velocity.z - mean[2]};
        for (int k = 0; k < 3; ++k)
            var[k] += d[k] * d[k];
    }
    const double nn = static_cast<double>(n);
    double t = 0.0;
    for (double& v : var) {
        v /= nn - 1.0;
        t += e.mass * v / physics::kB;
    }
    t /= 3.0;
    TemperatureEstimate out;
    out.value = t;
    out.standard_error = t * std::sqrt(2.0 / (3.0 * (nn - 1.0)));
    out.atoms = n;
    return out;
}

} // namespace shiftreg::dynamics

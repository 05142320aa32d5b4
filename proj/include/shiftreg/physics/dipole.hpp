#pragma once

// Far-detuned two-line (D1 + D2) dipole potential of a focused Gaussian beam
// in the rotating-wave approximation, and the harmonic expansion of its
// focus. SI units throughout; frequencies are angular.

#include "shiftreg/error.hpp"
#include "shiftreg/physics/constants.hpp"
#include "shiftreg/physics/species.hpp"

#include <cmath>

namespace shiftreg::physics {

struct Detunings {
    double d1; // rad/s, trap minus D1
    double d2; // rad/s, trap minus D2
};

inline Detunings detunings(double trap_wavelength, const AtomSpecies& species)
{
    if (!(trap_wavelength > 0.0))
        throw PhysicsError("trap wavelength must be positive");
    const double w = angular_frequency(trap_wavelength);
    Detunings d{w - species.d1_frequency(), w - species.d2_frequency()};
    // Relative tolerance: anything closer than 1e-12 of the optical frequency
    // cannot be represented meaningfully.
    const double tiny = 1e-12 * w;
    if (std::abs(d.d1) < tiny || std::abs(d.d2) < tiny)
        throw SingularityError("trap wavelength is resonant with a D line");
    if (d.d1 > 0.0 || d.d2 > 0.0)
        throw UnsupportedRegimeError("trap light must be red-detuned from both D lines");
    return d;
}

// Intensity-weighted effective detuning: 3/Δ_eff = 2/Δ₂ + 1/Δ₁ (negative).
inline double effective_detuning(double trap_wavelength, const AtomSpecies& species)
{
    auto d = detunings(trap_wavelength, species);
    return 3.0 / (2.0 / d.d2 + 1.0 / d.d1);
}

inline double peak_intensity(double power, double waist) { return 2.0 * power / (pi * waist * waist); }

inline double rayleigh_range(double waist, double trap_wavelength) { return pi * waist * waist / trap_wavelength; }

// Trap depth at the focus, U₀ < 0 for red detuning.
inline double dipole_potential_depth(double power, double waist, double trap_wavelength, const AtomSpecies& species)
{
    if (!(power >= 0.0))
        throw PhysicsError("power must be non-negative");
    if (!(waist > 0.0))
        throw PhysicsError("waist must be positive");
    auto d = detunings(trap_wavelength, species);
    const double w0 = species.d2_frequency();
    const double prefactor = pi * c_light * c_light * species.natural_linewidth / (2.0 * w0 * w0 * w0);
    return prefactor * (2.0 / d.d2 + 1.0 / d.d1) * peak_intensity(power, waist);
}

struct TrapFrequencies {
    double radial; // rad/s
    double axial;  // rad/s
};

inline TrapFrequencies trap_frequencies(double depth, double waist, double trap_wavelength, const AtomSpecies& species)
{
    if (!(depth < 0.0))
        throw PhysicsError("no bound states in repulsive/flat potential");
    if (!(waist > 0.0))
        throw PhysicsError("waist must be positive");
    const double u = -depth;
    const double zr = rayleigh_range(waist, trap_wavelength);
    return {std::sqrt(4.0 * u / (species.mass * waist * waist)), std::sqrt(2.0 * u / (species.mass * zr * zr))};
}

// Γ_sc = (Γ/|Δ_eff|)·|U₀|/ħ. Depth 0 gives 0.
inline double photon_scattering_rate(double depth, double trap_wavelength, const AtomSpecies& species)
{
    const double delta = effective_detuning(trap_wavelength, species);
    if (depth > 0.0)
        throw PhysicsError("photon scattering rate requires an attractive (or zero) potential");
    return species.natural_linewidth / std::abs(delta) * std::abs(depth) / hbar;
}

// Differential light-shift factor of the hyperfine qubit, η = ω_HFS/|Δ_eff|.
inline double differential_shift_factor(double trap_wavelength, const AtomSpecies& species)
{
    return species.hyperfine_splitting / std::abs(effective_detuning(trap_wavelength, species));
}

// Photon recoil energy at the trap wavelength.
inline double recoil_energy(double trap_wavelength, const AtomSpecies& species)
{
    const double k = two_pi / trap_wavelength;
    return hbar * hbar * k * k / (2.0 * species.mass);
}

} // namespace shiftreg::physics

#pragma once

#include "shiftreg/error.hpp"
#include "shiftreg/physics/constants.hpp"
#include "shiftreg/physics/dipole.hpp"
#include "shiftreg/physics/species.hpp"

#include <cmath>

namespace shiftreg::coherence {

// Inhomogeneous channel: δ = η|U(r)|/ħ along each trajectory.
// Homogeneous channel: photon-recoil kicks at the rate that heats the
// ensemble at heating_rate; each kick of energy ΔE lowers the atom's time-
// averaged |U| by ΔE/2 (virial, harmonic bottom), stepping its frequency by
// −ηΔE/(2ħ) from then on. The steps are random, so the π-pulse cannot undo
// them.
struct DephasingModel {
    double eta = 0.0;              // ω_HFS / |Δ_eff|
    double heating_rate = 0.0;     // K/s
    double detuning_jitter = 0.0;  // rad/s, shot-to-shot
    double recoil_energy = 0.0;    // J, of one trap photon
    double recoil_momentum = 0.0;  // kg·m/s

    void validate() const
    {
        if (!(eta > 0.0))
            throw PhysicsError("dephasing model: eta must be positive");
        if (!(heating_rate >= 0.0))
            throw PhysicsError("dephasing model: heating rate must be non-negative");
        if (!(detuning_jitter >= 0.0))
            throw PhysicsError("dephasing model: detuning jitter must be non-negative");
        if (heating_rate > 0.0 && !(recoil_energy > 0.0 && recoil_momentum > 0.0))
            throw PhysicsError("dephasing model: heating needs the trap photon recoil");
    }

    // Scattering events per second per atom that heat at heating_rate:
    // each event deposits 2 E_rec on average, 3 k_B per kelvin in 3D.
    double kick_rate() const { return heating_rate > 0.0 ? 1.5 * physics::kB * heating_rate / recoil_energy : 0.0; }

    // Heating rate that corresponds to a kick rate.
    double heating_for_rate(double rate) const { return rate * recoil_energy / (1.5 * physics::kB); }

    double frequency_step(double kick_energy) const { return -eta * kick_energy / (2.0 * physics::hbar); }
};

inline DephasingModel make_dephasing_model(double trap_wavelength, const physics::AtomSpecies& species,
                                           double heating_rate = 0.0)
{
    DephasingModel m;
    m.eta = physics::differential_shift_factor(trap_wavelength, species);
    m.heating_rate = heating_rate;
    m.recoil_energy = physics::recoil_energy(trap_wavelength, species);
    m.recoil_momentum = physics::hbar * physics::two_pi / trap_wavelength;
    m.validate();
    return m;
}

inline double differential_shift(double local_potential, const DephasingModel& model)
{
    if (local_potential > 0.0)
        throw PhysicsError("differential shift needs a non-repulsive local potential");
    return model.eta * std::abs(local_potential) / physics::hbar;
}

} // namespace shiftreg::coherence

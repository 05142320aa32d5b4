#pragma once

#include <numbers>

namespace shiftreg::physics {

// CODATA 2018.
struct PhysicalConstants {
    static constexpr double boltzmann_constant = 1.380649e-23;   // J/K
    static constexpr double reduced_planck = 1.054571817e-34;    // J s
    static constexpr double speed_of_light = 299792458.0;        // m/s
    static constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
};

inline constexpr double kB = PhysicalConstants::boltzmann_constant;
inline constexpr double hbar = PhysicalConstants::reduced_planck;
inline constexpr double c_light = PhysicalConstants::speed_of_light;
inline constexpr double amu = PhysicalConstants::atomic_mass_unit;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double angular_frequency(double wavelength) { return two_pi * c_light / wavelength; }

} // namespace shiftreg::physics

#pragma once

#include "shiftreg/error.hpp"

#include <cmath>
#include <string>

namespace shiftreg::optics {

enum class ArrayId { A1, A2 };

inline const char* to_string(ArrayId id) { return id == ArrayId::A1 ? "A1" : "A2"; }

struct SiteIndex {
    int row = 0;
    int col = 0;
    friend bool operator==(const SiteIndex&, const SiteIndex&) = default;
};

struct MicrolensArray {
    double lens_pitch = 125e-6;
    double lens_diameter = 100e-6;
    double focal_length = 1e-3;
    int rows = 50;
    int cols = 50;
    ArrayId array_id = ArrayId::A1;

    void validate() const
    {
        if (!(lens_pitch > 0.0) || !(lens_diameter > 0.0) || lens_diameter > lens_pitch)
            throw PhysicsError("microlens array: require 0 < lens_diameter <= lens_pitch");
        if (!(focal_length > 0.0))
            throw PhysicsError("microlens array: focal_length must be positive");
        if (rows <= 0 || cols <= 0)
            throw PhysicsError("microlens array: grid extent must be positive");
    }

    // The illumination beam is centered on this lens.
    SiteIndex central_site() const { return {rows / 2, cols / 2}; }

    bool contains(SiteIndex s) const { return s.row >= 0 && s.row < rows && s.col >= 0 && s.col < cols; }

    // Lens-plane offset of a lens center from the central lens.
    double lens_x(int col) const { return (col - central_site().col) * lens_pitch; }
    double lens_y(int row) const { return (row - central_site().row) * lens_pitch; }

    // Incidence angle that moves the foci by one full pitch.
    double full_pitch_tilt() const { return lens_pitch / focal_length; }
};

struct RelayTelescope {
    double lens1_focal = 80e-3;
    double lens2_focal = 35.5e-3;
    double numerical_aperture = 0.29;

    void validate() const
    {
        if (!(lens1_focal > 0.0) || !(lens2_focal > 0.0))
            throw PhysicsError("relay telescope: focal lengths must be positive");
        if (!(demagnification() > 1.0))
            throw PhysicsError("relay telescope: demagnification must exceed 1");
        if (!(numerical_aperture > 0.0 && numerical_aperture < 1.0))
            throw PhysicsError("relay telescope: numerical aperture must lie in (0, 1)");
    }

    double demagnification() const { return lens1_focal / lens2_focal; }
};

struct IlluminationBeam {
    double total_power = 0.275;
    double beam_radius_1e2 = 450e-6;
    double wavelength = 805e-9;
    double transmission_factor = 0.85;

    void validate() const
    {
        if (!(total_power > 0.0) || !(beam_radius_1e2 > 0.0) || !(wavelength > 0.0))
            throw PhysicsError("illumination beam: power, radius and wavelength must be positive");
        if (!(transmission_factor > 0.0 && transmission_factor <= 1.0))
            throw PhysicsError("illumination beam: transmission_factor must lie in (0, 1]");
    }
};

struct TiltState {
    double tilt_angle = 0.0;                 // rad, incidence angle on the array
    double reproducibility_noise = 22e-6;    // rad, 1 sigma
};

// Maps lens-plane geometry into the science cell. The effective
// demagnification is the nominal telescope ratio unless a measured trap
// separation is supplied, in which case that measurement fixes the scale.
struct CellProjection {
    RelayTelescope telescope{};
    double measured_separation = 0.0; // m; 0 = use nominal telescope ratio

    double demagnification(const MicrolensArray& array) const
    {
        if (measured_separation > 0.0)
            return array.lens_pitch / measured_separation;
        return telescope.demagnification();
    }

    double separation(const MicrolensArray& array) const { return array.lens_pitch / demagnification(array); }

    // Lateral cell-plane focus displacement for an incidence angle.
    double displacement(const MicrolensArray& array, double tilt_angle) const
    {
        return array.focal_length * tilt_angle / demagnification(array);
    }

    double tilt_for_displacement(const MicrolensArray& array, double displacement) const
    {
        return displacement * demagnification(array) / array.focal_length;
    }
};

} // namespace shiftreg::optics

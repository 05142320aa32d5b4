#pragma once

#include "shiftreg/error.hpp"
#include "shiftreg/optics/geometry.hpp"

#include <cmath>

namespace shiftreg::optics {

// Quadratic-in-tilt law for the aberration-induced deformation of foci under
// skewed illumination. Calibrated at the half-pitch tilt; valid up to one
// full pitch of focal displacement.
struct TiltDegradationModel {
    double depth_factor_at_half_pitch = 0.92;
    double waist_factor_at_half_pitch = 1.04;

    void validate() const
    {
        if (!(depth_factor_at_half_pitch > 0.0 && depth_factor_at_half_pitch <= 1.0))
            throw PhysicsError("tilt degradation: depth factor must lie in (0, 1]");
        if (!(waist_factor_at_half_pitch >= 1.0))
            throw PhysicsError("tilt degradation: waist factor must be >= 1");
        // Depth must stay positive up to the full-pitch validity edge (4x the half-pitch curvature).
        if (!(1.0 - 4.0 * (1.0 - depth_factor_at_half_pitch) > 0.0))
            throw PhysicsError("tilt degradation: depth factor extrapolates below zero within one pitch");
    }
};

struct DegradationFactors {
    double depth_factor = 1.0;
    double waist_factor = 1.0;
};

inline DegradationFactors tilt_degradation(double tilt_angle, const MicrolensArray& array,
                                           const TiltDegradationModel& model = {})
{
    const double full = array.full_pitch_tilt();
    if (std::abs(tilt_angle) > full * (1.0 + 1e-12))
        throw OutOfModelError("tilt " + std::to_string(tilt_angle) + " rad displaces foci by more than one lens pitch");
    const double u = tilt_angle / (0.5 * full);
    const double u2 = u * u;
    return {1.0 - (1.0 - model.depth_factor_at_half_pitch) * u2,
            1.0 + (model.waist_factor_at_half_pitch - 1.0) * u2};
}

inline DegradationFactors tilt_degradation(const TiltState& tilt, const MicrolensArray& array,
                                           const TiltDegradationModel& model = {})
{
    return tilt_degradation(tilt.tilt_angle, array, model);
}

} // namespace shiftreg::optics

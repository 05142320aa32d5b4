#pragma once

#include "shiftreg/error.hpp"
#include "shiftreg/optics/degradation.hpp"
#include "shiftreg/optics/geometry.hpp"
#include "shiftreg/optics/power.hpp"
#include "shiftreg/physics/dipole.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace shiftreg::optics {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
    friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend Vec3 operator*(double s, Vec3 a) { return a *= s; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
};

struct TrapSite {
    SiteIndex index;
    Vec3 center;
    double depth; // J, <= 0
    double waist; // m
};

// Regular lattice of foci of one array in the cell plane. Sites share one
// waist; depths follow the illumination envelope. The shift axis is x.
struct TrapArraySnapshot {
    ArrayId id = ArrayId::A1;
    int rows = 0;
    int cols = 0;
    double separation = 0.0; // m
    double origin_x = 0.0;   // x of column 0
    double origin_y = 0.0;   // y of row 0
    double waist = 0.0;      // m
    double wavelength = 0.0; // m
    std::vector<double> depths;

    double depth(SiteIndex s) const { return depths[static_cast<std::size_t>(s.row) * cols + s.col]; }
    double center_x(int col) const { return origin_x + col * separation; }
    double center_y(int row) const { return origin_y + row * separation; }
    double rayleigh_range() const { return physics::rayleigh_range(waist, wavelength); }
    bool contains(SiteIndex s) const { return s.row >= 0 && s.row < rows && s.col >= 0 && s.col < cols; }
    std::size_t size() const { return depths.size(); }

    TrapSite site(SiteIndex s) const
    {
        if (!contains(s))
            throw std::out_of_range("trap site outside snapshot grid");
        return {s, {center_x(s.col), center_y(s.row), 0.0}, depth(s), waist};
    }

    // Nearest site to a lateral position (clamped to the grid).
    SiteIndex nearest(double x, double y) const
    {
        int col = static_cast<int>(std::lround((x - origin_x) / separation));
        int row = static_cast<int>(std::lround((y - origin_y) / separation));
        col = std::clamp(col, 0, cols - 1);
        row = std::clamp(row, 0, rows - 1);
        return {row, col};
    }
};

// Geometry only: positions for a given tilt, depths zero. The central lens
// lands at x = base_offset_x before tilt displacement.
inline TrapArraySnapshot project_to_cell(const MicrolensArray& array, const CellProjection& projection,
                                         const TiltState& tilt, double base_offset_x = 0.0)
{
    array.validate();
    projection.telescope.validate();
    if (std::abs(tilt.tilt_angle) > array.full_pitch_tilt() * (1.0 + 1e-12))
        throw OutOfModelError("tilt displaces foci by more than one lens pitch");
    TrapArraySnapshot snap;
    snap.id = array.array_id;
    snap.rows = array.rows;
    snap.cols = array.cols;
    snap.separation = projection.separation(array);
    const auto c = array.central_site();
    snap.origin_x = base_offset_x + projection.displacement(array, tilt.tilt_angle) - c.col * snap.separation;
    snap.origin_y = -c.row * snap.separation;
    snap.depths.assign(static_cast<std::size_t>(array.rows) * array.cols, 0.0);
    return snap;
}

struct ArrayOptics {
    MicrolensArray array{};
    IlluminationBeam beam{};
    double waist = 3.8e-6;      // measured focal waist at normal incidence
    double base_offset_x = 0.0; // cell-plane x of the central lens at zero tilt
};

// Full snapshot at a tilt: per-lens power → dipole depth, scaled by the tilt
// degradation; waist widened by the same law.
inline TrapArraySnapshot make_snapshot(const ArrayOptics& optics, const CellProjection& projection,
                                       const TiltState& tilt, const physics::AtomSpecies& species,
                                       const TiltDegradationModel& degradation = {})
{
    optics.beam.validate();
    auto snap = project_to_cell(optics.array, projection, tilt, optics.base_offset_x);
    const auto factors = tilt_degradation(tilt, optics.array, degradation);
    snap.waist = optics.waist * factors.waist_factor;
    snap.wavelength = optics.beam.wavelength;
    for (int r = 0; r < snap.rows; ++r) {
        for (int c = 0; c < snap.cols; ++c) {
            const double p = per_lens_power(optics.beam, optics.array, {r, c});
            // Power is conserved under degradation; the focus loses peak depth.
            const double u = physics::dipole_potential_depth(p, optics.waist, optics.beam.wavelength, species);
            snap.depths[static_cast<std::size_t>(r) * snap.cols + c] = u * factors.depth_factor;
        }
    }
    return snap;
}

} // namespace shiftreg::optics

#include "shiftreg/optics/degradation.hpp"
#include "shiftreg/optics/geometry.hpp"
#include "shiftreg/optics/potential.hpp"
#include "shiftreg/optics/power.hpp"
#include "shiftreg/optics/snapshot.hpp"
#include "shiftreg/physics/dipole.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace shiftreg;
using namespace shiftreg::optics;

namespace {

// Brute-force Cartesian midpoint sum of the Gaussian intensity over the disc.
double brute_force_power(const IlluminationBeam& b, const MicrolensArray& a, SiteIndex s, int n)
{
    const double cx = a.lens_x(s.col), cy = a.lens_y(s.row), r = 0.5 * a.lens_diameter;
    const double w2 = b.beam_radius_1e2 * b.beam_radius_1e2;
    const double i0 = 2.0 * b.total_power / (physics::pi * w2);
    const double h = 2.0 * r / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x = -r + (i + 0.5) * h, y = -r + (j + 0.5) * h;
            if (x * x + y * y <= r * r)
                sum += std::exp(-2.0 * ((cx + x) * (cx + x) + (cy + y) * (cy + y)) / w2);
        }
    return b.transmission_factor * i0 * sum * h * h;
}

ArrayOptics reference_optics() { return ArrayOptics{}; }

} // namespace

TEST(Power, CentralLensHasClosedForm)
{
    IlluminationBeam b;
    MicrolensArray a;
    const double r = 0.5 * a.lens_diameter, w = b.beam_radius_1e2;
    const double expected = b.transmission_factor * b.total_power * (1.0 - std::exp(-2.0 * r * r / (w * w)));
    EXPECT_NEAR(per_lens_power(b, a, a.central_site()), expected, 1e-13 * expected);
    EXPECT_NEAR(expected, 5.7e-3, 0.05 * 5.7e-3);
}

TEST(Power, OffCentreLensMatchesIndependentQuadrature)
{
    IlluminationBeam b;
    MicrolensArray a;
    const SiteIndex s{a.central_site().row - 1, a.central_site().col + 2};
    // scipy dblquad in polar coordinates, rel. tol 1e-13
    EXPECT_NEAR(per_lens_power(b, a, s), 0.0026604542367410166, 1e-12 * 0.00266);
    EXPECT_NEAR(per_lens_power(b, a, s), brute_force_power(b, a, s, 2000), 2e-4 * 0.00266);
}

TEST(Power, TotalCollectedPowerIsBoundedByTheBeam)
{
    IlluminationBeam b;
    MicrolensArray a;
    double total = 0.0;
    for (int r = 0; r < a.rows; ++r)
        for (int c = 0; c < a.cols; ++c)
            total += per_lens_power(b, a, {r, c});
    // Fill factor of circles on a square grid is π/4 of the transmitted power at most.
    EXPECT_LT(total, b.transmission_factor * b.total_power * physics::pi / 4.0 * 1.0001);
    EXPECT_GT(total, 0.5 * b.transmission_factor * b.total_power);
    EXPECT_THROW(per_lens_power(b, a, {-1, 0}), std::out_of_range);
}

TEST(Geometry, NominalAndMeasuredSeparation)
{
    MicrolensArray a;
    CellProjection nominal;
    EXPECT_NEAR(nominal.separation(a), 125e-6 * 35.5 / 80.0, 1e-15);
    CellProjection measured;
    measured.measured_separation = 55e-6;
    EXPECT_NEAR(measured.separation(a), 55e-6, 1e-18);
    EXPECT_NEAR(measured.displacement(a, 22e-6), 1e-3 * 22e-6 * 55.0 / 125.0, 1e-18);
    EXPECT_LE(measured.displacement(a, 22e-6), 10e-9);
    EXPECT_NEAR(measured.tilt_for_displacement(a, 27.5e-6), 62.5e-3, 1e-15);
}

TEST(Geometry, ProjectionShiftsTheWholeLattice)
{
    MicrolensArray a;
    CellProjection p;
    p.measured_separation = 55e-6;
    TiltState t0, t1;
    t1.tilt_angle = 62.5e-3;
    const auto s0 = project_to_cell(a, p, t0);
    const auto s1 = project_to_cell(a, p, t1);
    EXPECT_NEAR(s0.center_x(a.central_site().col), 0.0, 1e-18);
    EXPECT_NEAR(s1.origin_x - s0.origin_x, 27.5e-6, 1e-15);
    EXPECT_EQ(s1.origin_y, s0.origin_y);
    TiltState far;
    far.tilt_angle = 0.2;
    EXPECT_THROW(project_to_cell(a, p, far), OutOfModelError);
}

TEST(Degradation, EvenInTiltAndPinnedAtHalfPitch)
{
    MicrolensArray a;
    TiltDegradationModel m;
    const double half = 0.5 * a.full_pitch_tilt();
    const auto at_half = tilt_degradation(half, a, m);
    EXPECT_NEAR(at_half.depth_factor, m.depth_factor_at_half_pitch, 1e-15);
    EXPECT_NEAR(at_half.waist_factor, m.waist_factor_at_half_pitch, 1e-15);
    const auto zero = tilt_degradation(0.0, a, m);
    EXPECT_EQ(zero.depth_factor, 1.0);
    EXPECT_EQ(zero.waist_factor, 1.0);
    for (double t : {0.01, 0.03, 0.0625, 0.1}) {
        const auto p = tilt_degradation(t, a, m), n = tilt_degradation(-t, a, m);
        EXPECT_EQ(p.depth_factor, n.depth_factor);
        EXPECT_EQ(p.waist_factor, n.waist_factor);
        EXPECT_LE(p.depth_factor, 1.0);
        EXPECT_GE(p.waist_factor, 1.0);
    }
    EXPECT_THROW(tilt_degradation(1.01 * a.full_pitch_tilt(), a, m), OutOfModelError);
    TiltDegradationModel bad;
    bad.depth_factor_at_half_pitch = 0.7;
    EXPECT_THROW(bad.validate(), PhysicsError);
}

TEST(Snapshot, SiteDepthIsDipoleDepthOfCollectedPowerTimesDegradation)
{
    auto o = reference_optics();
    CellProjection p;
    p.measured_separation = 55e-6;
    TiltState t;
    t.tilt_angle = 62.5e-3;
    const auto rb = physics::rubidium85();
    const auto snap = make_snapshot(o, p, t, rb);
    const auto c = o.array.central_site();
    const auto f = tilt_degradation(t, o.array);
    const double u = physics::dipole_potential_depth(per_lens_power(o.beam, o.array, c), o.waist, o.beam.wavelength, rb);
    EXPECT_NEAR(snap.depth(c), u * f.depth_factor, 1e-12 * std::abs(u));
    EXPECT_NEAR(snap.waist, o.waist * f.waist_factor, 1e-18);
}

namespace {

struct Lattices {
    TrapArraySnapshot a1, a2;
};

Lattices two_arrays()
{
    auto o = reference_optics();
    CellProjection p;
    p.measured_separation = 55e-6;
    const auto rb = physics::rubidium85();
    Lattices l;
    l.a1 = make_snapshot(o, p, {}, rb);
    o.base_offset_x = 27.5e-6;
    o.array.array_id = ArrayId::A2;
    l.a2 = make_snapshot(o, p, {}, rb);
    return l;
}

double brute_force_potential(const TrapArraySnapshot& s, const LatticeView& v, const Vec3& p)
{
    double u = 0.0;
    const double w0 = s.waist * v.waist_scale;
    const double zr = physics::pi * w0 * w0 / s.wavelength;
    const double q = 1.0 + p.z * p.z / (zr * zr);
    for (int r = 0; r < s.rows; ++r)
        for (int c = 0; c < s.cols; ++c) {
            const double dx = p.x - s.center_x(c) - v.offset_x, dy = p.y - s.center_y(r);
            u += s.depth({r, c}) * v.depth_scale * std::exp(-2.0 * (dx * dx + dy * dy) / (w0 * w0 * q)) / q;
        }
    return u;
}

} // namespace

TEST(Potential, NearestSitesAgreeWithFullSum)
{
    const auto l = two_arrays();
    PotentialEvaluator eval(9);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-80e-6, 80e-6), uz(-60e-6, 60e-6);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p{ux(rng), ux(rng), uz(rng)};
        const LatticeView v1{&l.a1, 3e-6, 0.7, 1.02}, v2{&l.a2, 0.0, 0.4, 1.0};
        const double full = brute_force_potential(l.a1, v1, p) + brute_force_potential(l.a2, v2, p);
        const double fast = eval(p, v1, v2).value;
        EXPECT_NEAR(fast, full, 1e-9 * std::abs(l.a1.depth({25, 25}))) << i;
    }
}

TEST(Potential, GradientMatchesFiniteDifferences)
{
    const auto l = two_arrays();
    PotentialEvaluator eval(9);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ur(-4e-6, 4e-6), uz(-40e-6, 40e-6), us(0.0, 1.0);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const double s = us(rng);
        const LatticeView v1{&l.a1, 0.0, s, 1.0}, v2{&l.a2, 0.0, 1.0 - s, 1.0};
        const Vec3 p{27.5e-6 * us(rng) + ur(rng), ur(rng), uz(rng)};
        const auto g = eval(p, v1, v2).gradient;
        auto u = [&](Vec3 q) { return eval(q, v1, v2).value; };
        const double h = 1e-9;
        const Vec3 fd{(u(p + Vec3{h, 0, 0}) - u(p - Vec3{h, 0, 0})) / (2 * h),
                      (u(p + Vec3{0, h, 0}) - u(p - Vec3{0, h, 0})) / (2 * h),
                      (u(p + Vec3{0, 0, h}) - u(p - Vec3{0, 0, h})) / (2 * h)};
        const double scale = std::sqrt(g.norm2());
        if (scale == 0.0)
            continue;
        EXPECT_LT(std::sqrt((g - fd).norm2()) / scale, 1e-5) << i;
        ++checked;
    }
    EXPECT_GT(checked, 990);
}

TEST(Potential, LinearInDepthScaleAndAdditiveOverArrays)
{
    const auto l = two_arrays();
    PotentialEvaluator eval(9);
    const Vec3 p{10e-6, -1e-6, 3e-6};
    const LatticeView full1{&l.a1, 0.0, 1.0, 1.0}, none{&l.a2, 0.0, 0.0, 1.0}, full2{&l.a2, 0.0, 1.0, 1.0};
    const LatticeView off1{&l.a1, 0.0, 0.0, 1.0};
    const double u1 = eval(p, full1, none).value, u2 = eval(p, off1, full2).value;
    EXPECT_NEAR(eval(p, full1, full2).value, u1 + u2, 1e-15 * std::abs(u1 + u2));
    const LatticeView third{&l.a1, 0.0, 0.3, 1.0};
    EXPECT_NEAR(eval(p, third, none).value, 0.3 * u1, 1e-15 * std::abs(u1));
    EXPECT_EQ(eval(p, off1, none).value, 0.0);
}

TEST(Potential, MinimumSitsAtTheSiteCentre)
{
    const auto l = two_arrays();
    PotentialEvaluator eval(9);
    const LatticeView v{&l.a1, 0.0, 1.0, 1.0}, off{&l.a2, 0.0, 0.0, 1.0};
    const auto centre = eval({0, 0, 0}, v, off);
    EXPECT_NEAR(centre.value, l.a1.depth({25, 25}), 1e-12 * std::abs(centre.value));
    EXPECT_LT(std::sqrt(centre.gradient.norm2()), 1e-30);
    EXPECT_GT(eval({0.5e-6, 0, 0}, v, off).value, centre.value);
    EXPECT_GT(eval({0, 0, 5e-6}, v, off).value, centre.value);
}

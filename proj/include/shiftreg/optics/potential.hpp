#pragma once

// Summed Gaussian-beam potential of the two trap arrays,
//   U_site(ρ, z) = depth · exp(-2ρ²/w(z)²) / (1 + (z/z_R)²),
// with analytic gradient. Each array contributes only its k nearest sites.

#include "shiftreg/optics/snapshot.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace shiftreg::optics {

// A lattice as seen at one instant: a snapshot shifted laterally by offset_x,
// its depths multiplied by depth_scale and its waist by waist_scale.
struct LatticeView {
    const TrapArraySnapshot* snapshot = nullptr;
    double offset_x = 0.0;
    double depth_scale = 1.0;
    double waist_scale = 1.0;
};

struct PotentialSample {
    double value = 0.0; // J
    Vec3 gradient{};    // J/m
};

class PotentialEvaluator {
public:
    explicit PotentialEvaluator(int nearest_sites = 9) : k_(nearest_sites)
    {
        if (k_ < 1)
            throw PhysicsError("nearest-site count must be >= 1");
        radius_ = 0;
        while ((2 * radius_ + 1) * (2 * radius_ + 1) < k_)
            ++radius_;
        exact_block_ = (2 * radius_ + 1) * (2 * radius_ + 1) == k_;
        if (!exact_block_)
            ++radius_; // widen the candidate block so the k nearest are inside it
    }

    int nearest_sites() const { return k_; }

    void accumulate(const LatticeView& view, const Vec3& p, PotentialSample& out) const
    {
        if (view.depth_scale == 0.0 || view.snapshot == nullptr)
            return;
        const auto& s = *view.snapshot;
        const double w0 = s.waist * view.waist_scale;
        const double w0sq = w0 * w0;
        const double zr = physics::pi * w0sq / s.wavelength;
        const double zeta = p.z / zr;
        const double q = 1.0 + zeta * zeta;
        const double inv_wz2 = 1.0 / (w0sq * q);
        const double dq_dz = 2.0 * p.z / (zr * zr);

        const double ux = (p.x - s.origin_x - view.offset_x) / s.separation;
        const double uy = (p.y - s.origin_y) / s.separation;
        const int c0 = static_cast<int>(std::lround(ux));
        const int r0 = static_cast<int>(std::lround(uy));
        if (c0 + radius_ < 0 || c0 - radius_ >= s.cols || r0 + radius_ < 0 || r0 - radius_ >= s.rows)
            return;

        if (exact_block_) {
            for (int r = std::max(0, r0 - radius_); r <= std::min(s.rows - 1, r0 + radius_); ++r) {
                for (int c = std::max(0, c0 - radius_); c <= std::min(s.cols - 1, c0 + radius_); ++c)
                    add_site(s, view, r, c, p, q, inv_wz2, dq_dz, out);
            }
            return;
        }

        thread_local std::vector<std::array<double, 3>> cand;
        cand.clear();
        for (int r = std::max(0, r0 - radius_); r <= std::min(s.rows - 1, r0 + radius_); ++r) {
            for (int c = std::max(0, c0 - radius_); c <= std::min(s.cols - 1, c0 + radius_); ++c) {
                const double dx = p.x - (s.center_x(c) + view.offset_x);
                const double dy = p.y - s.center_y(r);
                cand.push_back({dx * dx + dy * dy, double(r), double(c)});
            }
        }
        const auto take = std::min<std::size_t>(cand.size(), static_cast<std::size_t>(k_));
        std::nth_element(cand.begin(), cand.begin() + (take == 0 ? 0 : take - 1), cand.end());
        for (std::size_t i = 0; i < take; ++i)
            add_site(s, view, int(cand[i][1]), int(cand[i][2]), p, q, inv_wz2, dq_dz, out);
    }

    PotentialSample operator()(const Vec3& p, const LatticeView& a1, const LatticeView& a2) const
    {
        PotentialSample out;
        accumulate(a1, p, out);
        accumulate(a2, p, out);
        return out;
    }

private:
    // Exponents beyond this are below 1e-26 of the site depth.
    static constexpr double cutoff_exponent = 60.0;

    static void add_site(const TrapArraySnapshot& s, const LatticeView& view, int r, int c, const Vec3& p,
                         double q, double inv_wz2, double dq_dz, PotentialSample& out)
    {
        const double dx = p.x - (s.center_x(c) + view.offset_x);
        const double dy = p.y - s.center_y(r);
        const double rho2 = dx * dx + dy * dy;
        const double expo = 2.0 * rho2 * inv_wz2;
        if (expo > cutoff_exponent)
            return;
        const double depth = s.depths[static_cast<std::size_t>(r) * s.cols + c] * view.depth_scale;
        const double u = depth * std::exp(-expo) / q;
        out.value += u;
        const double radial = -4.0 * inv_wz2 * u;
        out.gradient.x += radial * dx;
        out.gradient.y += radial * dy;
        out.gradient.z += u * dq_dz * (expo / q - 1.0 / q);
    }

    int k_;
    int radius_ = 1;
    bool exact_block_ = true;
};

struct ScaledSnapshot {
    const TrapArraySnapshot* snapshot = nullptr;
    double scale = 1.0; // in [0, 1]
};

// Convenience form: two fixed snapshots with depth scales s1, s2.
inline PotentialSample potential_and_gradient(const Vec3& point, const ScaledSnapshot& a1, const ScaledSnapshot& a2,
                                              int nearest_sites = 9)
{
    for (double s : {a1.scale, a2.scale})
        if (!(s >= 0.0 && s <= 1.0))
            throw PhysicsError("depth scale factors must lie in [0, 1]");
    PotentialEvaluator eval(nearest_sites);
    return eval(point, LatticeView{a1.snapshot, 0.0, a1.scale, 1.0}, LatticeView{a2.snapshot, 0.0, a2.scale, 1.0});
}

} // namespace shiftreg::optics

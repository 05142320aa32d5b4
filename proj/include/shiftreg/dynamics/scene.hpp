#pragma once

// The two trap arrays of the register and how the control channels map onto
// them. A1 moves with the incidence angle and degrades with it; A2 is static.
//
//   asymmetric  A2's central lens sits at +a/2 under normal incidence
//   symmetric   A2's central lens sits at +a and is tilted back by -a/2,
//               so both arrays meet at +a/2 equally degraded

#include "shiftreg/control/sequence.hpp"
#include "shiftreg/optics/potential.hpp"
#include "shiftreg/optics/snapshot.hpp"
#include "shiftreg/physics/species.hpp"

#include <algorithm>
#include <cmath>

namespace shiftreg::dynamics {

struct SceneConfig {
    physics::AtomSpecies species = physics::rubidium85();
    optics::ArrayOptics a1{};
    optics::ArrayOptics a2{};
    optics::CellProjection projection{};
    optics::TiltDegradationModel degradation{};
    bool symmetric = false;
    int nearest_sites = 9;
    double usable_depth_fraction = 0.5; // sites shallower than this fraction of the centre do not count
};

class Scene {
public:
    explicit Scene(SceneConfig cfg) : cfg_(std::move(cfg)), evaluator_(cfg_.nearest_sites)
    {
        cfg_.a1.array.array_id = optics::ArrayId::A1;
        cfg_.a2.array.array_id = optics::ArrayId::A2;
        cfg_.degradation.validate();
        a = cfg_.projection.separation(cfg_.a1.array);
        half_tilt_ = cfg_.projection.tilt_for_displacement(cfg_.a1.array, 0.5 * a);
        a1_ = optics::make_snapshot(cfg_.a1, cfg_.projection, {}, cfg_.species, cfg_.degradation);
        auto a2 = cfg_.a2;
        a2_tilt_ = cfg_.symmetric ? -half_tilt_ : 0.0;
        a2.base_offset_x = cfg_.a1.base_offset_x + (cfg_.symmetric ? a : 0.5 * a);
        optics::TiltState t2;
        t2.tilt_angle = a2_tilt_;
        a2_ = optics::make_snapshot(a2, cfg_.projection, t2, cfg_.species, cfg_.degradation);
    }

    const SceneConfig& config() const { return cfg_; }
    const physics::AtomSpecies& species() const { return cfg_.species; }
    const optics::TrapArraySnapshot& a1_base() const { return a1_; }
    const optics::TrapArraySnapshot& a2() const { return a2_; }
    const optics::PotentialEvaluator& evaluator() const { return evaluator_; }
    double separation() const { return a; }
    double half_shift_tilt() const { return half_tilt_; }
    double a2_tilt() const { return a2_tilt_; }

    optics::LatticeView a1_view(double tilt, double scale) const
    {
        const auto f = optics::tilt_degradation(tilt, cfg_.a1.array, cfg_.degradation);
        return {&a1_, cfg_.projection.displacement(cfg_.a1.array, tilt), scale * f.depth_factor, f.waist_factor};
    }

    optics::LatticeView a2_view(double scale) const { return {&a2_, 0.0, scale, 1.0}; }

    // A1 at a tilt as a standalone snapshot (for sampling and binning).
    optics::TrapArraySnapshot a1_snapshot(double tilt) const
    {
        optics::TiltState t;
        t.tilt_angle = tilt;
        return optics::make_snapshot(cfg_.a1, cfg_.projection, t, cfg_.species, cfg_.degradation);
    }

    // Number of sites along the shift axis, through the centre, whose depth
    // is at least the usable fraction of the central depth.
    int capacity() const
    {
        const auto c = cfg_.a1.array.central_site();
        const double centre = a1_.depth(c);
        int n = 0;
        for (int col = 0; col < a1_.cols; ++col)
            if (a1_.depth({c.row, col}) <= cfg_.usable_depth_fraction * centre)
                ++n;
        return n;
    }

    control::ShiftGeometry geometry() const { return {half_tilt_, capacity()}; }

    optics::PotentialSample potential(const optics::Vec3& p, const optics::LatticeView& v1,
                                      const optics::LatticeView& v2) const
    {
        return evaluator_(p, v1, v2);
    }

    // Deepest radial trap frequency any waveform can produce (full A1 or A2).
    double max_radial_frequency() const
    {
        double best = 0.0;
        for (const auto* s : {&a1_, &a2_}) {
            const double deepest = *std::min_element(s->depths.begin(), s->depths.end());
            if (deepest < 0.0)
                best = std::max(best, physics::trap_frequencies(deepest, s->waist, s->wavelength, cfg_.species).radial);
        }
        return best;
    }

private:
    SceneConfig cfg_;
    optics::PotentialEvaluator evaluator_;
    double a = 0.0;
    double half_tilt_ = 0.0;
    double a2_tilt_ = 0.0;
    optics::TrapArraySnapshot a1_, a2_;
};

} // namespace shiftreg::dynamics

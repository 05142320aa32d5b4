#pragma once

#include "shiftreg/error.hpp"
#include "shiftreg/optics/geometry.hpp"
#include "shiftreg/physics/constants.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace shiftreg::optics {

namespace detail {

struct GaussLegendre {
    std::array<double, 32> nodes{};
    std::array<double, 32> weights{};
};

// Nodes and weights on [-1, 1] by Newton iteration on P_32.
inline const GaussLegendre& gauss_legendre32()
{
    static const GaussLegendre rule = [] {
        GaussLegendre r;
        constexpr int n = 32;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(physics::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = pk;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16)
                    break;
            }
            r.nodes[i] = x;
            r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return r;
    }();
    return rule;
}

} // namespace detail

// Power of a 1/e² Gaussian beam (centered on the central lens) collected by
// one circular lens aperture, times the transmission factor. The angular
// integral over the aperture is done in closed form (Bessel I₀), the radial
// one by Gauss-Legendre quadrature.
inline double per_lens_power(const IlluminationBeam& beam, const MicrolensArray& array, SiteIndex site)
{
    if (!array.contains(site))
        throw std::out_of_range("lens site (" + std::to_string(site.row) + ", " + std::to_string(site.col) +
                                ") outside grid");
    const double w2 = beam.beam_radius_1e2 * beam.beam_radius_1e2;
    const double i0 = 2.0 * beam.total_power / (physics::pi * w2);
    const double cx = array.lens_x(site.col);
    const double cy = array.lens_y(site.row);
    const double c2 = cx * cx + cy * cy;
    const double c = std::sqrt(c2);
    const double radius = 0.5 * array.lens_diameter;

    const auto& rule = detail::gauss_legendre32();
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double rho = 0.5 * radius * (1.0 + rule.nodes[i]);
        // ∮ exp(-2|c+ρ|²/w²) dθ = 2π exp(-2(c²+ρ²)/w²) I₀(4cρ/w²)
        const double angular =
            std::exp(-2.0 * (c2 + rho * rho) / w2) * std::cyl_bessel_i(0.0, 4.0 * c * rho / w2);
        sum += rule.weights[i] * rho * angular;
    }
    const double collected = i0 * physics::two_pi * 0.5 * radius * sum;
    return beam.transmission_factor * collected;
}

} // namespace shiftreg::optics

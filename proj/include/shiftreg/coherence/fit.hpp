#pragma once

// Two-parameter Gaussian decay fit C(t) = C0·exp(−t²/T²) by Levenberg–Marquardt.

#include "shiftreg/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace shiftreg::coherence {

struct GaussianFit {
    double c0 = 0.0;
    double t2 = 0.0; // s
    double c0_error = 0.0;
    double t2_error = 0.0;
    std::array<double, 4> covariance{}; // [c0c0, c0t2, t2c0, t2t2]
    double r_squared = 0.0;
    double chi2 = 0.0; // weighted residual sum of squares
    int iterations = 0;
    std::vector<double> residuals;
};

inline double gaussian_model(double c0, double t2, double t) { return c0 * std::exp(-(t * t) / (t2 * t2)); }

// sigma may be empty (unit weights). Uncertainties are scaled by the reduced
// chi² so they reflect the actual scatter of the residuals.
inline GaussianFit fit_gaussian_contrast(const std::vector<double>& t, const std::vector<double>& c,
                                         const std::vector<double>& sigma = {})
{
    const std::size_t n = t.size();
    if (n != c.size() || (!sigma.empty() && sigma.size() != n))
        throw FitError("fit input arrays differ in length", "");
    if (n < 4)
        throw FitError("Gaussian contrast fit needs at least 4 points", "");
    bool any_positive = false;
    for (double v : c) {
        if (!std::isfinite(v) || v < 0.0)
            throw FitError("contrast values must be finite and non-negative", "");
        any_positive = any_positive || v > 0.0;
    }
    if (!any_positive)
        throw FitError("degenerate fit: all contrasts are zero", "");
    std::vector<double> w(n, 1.0);
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (!(sigma[i] > 0.0))
            throw FitError("fit uncertainties must be positive", "");
        w[i] = 1.0 / (sigma[i] * sigma[i]);
    }

    // Start: log-linear regression of ln C on t² over the positive points.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (c[i] <= 0.0)
            continue;
        const double x = t[i] * t[i], y = std::log(c[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y; m += 1;
    }
    double c0 = 0.0, t2 = 0.0;
    const double den = m * sxx - sx * sx;
    if (m >= 2 && den > 0.0) {
        const double slope = (m * sxy - sx * sy) / den;
        c0 = std::exp((sy - slope * sx) / m);
        t2 = slope < 0.0 ? std::sqrt(-1.0 / slope) : 0.0;
    }
    double tmax = 0.0, cmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tmax = std::max(tmax, std::abs(t[i]));
        cmax = std::max(cmax, c[i]);
    }
    if (!(t2 > 0.0) || !std::isfinite(t2))
        t2 = tmax > 0.0 ? tmax : 1.0;
    if (!(c0 > 0.0) || !std::isfinite(c0))
        c0 = cmax;

    auto chi2_of = [&](double a, double b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = c[i] - gaussian_model(a, b, t[i]);
            s += w[i] * r * r;
        }
        return s;
    };

    double lambda = 1e-3;
    double chi2 = chi2_of(c0, t2);
    std::string trace;
    int it = 0;
    bool converged = false;
    for (; it < 200; ++it) {
        double jtj[3] = {0, 0, 0}, jtr[2] = {0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            const double e = std::exp(-(t[i] * t[i]) / (t2 * t2));
            const double d0 = e;
            const double d1 = c0 * e * 2.0 * t[i] * t[i] / (t2 * t2 * t2);
            const double r = c[i] - c0 * e;
            jtj[0] += w[i] * d0 * d0;
            jtj[1] += w[i] * d0 * d1;
            jtj[2] += w[i] * d1 * d1;
            jtr[0] += w[i] * d0 * r;
            jtr[1] += w[i] * d1 * r;
        }
        bool stepped = false;
        for (int tries = 0; tries < 30 && !stepped; ++tries) {
            const double a00 = jtj[0] * (1.0 + lambda), a11 = jtj[2] * (1.0 + lambda), a01 = jtj[1];
            const double det = a00 * a11 - a01 * a01;
            if (!(std::abs(det) > 0.0)) {
                lambda *= 10.0;
                continue;
            }
            const double dc0 = (a11 * jtr[0] - a01 * jtr[1]) / det;
            const double dt2 = (a00 * jtr[1] - a01 * jtr[0]) / det;
            const double nc0 = c0 + dc0, nt2 = t2 + dt2;
            const double nchi2 = nt2 > 0.0 ? chi2_of(nc0, nt2) : INFINITY;
            if (nchi2 <= chi2) {
                const bool small = std::abs(dc0) <= 1e-12 * (std::abs(c0) + 1e-300) + 1e-15 &&
                                   std::abs(dt2) <= 1e-12 * std::abs(t2);
                const bool flat = chi2 - nchi2 <= 1e-15 * (chi2 + 1e-300);
                c0 = nc0;
                t2 = nt2;
                chi2 = nchi2;
                lambda = std::max(lambda * 0.1, 1e-12);
                stepped = true;
                converged = small || flat;
            } else {
                lambda *= 10.0;
            }
        }
        trace += "iter " + std::to_string(it) + ": c0=" + std::to_string(c0) + " t2=" + std::to_string(t2) +
                 " chi2=" + std::to_string(chi2) + " lambda=" + std::to_string(lambda) + "\n";
        if (!stepped) {
            // No downhill step at any damping: at a minimum to machine precision.
            converged = true;
        }
        if (converged)
            break;
    }
    if (!converged || !std::isfinite(c0) || !std::isfinite(t2) || !(t2 > 0.0))
        throw FitError("Gaussian contrast fit did not converge", trace);

    GaussianFit fit;
    fit.c0 = c0;
    fit.t2 = std::abs(t2);
    fit.iterations = it + 1;
    fit.chi2 = chi2;
    double jtj[3] = {0, 0, 0};
    double mean = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += w[i] * c[i];
        wsum += w[i];
    }
    mean /= wsum;
    double tss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(-(t[i] * t[i]) / (t2 * t2));
        const double d0 = e, d1 = c0 * e * 2.0 * t[i] * t[i] / (t2 * t2 * t2);
        jtj[0] += w[i] * d0 * d0;
        jtj[1] += w[i] * d0 * d1;
        jtj[2] += w[i] * d1 * d1;
        fit.residuals.push_back(c[i] - c0 * e);
        tss += w[i] * (c[i] - mean) * (c[i] - mean);
    }
    fit.r_squared = tss > 0.0 ? 1.0 - chi2 / tss : 1.0;
    const double det = jtj[0] * jtj[2] - jtj[1] * jtj[1];
    if (!(det > 0.0))
        throw FitError("degenerate fit: singular normal matrix", trace);
    const double scale = n > 2 ? chi2 / static_cast<double>(n - 2) : 0.0;
    fit.covariance = {scale * jtj[2] / det, -scale * jtj[1] / det, -scale * jtj[1] / det, scale * jtj[0] / det};
    fit.c0_error = std::sqrt(fit.covariance[0]);
    fit.t2_error = std::sqrt(fit.covariance[3]);
    return fit;
}

} // namespace shiftreg::coherence

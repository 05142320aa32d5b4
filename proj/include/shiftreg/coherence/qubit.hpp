#pragma once

// Two-level clock-state qubit in the frame rotating with the drive.
// |a|² is the F=2 population, |b|² the F=3 population.

#include <cmath>
#include <complex>

namespace shiftreg::coherence {

using cplx = std::complex<double>;

struct Spinor {
    cplx a{1.0, 0.0};
    cplx b{0.0, 0.0};

    double norm() const { return std::norm(a) + std::norm(b); }
    double population_f2() const { return std::norm(a); }
    double population_f3() const { return std::norm(b); }
};

// Exact rotation for a square pulse of Rabi frequency Ω, detuning Δ and drive
// phase φ lasting τ:  H = ħ/2 (Δσz + Ω(cos φ σx + sin φ σy)).
inline Spinor pulse(const Spinor& s, double rabi, double detuning, double phase, double duration)
{
    const double w = std::hypot(rabi, detuning);
    if (w == 0.0)
        return s;
    const double half = 0.5 * w * duration;
    const double c = std::cos(half), sn = std::sin(half);
    const double nz = detuning / w;
    const cplx nperp = (rabi / w) * cplx(std::cos(phase), std::sin(phase)); // n_x + i n_y
    const cplx mi(0.0, -1.0);
    // U = cos·I − i·sin·(n·σ)
    const cplx u00 = c + mi * sn * nz;
    const cplx u11 = c - mi * sn * nz;
    const cplx u01 = mi * sn * std::conj(nperp);
    const cplx u10 = mi * sn * nperp;
    return {u00 * s.a + u01 * s.b, u10 * s.a + u11 * s.b};
}

// Free precession by an accumulated phase φ = ∫Δ dt.
inline Spinor precess(const Spinor& s, double phase)
{
    const cplx e(std::cos(0.5 * phase), -std::sin(0.5 * phase));
    return {e * s.a, std::conj(e) * s.b};
}

} // namespace shiftreg::coherence

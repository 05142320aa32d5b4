#include "shiftreg/coherence/dephasing.hpp"
#include "shiftreg/coherence/experiment.hpp"
#include "shiftreg/coherence/fit.hpp"
#include "shiftreg/coherence/qubit.hpp"
#include "shiftreg/coherence/sequence.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace shiftreg;
using namespace shiftreg::coherence;

namespace {

CoherenceScenario coherence_trap(double temperature, std::size_t atoms, std::uint64_t seed = 41)
{
    CoherenceScenario sc;
    sc.scene.projection.measured_separation = 55e-6;
    for (auto* a : {&sc.scene.a1, &sc.scene.a2}) {
        a->beam.total_power = 0.150;
        a->beam.beam_radius_1e2 = 520e-6;
        a->beam.wavelength = 815e-9;
    }
    sc.scene.symmetric = true;
    sc.ensemble.temperature = temperature;
    sc.ensemble.atoms = atoms;
    sc.ensemble.seed = seed;
    return sc;
}

DephasingModel model_for(const CoherenceScenario& sc, double heating = 0.0)
{
    return make_dephasing_model(sc.scene.a1.beam.wavelength, sc.scene.species, heating);
}

std::vector<double> edges_of(const std::vector<PulseSequence>& seqs) { return required_times(seqs); }

} // namespace

TEST(Qubit, PiAndHalfPiPulses)
{
    const double rabi = physics::pi / 210e-6;
    const auto flipped = pulse(Spinor{}, rabi, 0.0, 0.0, 210e-6);
    EXPECT_NEAR(flipped.population_f3(), 1.0, 1e-14);
    const auto half = pulse(Spinor{}, rabi, 0.0, 0.7, 105e-6);
    EXPECT_NEAR(half.population_f2(), 0.5, 1e-14);
    // Two π/2 pulses with opposite phase undo each other.
    const auto back = pulse(half, rabi, 0.0, 0.7 + physics::pi, 105e-6);
    EXPECT_NEAR(back.population_f2(), 1.0, 1e-14);
}

TEST(Qubit, RabiFormulaAndNormPreservation)
{
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double rabi = 1e4 * (0.1 + u(g)), det = 2e4 * (u(g) - 0.5), tau = 1e-3 * u(g), ph = 6.0 * u(g);
        const auto s = pulse(Spinor{}, rabi, det, ph, tau);
        const double w = std::hypot(rabi, det);
        const double expected = rabi * rabi / (w * w) * std::pow(std::sin(0.5 * w * tau), 2);
        EXPECT_NEAR(s.population_f3(), expected, 1e-12);
        EXPECT_NEAR(s.norm(), 1.0, 1e-13);
        EXPECT_NEAR(precess(s, 6.0 * u(g)).norm(), 1.0, 1e-13);
        EXPECT_NEAR(precess(s, 2.0).population_f2(), s.population_f2(), 1e-14);
    }
}

TEST(Dephasing, ModelConversionsAreInverses)
{
    const auto sc = coherence_trap(15e-6, 1);
    const auto m = model_for(sc, 6e-6);
    EXPECT_NEAR(m.heating_for_rate(m.kick_rate()), 6e-6, 1e-18);
    EXPECT_LT(m.frequency_step(1e-30), 0.0);
    EXPECT_GT(differential_shift(-1e-27, m), 0.0);
    EXPECT_THROW(differential_shift(1e-30, m), PhysicsError);
    auto bad = m;
    bad.eta = 0.0;
    EXPECT_THROW(bad.validate(), PhysicsError);
    bad = m;
    bad.recoil_energy = 0.0;
    EXPECT_THROW(bad.validate(), PhysicsError);
}

TEST(Fit, RecoversNoiselessGaussianExactly)
{
    std::vector<double> t, c;
    for (int i = 0; i < 12; ++i) {
        t.push_back(10e-3 * (i + 1));
        c.push_back(gaussian_model(0.93, 74e-3, t.back()));
    }
    const auto f = fit_gaussian_contrast(t, c);
    EXPECT_NEAR(f.c0, 0.93, 1e-9);
    EXPECT_NEAR(f.t2, 74e-3, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(Fit, TwoPercentNoiseBiasIsBelowOnePercent)
{
    std::mt19937_64 g(2024);
    std::normal_distribution<double> noise(0.0, 0.02);
    double sum = 0.0;
    const int trials = 100;
    for (int k = 0; k < trials; ++k) {
        std::vector<double> t, c, s;
        for (int i = 0; i < 9; ++i) {
            t.push_back(2.0 * (15e-3 + 7.5e-3 * i));
            c.push_back(std::max(0.0, gaussian_model(0.95, 74e-3, t.back()) + noise(g)));
            s.push_back(0.02);
        }
        sum += fit_gaussian_contrast(t, c, s).t2;
    }
    EXPECT_LT(std::abs(sum / trials / 74e-3 - 1.0), 0.01);
}

TEST(Fit, DegenerateInputsRaiseFitError)
{
    const std::vector<double> t{1, 2, 3, 4, 5};
    EXPECT_THROW(fit_gaussian_contrast({1, 2, 3}, {1, 1, 1}), FitError);
    EXPECT_THROW(fit_gaussian_contrast(t, {0, 0, 0, 0, 0}), FitError);
    EXPECT_THROW(fit_gaussian_contrast(t, {1, 0.9, -0.1, 0.5, 0.2}), FitError);
    EXPECT_THROW(fit_gaussian_contrast(t, {1, 0.9, 0.8}), FitError);
    EXPECT_THROW(fit_gaussian_contrast(t, {1, 0.9, 0.8, 0.7, 0.6}, {0.1, 0.1, 0.0, 0.1, 0.1}), FitError);
    try {
        fit_gaussian_contrast(t, {0, 0, 0, 0, 0});
    } catch (const FitError& e) {
        EXPECT_NE(std::string(e.what()).find("degenerate"), std::string::npos);
    }
}

TEST(Sequence, EchoPulsePositions)
{
    PulseTiming timing;
    const auto s = PulseSequence::echo(10e-3, timing, 0.2e-3, 1.0);
    ASSERT_EQ(s.pulses.size(), 3u);
    EXPECT_NEAR(s.pulses[0].begin(), 0.0, 1e-18);
    EXPECT_NEAR(s.pulses[1].center - s.pulses[0].center, 10e-3, 1e-15);
    EXPECT_NEAR(s.pulses[2].center - s.pulses[0].center, 20.2e-3, 1e-15);
    EXPECT_EQ(s.pulses[2].phase, 1.0);
    EXPECT_THROW(PulseSequence::echo(0.1e-3, timing), PhysicsError); // pulses overlap
}

TEST(Echo, ColdAtomsWithoutHeatingKeepFullContrast)
{
    const auto sc = coherence_trap(0.0, 8);
    const auto m = model_for(sc);
    std::vector<PulseSequence> seqs{PulseSequence::ramsey(0.0, sc.timing)};
    const std::vector<double> tps{5e-3, 10e-3, 20e-3};
    for (double tp : tps)
        seqs.push_back(PulseSequence::echo(tp, sc.timing));
    auto scn = sc;
    scn.integrator.background_lifetime = 0.0;
    TrajectoryBank bank(scn, control::Protocol::rest, true, edges_of(seqs), seqs.back().end(), 0.0, 0.0);
    const double ref = ramsey_reference_amplitude(bank, m, sc.timing);
    EXPECT_NEAR(ref, 1.0, 1e-9);
    const auto c = echo_curve(bank, m, sc.timing, tps, ref);
    for (double v : c.contrast)
        EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(Echo, GlobalDrivePhaseDoesNotChangeTheReadout)
{
    const auto sc = coherence_trap(15e-6, 30);
    const auto m = model_for(sc);
    const auto a = PulseSequence::echo(5e-3, sc.timing, 0.0, 0.4, 0.0);
    const auto b = PulseSequence::echo(5e-3, sc.timing, 0.0, 0.4, 2.1);
    TrajectoryBank bank(sc, control::Protocol::rest, true, edges_of({a}), a.end(), 0.0, 0.0);
    EXPECT_NEAR(evolve_qubits(bank, m, a).population_f2, evolve_qubits(bank, m, b).population_f2, 1e-12);
}

TEST(Echo, RefocusesAtTwiceTheEchoTime)
{
    const auto sc = coherence_trap(15e-6, 1500);
    const auto m = model_for(sc);
    const double tp = 5e-3, step = 50e-6;
    std::vector<double> offsets;
    std::vector<PulseSequence> seqs{PulseSequence::ramsey(0.0, sc.timing)};
    for (int k = -10; k <= 10; ++k) {
        offsets.push_back(k * step);
        seqs.push_back(PulseSequence::echo(tp, sc.timing, k * step));
    }
    TrajectoryBank bank(sc, control::Protocol::rest, true, edges_of(seqs), seqs.back().end() + 1e-4, 0.0, 0.0);
    double best = -1.0, best_offset = 1.0;
    for (double off : offsets) {
        const auto c = fringe_contrast(bank, m, [&](double ph) { return PulseSequence::echo(tp, sc.timing, off, ph); });
        if (c.contrast > best) {
            best = c.contrast;
            best_offset = off;
        }
    }
    EXPECT_LE(std::abs(best_offset), step + 1e-12);
}

TEST(Ramsey, DecayTimeScalesInverselyWithTemperature)
{
    auto decay = [](double T) {
        const auto sc = coherence_trap(T, 400, 43);
        const auto m = model_for(sc);
        std::vector<double> gaps;
        std::vector<PulseSequence> seqs{PulseSequence::ramsey(0.0, sc.timing)};
        for (int k = 1; k <= 80; ++k) {
            gaps.push_back(0.25e-3 * k);
            seqs.push_back(PulseSequence::ramsey(gaps.back(), sc.timing));
        }
        TrajectoryBank bank(sc, control::Protocol::rest, true, edges_of(seqs), seqs.back().end(), 0.0, 0.0);
        return one_over_e_time(ramsey_curve(bank, m, sc.timing, gaps));
    };
    const double t10 = decay(10e-6), t20 = decay(20e-6);
    EXPECT_NEAR(t10 / t20, 2.0, 0.2);
}

TEST(Heating, RecordedKicksCarryTwoRecoilsOnAverage)
{
    auto sc = coherence_trap(15e-6, 200);
    sc.integrator.background_lifetime = 0.0; // every atom records kicks over the full span
    const auto m = model_for(sc, 5e-3);
    TrajectoryBank bank(sc, control::Protocol::rest, true, {}, 10e-3, m.kick_rate(), m.recoil_momentum);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& per_atom : bank.record().kicks)
        for (const auto& k : per_atom) {
            sum += k.energy;
            ++n;
        }
    const double expected_n = m.kick_rate() * 10e-3 * 200;
    EXPECT_NEAR(double(n), expected_n, 5.0 * std::sqrt(expected_n));
    // v·Δp averages out; |Δp|²/2m = 2 E_rec on average over emission directions.
    EXPECT_NEAR(sum / double(n) / m.recoil_energy, 2.0, 0.3);
    EXPECT_THROW(kick_keep_fraction(bank, model_for(sc, 10e-3)), PhysicsError);
    EXPECT_NEAR(kick_keep_fraction(bank, model_for(sc, 2.5e-3)), 0.5, 1e-12);
}

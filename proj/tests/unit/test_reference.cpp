#include <gtest/gtest.h>

#include <cmath>

#include "tunnelres/reference_solver.hpp"
#include "tunnelres/scattering.hpp"
#include "tunnelres/siegert.hpp"

using namespace tunnelres;

namespace {

double mod_pi_distance(double a, double b) {
    double d = std::fmod(a - b, constants::pi);
    if (d < 0.0) d += constants::pi;
    return std::min(d, constants::pi - d);
}

}  // namespace

TEST(Numerov, FreeParticleHasZeroPhase) {
    for (int l : {0, 3}) {
        FunctionChannel free([](double) { return 0.0; }, 1.0, l, 10.0);
        const auto r = numerov_phase_shift(free, 0.5);
        EXPECT_LT(mod_pi_distance(r.delta_mod_pi, 0.0), 1e-6) << "l=" << l;
    }
}

TEST(Numerov, HardStepMatchesClosedForm) {
    // repulsive step V0 on r < R0, s-wave: tan(delta) from matching at R0
    const double mu = 1.0, V0 = 3.0, R0 = 2.0, E = 0.7;
    FunctionChannel step([&](double r) { return r < R0 ? V0 : 0.0; }, mu, 0, R0);
    const double k = std::sqrt(2.0 * mu * E), q = std::sqrt(2.0 * mu * (V0 - E));
    const double exact = std::atan(k * std::tanh(q * R0) / q) - k * R0;
    NumerovOptions opt;
    opt.step = 0.0005;
    const auto r = numerov_phase_shift(step, E, opt);
    EXPECT_LT(mod_pi_distance(r.delta_mod_pi, exact), 2e-3);
}

TEST(Numerov, StepHalvingConverges) {
    const auto d = load_state_tables();
    const ChannelPotential cp(d.find("5S"), 1, 5, mu_K_He3());
    NumerovOptions a, b;
    a.step = 0.004;
    b.step = 0.002;
    const double E = meV(15.0);
    EXPECT_LT(mod_pi_distance(numerov_phase_shift(cp, E, a).delta_mod_pi, numerov_phase_shift(cp, E, b).delta_mod_pi), 1e-4);
}

TEST(Numerov, CoarseStepIsRejected) {
    FunctionChannel free([](double) { return 0.0; }, 1.0, 0, 10.0);
    NumerovOptions opt;
    opt.step = 1.0;
    EXPECT_THROW(numerov_phase_shift(free, 2.0, opt), NumericError);
}

TEST(Numerov, NodeCounts) {
    const auto d = load_state_tables();
    const double mu = mu_K_He3();
    // the shallow van der Waals well of the ground state holds a single level
    for (int j : {0, 1}) EXPECT_EQ(count_bound_states(ChannelPotential(d.find("4S"), j, 0, mu)), 1);
    EXPECT_EQ(count_bound_states(ChannelPotential(d.find("4S"), 1, 10, mu)), 0);
    EXPECT_GE(count_bound_states(ChannelPotential(d.find("5S"), 1, 0, mu)), 1);
    EXPECT_EQ(count_bound_states(ChannelPotential(d.find("5S"), 1, 60, mu)), 0);
}

TEST(Oracle, SiegertPhasesAgreeWithNumerov) {
    const auto d = load_state_tables();
    const double mu = mu_K_He3();
    double worst = 0.0;
    for (const char* s : {"4S", "5S"})
        for (int j : {0, 1})
            for (int l : {0, 5, 25}) {
                const ChannelPotential cp(d.find(s), j, l, mu);
                const PoleSet ps = solve_poles(cp, SiegertSpec{});
                for (double e : {5.0, 15.0, 30.0, 60.0}) {
                    const double E = meV(e);
                    const double dd = mod_pi_distance(phase_shift(ps, E), numerov_phase_shift(cp, E).delta_mod_pi);
                    worst = std::max(worst, dd);
                    EXPECT_LT(dd, 1e-3) << s << " j=" << j << " l=" << l << " E=" << e;
                }
            }
    RecordProperty("worst_rad", std::to_string(worst));
}

TEST(Oracle, FallbackBoundaryErrorFollowsCentrifugalTail) {
    // plain outgoing matching at a is exact for l = 0 and off by O(l(l+1)/(2ka)) otherwise
    const auto d = load_state_tables();
    const double mu = mu_K_He3();
    SiegertSpec plain;
    plain.exact_boundary = false;
    for (int l : {0, 1, 5}) {
        const ChannelPotential cp(d.find("5S"), 1, l, mu);
        const PoleSet ps = solve_poles(cp, plain);
        for (double e : {5.0, 30.0, 60.0}) {
            const double E = meV(e);
            const double k = wavenumber(mu, E);
            const double bound = l == 0 ? 1e-3 : 1.5 * l * (l + 1.0) / (2.0 * k * plain.a);
            EXPECT_LT(mod_pi_distance(phase_shift(ps, E), numerov_phase_shift(cp, E).delta_mod_pi), bound) << "l=" << l << " E=" << e;
        }
    }
}

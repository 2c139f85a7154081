#include <gtest/gtest.h>

#include "tunnelres/units.hpp"

using namespace tunnelres;

TEST(Units, EnergyRoundTrip) {
    for (Unit u : {Unit::hartree, Unit::meV, Unit::eV, Unit::MHz, Unit::kelvin}) {
        const auto q = convert({1.2345, u}, Unit::hartree);
        EXPECT_NEAR(convert(q, u).value, 1.2345, 1e-12);
    }
}

TEST(Units, KnownValues) {
    EXPECT_NEAR(convert({1.0, Unit::hartree}, Unit::meV).value, 27211.386245988, 1e-6);
    EXPECT_NEAR(convert({1.0, Unit::bohr}, Unit::angstrom).value, 0.529177210903, 1e-12);
    EXPECT_NEAR(convert({1.0, Unit::bohr2}, Unit::cm2).value, 2.8002852e-17, 1e-23);
    EXPECT_NEAR(to_atomic(1.0, Unit::cm3_per_s) * 6.1262e-9, 1.0, 1e-4);
}

TEST(Units, IncompatibleDimensionsThrow) {
    EXPECT_THROW(convert({1.0, Unit::meV}, Unit::bohr), UnitError);
    EXPECT_THROW(convert({1.0, Unit::cm2}, Unit::second), UnitError);
}

TEST(Units, ReducedMass) {
    EXPECT_NEAR(mu_K_He3(), 5102.89, 0.01);
    EXPECT_THROW(reduced_mass(-1.0, 3.0), UnitError);
    EXPECT_NEAR(reduced_mass(2.0, 2.0).value, constants::amu_in_electron_mass, 1e-9);
}

TEST(Units, WaveNumber) {
    const double mu = mu_K_He3();
    const double E = meV(10.0);
    EXPECT_NEAR(energy_of(mu, wavenumber(mu, E)), E, 1e-18);
    EXPECT_NEAR(wavenumber(mu, E), std::sqrt(2.0 * mu * E), 0.0);
}

TEST(Units, Lifetimes) {
    EXPECT_DOUBLE_EQ(parse_lifetime("1ns"), 1e-9);
    EXPECT_DOUBLE_EQ(parse_lifetime("250 ps"), 250e-12);
    EXPECT_DOUBLE_EQ(parse_lifetime("1e-9"), 1e-9);
    EXPECT_DOUBLE_EQ(parse_lifetime("3us"), 3e-6);
    EXPECT_THROW(parse_lifetime("1 parsec"), UnitError);
    EXPECT_THROW(parse_lifetime("abc"), UnitError);
    EXPECT_THROW(parse_lifetime("0ns"), UnitError);
    EXPECT_NEAR(rate_from_lifetime(1e-9), constants::atomic_time_in_s / 1e-9, 0.0);
}

TEST(Units, AngularAndCyclicFrequencies) {
    // 2 pi x 25 MHz expressed per atomic time
    EXPECT_NEAR(rate_from_angular_MHz(25.0), 2.0 * constants::pi * 25e6 * constants::atomic_time_in_s, 1e-20);
    // h f in hartree equals 2 pi f in inverse atomic time
    EXPECT_NEAR(hyperfine_to_atomic(100.0), 2.0 * constants::pi * 100e6 * constants::atomic_time_in_s, 1e-15);
}

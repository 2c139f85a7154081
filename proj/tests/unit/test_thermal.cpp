#include <gtest/gtest.h>

#include <cmath>

#include "tunnelres/thermal.hpp"

using namespace tunnelres;

TEST(Thermal, MeanSpeedOfPotassiumHelium) {
    const double v = mean_thermal_speed(373.15, mu_K_He3());
    const double m_per_s = v * constants::bohr_in_cm * 1e-2 / constants::atomic_time_in_s;
    EXPECT_NEAR(m_per_s, 1680.0, 10.0);
}

TEST(Thermal, ConstantCrossSectionGivesSigmaTimesMeanSpeed) {
    const double T = 373.15, mu = mu_K_He3(), sigma = 100.0;
    SigmaBatch constant = [&](const std::vector<double>& E) { return std::vector<double>(E.size(), sigma); };
    RateGridOptions opt;
    opt.lo = 1e-6;
    opt.hi = 60.0;
    const RateResult r = thermal_average(constant, T, mu, base_energy_grid(T, opt), opt);
    EXPECT_NEAR(r.k_se, rate_to_cgs(sigma * mean_thermal_speed(T, mu)), 1e-4 * r.k_se);
    EXPECT_FALSE(r.degraded);
}

TEST(Thermal, NarrowLorentzianIsResolvedByWindows) {
    const double T = 373.15, mu = mu_K_He3();
    const double E0 = meV(10.0), G = meV(1e-4);
    SigmaBatch lor = [&](const std::vector<double>& E) {
        std::vector<double> s;
        for (double e : E) s.push_back(1.0 / (1.0 + 4.0 * (e - E0) * (e - E0) / (G * G)));
        return s;
    };
    RateGridOptions opt;
    std::vector<double> grid = base_energy_grid(T, opt);
    append_window(grid, {E0, 10.0 * G}, opt.window_points);
    const RateResult r = thermal_average(lor, T, mu, grid, opt);
    const double kT = thermal_energy(T);
    const double exact = std::sqrt(8.0 / (constants::pi * mu)) * std::pow(kT, -1.5) * (constants::pi * G / 2.0) * E0 * std::exp(-E0 / kT);
    EXPECT_NEAR(r.k_se, rate_to_cgs(exact), 1e-2 * r.k_se);
}

TEST(Thermal, PointCapMarksResultDegraded) {
    SigmaBatch wild = [](const std::vector<double>& E) {
        std::vector<double> s;
        for (double e : E) s.push_back(1.0 + std::sin(1e7 * e));
        return s;
    };
    RateGridOptions opt;
    opt.max_points = 600;
    const RateResult r = thermal_average(wild, 300.0, mu_K_He3(), base_energy_grid(300.0, opt), opt);
    EXPECT_TRUE(r.degraded);
}

TEST(Thermal, InvalidInputs) {
    EXPECT_THROW(thermal_energy(-1.0), ConfigError);
    RateGridOptions bad;
    bad.base_points = 1;
    EXPECT_THROW(base_energy_grid(300.0, bad), ConfigError);
}

TEST(Thermal, EnhancementRatio) {
    EXPECT_DOUBLE_EQ(enhancement_ratio(6.0, 2.0).ratio, 3.0);
    EXPECT_TRUE(enhancement_ratio(1.0, 0.0).infinite);
}

TEST(Thermal, GammaModel) {
    const GammaModel m;
    EXPECT_DOUBLE_EQ(m(0.0), rate_from_lifetime(10e-9));
    EXPECT_NEAR(m(2.0) - m(0.0), 2.0 * rate_from_angular_MHz(25.0), 1e-20);
    EXPECT_THROW(m(-1.0), ConfigError);
    EXPECT_NEAR(GammaModel::radiative_5S().gamma0, 3.8e6 * constants::atomic_time_in_s, 1e-22);
}

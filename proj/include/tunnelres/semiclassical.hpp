#pragma once

// Semi-classical spin-exchange cross-section: the hyperfine phase accumulated
// along classical trajectories in V(R), averaged over impact parameter.

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "tunnelres/parallel.hpp"
#include "tunnelres/potential_data.hpp"
#include "tunnelres/units.hpp"

namespace tunnelres {

/// Spin-independent potential and hyperfine coupling, both in hartree.
template <class P>
concept ClassicalPath = requires(const P& p, double r) {
    { p.spin_independent(r) } -> std::convertible_to<double>;
    { p.hyperfine(r) } -> std::convertible_to<double>;
    { p.mu() } -> std::convertible_to<double>;
    { p.truncation() } -> std::convertible_to<double>;
};

struct SemiclassicalOptions {
    double time_cap_s = 100e-12;  // total path-time cap for orbiting trajectories
    double scan_step = 0.05;      // bohr, outermost-turning-point scan
    double inner_tol = 1e-8;      // relative, radial integral
    double outer_tol = 1e-4;      // relative, impact-parameter integral
    unsigned max_depth = 18;
};

struct TrajectoryIntegral {
    double E = 0.0;              // hartree
    double b = 0.0;              // bohr
    double A = 0.0;              // accumulated spin phase (rad)
    double turning_point = 0.0;  // bohr
    double path_time = 0.0;      // atomic time, after capping
    bool capped = false;
};

namespace detail {

template <ClassicalPath P>
double radial_factor(const P& p, double E, double b, double R) {
    return 1.0 - p.spin_independent(R) / E - b * b / (R * R);
}

/// Outermost root of 1 - V/E - b^2/R^2 inside (0, a); returns a negative
/// value when the particle never reaches a.
template <ClassicalPath P>
double outermost_turning_point(const P& p, double E, double b, double step) {
    const double a = p.truncation();
    auto g = [&](double R) { return radial_factor(p, E, b, R); };
    if (g(a) <= 0.0) return -1.0;
    double hi = a;
    for (double R = a - step; R > 0.0; R -= step) {
        if (g(R) <= 0.0) {
            std::uintmax_t iters = 200;
            auto r = boost::math::tools::toms748_solve(g, R, hi, boost::math::tools::eps_tolerance<double>(52), iters);
            return 0.5 * (r.first + r.second);
        }
        hi = R;
    }
    throw NumericError("no classical turning point found");
}

}  // namespace detail

/// A = 2 int_{R_t}^{a} alpha(R) / v_r(R) dR with R = R_t + s^2, in atomic units
/// (alpha as an angular frequency, so A is a phase in radians).
template <ClassicalPath P>
TrajectoryIntegral classical_phase_integral(const P& p, double E, double b, const SemiclassicalOptions& opt = {}) {
    if (!(E > 0.0)) throw ConfigError("classical_phase_integral: E must be positive");
    if (!(b >= 0.0)) throw ConfigError("classical_phase_integral: b must be non-negative");
    TrajectoryIntegral out;
    out.E = E;
    out.b = b;
    const double a = p.truncation();
    const double Rt = detail::outermost_turning_point(p, E, b, opt.scan_step);
    if (Rt < 0.0) {
        out.turning_point = std::max(b, a);
        return out;
    }
    out.turning_point = Rt;
    const double mu = p.mu();
    const double smax = std::sqrt(a - Rt);

    // dt/ds = 2 s / v_r; the time and the phase are integrated together as
    // the real and imaginary parts of one complex integrand
    auto dtds = [&](double s) {
        const double R = Rt + s * s;
        const double g = detail::radial_factor(p, E, b, R);
        if (!(g > 0.0)) return 0.0;
        return 2.0 * s / std::sqrt(2.0 * E * g / mu);
    };
    auto both = [&](double s) {
        const double w = dtds(s);
        return std::complex<double>(w, w == 0.0 ? 0.0 : w * p.hyperfine(Rt + s * s));
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double cap = 0.5 * opt.time_cap_s / constants::atomic_time_in_s;  // one way
    const std::complex<double> full = GK::integrate(both, 0.0, smax, opt.max_depth, opt.inner_tol);
    if (full.real() <= cap) {
        out.path_time = 2.0 * full.real();
        out.A = 2.0 * full.imag();
        return out;
    }
    // enter from a and stop after half the cap; the exit leg mirrors it
    auto excess = [&](double s) { return GK::integrate(dtds, s, smax, opt.max_depth, opt.inner_tol) - cap; };
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(excess, 0.0, smax, boost::math::tools::eps_tolerance<double>(40), iters);
    const double s_lo = 0.5 * (r.first + r.second);
    out.capped = true;
    out.path_time = 2.0 * cap;
    out.A = 2.0 * GK::integrate(both, s_lo, smax, opt.max_depth, opt.inner_tol).imag();
    return out;
}

struct ClassicalCrossSection {
    double value = 0.0;           // bohr^2
    double error_estimate = 0.0;  // bohr^2
    bool fallback = false;        // dense trapezoid used
    std::size_t capped = 0;       // trajectories hitting the time cap
};

/// sigma_c(E) = (pi/2) int_0^a b |A(E, b)|^2 db (A vanishes for b >= a).
template <ClassicalPath P>
ClassicalCrossSection sigma_se_classical(const P& p, double E, const SemiclassicalOptions& opt = {}) {
    if (!(E > 0.0)) throw ConfigError("sigma_se_classical: E must be positive");
    const double a = p.truncation();
    ClassicalCrossSection out;
    auto integrand = [&](double b) {
        const auto t = classical_phase_integral(p, E, b, opt);
        if (t.capped) ++out.capped;
        return b * t.A * t.A;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double err = 0.0;
    const double I = GK::integrate(integrand, 0.0, a, 12, opt.outer_tol, &err);
    if (err <= opt.outer_tol * std::abs(I) || err == 0.0) {
        out.value = 0.5 * constants::pi * I;
        out.error_estimate = 0.5 * constants::pi * err;
        return out;
    }
    // dense trapezoid, error from the half-density rule
    out.capped = 0;
    const std::size_t n = 4000;
    const double h = a / static_cast<double>(n);
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) f[i] = integrand(h * static_cast<double>(i));
    CompensatedSum fine, coarse;
    for (std::size_t i = 0; i < n; ++i) fine.add(0.5 * h * (f[i] + f[i + 1]));
    for (std::size_t i = 0; i + 2 <= n; i += 2) coarse.add(h * (f[i] + f[i + 2]));
    out.value = 0.5 * constants::pi * fine.value();
    out.error_estimate = 0.5 * constants::pi * std::abs(fine.value() - coarse.value()) / 3.0;
    out.fallback = true;
    return out;
}

/// sigma_c on an energy list, one energy per task.
template <ClassicalPath P>
std::vector<ClassicalCrossSection> sigma_se_classical(const P& p, const std::vector<double>& energies,
                                                      const SemiclassicalOptions& opt = {}, unsigned threads = 0) {
    std::vector<ClassicalCrossSection> out(energies.size());
    parallel_for(energies.size(), [&](std::size_t i) { out[i] = sigma_se_classical(p, energies[i], opt); }, threads);
    return out;
}

/// Trajectory model of a state: spin-independent V with alpha as perturbation.
inline ChannelPotential classical_path(const ElectronicState& state, double mu, double a = default_truncation_radius) {
    return ChannelPotential(state, 1, 0, mu, a);
}

}  // namespace tunnelres

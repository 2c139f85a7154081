#pragma once

// Independent oracle: Numerov propagation of the regular radial solution,
// phase shifts by matching to Riccati-Bessel functions, and bound-state
// counting from the nodes of the zero-energy solution. Test use only.

#include <cmath>
#include <cstdio>
#include <string>

#include "tunnelres/potential_data.hpp"
#include "tunnelres/units.hpp"

namespace tunnelres {

struct OracleResult {
    double delta_mod_pi = 0.0;  // [0, pi)
    int nodes = 0;
    double E = 0.0;             // hartree
    int l = 0;
    int j = 0;
    double R_max = 0.0;         // bohr
};

struct NumerovOptions {
    double step = 0.002;     // bohr
    double R_max = 0.0;      // 0: a + max(20, 4 wavelengths)
    double max_kh = 0.5;     // largest accepted local k*h
};

namespace detail {

/// Riccati-Bessel functions z j_l(z) and z y_l(z).
inline double riccati_j(int l, double z) { return z * std::sph_bessel(static_cast<unsigned>(l), z); }
inline double riccati_y(int l, double z) { return z * std::sph_neumann(static_cast<unsigned>(l), z); }

/// Outward Numerov sweep of u'' = f(R) u on R_i = i h, i = 1..n. Starts where
/// h^2 f drops below 6 (deeper in the wall the solution is negligible). The
/// visitor receives (R, u, scale) at every node; `scale` is the factor applied
/// to the running solution at that node, which the visitor must also apply to
/// any values it has stored.
template <class F, class Visit>
void numerov_sweep(const F& f, double h, std::size_t n, int l, Visit&& visit) {
    std::size_t i0 = 1;
    while (i0 + 2 < n && h * h * f(h * static_cast<double>(i0)) > 6.0) ++i0;
    double r_prev = h * static_cast<double>(i0);
    double r_cur = r_prev + h;
    double u_prev = i0 == 1 ? std::pow(h, l + 1) : 0.0;
    double u_cur = i0 == 1 ? std::pow(2.0 * h, l + 1) : 1e-300;
    double c_prev = 1.0 - h * h * f(r_prev) / 12.0;
    double c_cur = 1.0 - h * h * f(r_cur) / 12.0;
    visit(r_prev, u_prev, 1.0);
    visit(r_cur, u_cur, 1.0);
    for (std::size_t i = i0 + 2; i <= n; ++i) {
        const double r_next = h * static_cast<double>(i);
        const double c_next = 1.0 - h * h * f(r_next) / 12.0;
        double u_next = ((12.0 - 10.0 * c_cur) * u_cur - c_prev * u_prev) / c_next;
        double scale = 1.0;
        if (std::abs(u_next) > 1e200) {
            scale = 1e-200;
            u_next *= scale;
            u_cur *= scale;
        }
        visit(r_next, u_next, scale);
        u_prev = u_cur;
        u_cur = u_next;
        c_prev = c_cur;
        c_cur = c_next;
    }
}

}  // namespace detail

/// Phase shift mod pi of a single channel at energy E (hartree).
template <RadialChannel P>
OracleResult numerov_phase_shift(const P& channel, double E, const NumerovOptions& opt = {}) {
    if (!(E > 0.0)) throw ConfigError("numerov_phase_shift: E must be positive");
    const double mu = channel.mu();
    const int l = channel.l();
    const double a = channel.truncation();
    const double k = wavenumber(mu, E);
    const double lambda = 2.0 * constants::pi / k;
    const double h = opt.step;
    double R_max = opt.R_max > 0.0 ? opt.R_max : a + std::max(20.0, 4.0 * lambda);
    if (R_max < a) throw ConfigError("numerov_phase_shift: R_max must exceed the truncation radius");

    auto f = [&](double R) { return 2.0 * mu * (channel(R) - E); };

    const std::size_t n1 = static_cast<std::size_t>(std::ceil(R_max / h));
    const std::size_t n2 = n1 + std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.25 * lambda / h)));

    // step check on the local wave number
    double kmax = k;
    for (double R = h; R < a; R += 0.01) {
        const double loc = -f(R);
        if (loc > 0.0) kmax = std::max(kmax, std::sqrt(loc));
    }
    if (kmax * h > opt.max_kh) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "Numerov step %.4g bohr too coarse for local k %.4g; use step <= %.4g", h, kmax,
                      opt.max_kh / kmax);
        throw NumericError(msg);
    }

    double u1 = 0.0, u2 = 0.0;
    detail::numerov_sweep(f, h, n2, l, [&](double R, double u, double scale) {
        u1 *= scale;
        const auto i = static_cast<std::size_t>(std::llround(R / h));
        if (i == n1) u1 = u;
        if (i == n2) u2 = u;
    });
    const double r1 = h * static_cast<double>(n1), r2 = h * static_cast<double>(n2);
    const double q = u2 / u1;
    // u = rj + t (-ry), t = tan(delta)
    const double t = (detail::riccati_j(l, k * r2) - q * detail::riccati_j(l, k * r1)) /
                     (detail::riccati_y(l, k * r2) - q * detail::riccati_y(l, k * r1));
    double d = std::fmod(std::atan(t), constants::pi);
    if (d < 0.0) d += constants::pi;
    if (d >= constants::pi) d -= constants::pi;

    OracleResult out;
    out.delta_mod_pi = d;
    out.E = E;
    out.l = l;
    out.R_max = r1;
    if constexpr (requires { channel.j(); }) out.j = channel.j();
    return out;
}

/// Number of bound states: nodes of the zero-energy regular solution on (0, a].
template <RadialChannel P>
int count_bound_states(const P& channel, double step = 0.002) {
    const double mu = channel.mu();
    const double a = channel.truncation();
    auto f = [&](double R) { return 2.0 * mu * channel(R); };
    const auto n = static_cast<std::size_t>(std::ceil(a / step));
    int nodes = 0;
    double last = 0.0;
    detail::numerov_sweep(f, step, n, channel.l(), [&](double, double u, double scale) {
        last *= scale;
        if (u != 0.0) {
            if (last != 0.0 && (u > 0.0) != (last > 0.0)) ++nodes;
            last = u;
        }
    });
    return nodes;
}

}  // namespace tunnelres

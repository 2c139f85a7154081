#pragma once

// Scattering observables from Siegert pole sets:
//   S_l(E) = exp(-2 i k a) prod_n (k_n + k) / (k_n - k),  k = sqrt(2 mu E)
// and the phase shifts, Wigner time delays and spin-exchange cross-sections
// built from it.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tunnelres/parallel.hpp"
#include "tunnelres/siegert.hpp"
#include "tunnelres/units.hpp"

namespace tunnelres {

namespace detail {

inline void check_energy(double E) {
    if (!(E > 0.0)) throw ConfigError("scattering energy must be positive");
}

// Principal Arg with poles on the real axis treated as lying just below it,
// which keeps Arg(k_n +- k) continuous for real k > 0.
inline double lower_arg(cplx z) { return std::atan2(z.imag() == 0.0 ? -0.0 : z.imag(), z.real()); }

}  // namespace detail

/// S-matrix element at energy E (hartree). The pole product is accumulated
/// with explicit exponent tracking so long products neither overflow nor
/// underflow. With the plain outgoing boundary the product is referred to
/// exp(i(kR - l pi/2)), the large-kR form of the Riccati-Hankel function.
inline cplx s_matrix(const PoleSet& ps, double E) {
    detail::check_energy(E);
    if (ps.poles.empty()) throw ConfigError("s_matrix: empty pole set");
    const double k = wavenumber(ps.mu, E);
    cplx prod(1.0, 0.0);
    long exponent = 0;
    int since = 0;
    for (const auto& kn : ps.poles) {
        const cplx den = kn - k;
        if (std::abs(den) < 1e-12 * std::max(1.0, k))
            throw NumericError("s_matrix: energy coincides with a real-axis pole (near-singular evaluation)");
        prod *= (kn + k) / den;
        if (++since == 32) {
            since = 0;
            int e = 0;
            std::frexp(std::max(std::abs(prod.real()), std::abs(prod.imag())), &e);
            prod = cplx(std::ldexp(prod.real(), -e), std::ldexp(prod.imag(), -e));
            exponent += e;
        }
    }
    const double a = ps.spec.a;
    const cplx phase = std::polar(1.0, -2.0 * k * a);
    prod *= phase;
    if (!ps.spec.exact_boundary && ps.l % 2 != 0) prod = -prod;
    return cplx(std::ldexp(prod.real(), static_cast<int>(exponent)), std::ldexp(prod.imag(), static_cast<int>(exponent)));
}

/// Continuous phase shift delta(E) = (1/2) arg S on the branch with
/// delta -> 0 as E -> 0 (up to l pi / 2 for the plain outgoing boundary). Each pole contributes Arg(k_n + k) - Arg(k_n - k),
/// which is continuous in real k because no pole lies on the positive axis.
inline double phase_shift(const PoleSet& ps, double E) {
    detail::check_energy(E);
    const double k = wavenumber(ps.mu, E);
    CompensatedSum sum;
    sum.add(-2.0 * k * ps.spec.a);
    if (!ps.spec.exact_boundary) sum.add(constants::pi * ps.l);
    for (const auto& kn : ps.poles) sum.add(detail::lower_arg(kn + k) - detail::lower_arg(kn - k));
    return 0.5 * sum.value();
}

/// Wigner partial delay tau_l = 2 d(delta)/dE in atomic time units:
///   tau = (mu / k) [ -2a + sum_n Im(2 k_n / (k_n^2 - k^2)) ].
inline double time_delay(const PoleSet& ps, double E) {
    detail::check_energy(E);
    const double k = wavenumber(ps.mu, E);
    CompensatedSum sum;
    sum.add(-2.0 * ps.spec.a);
    for (const auto& kn : ps.poles) sum.add((2.0 * kn / (kn * kn - k * k)).imag());
    return ps.mu / k * sum.value();
}

/// Central finite-difference cross-check of time_delay.
inline double time_delay_fd(const PoleSet& ps, double E, double rel_step = 1e-6) {
    const double h = E * rel_step;
    return 2.0 * (phase_shift(ps, E + h) - phase_shift(ps, E - h)) / (2.0 * h);
}

struct PhaseDelayCurve {
    std::vector<double> E;      // hartree; may contain inserted midpoints
    std::vector<double> delta;  // radians, continuous
    std::vector<double> tau;    // atomic time
    std::size_t inserted = 0;
    bool refinement_capped = false;
};

/// Phase shifts and delays on a strictly increasing grid. Where adjacent
/// phases differ by more than pi/2, midpoints are inserted (up to
/// `max_inserted` in total) so the curve resolves sharp resonances.
inline PhaseDelayCurve phase_and_delay(const PoleSet& ps, const std::vector<double>& grid, std::size_t max_inserted = 4096) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        detail::check_energy(grid[i]);
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("phase_and_delay: energy grid must be strictly increasing");
    }
    PhaseDelayCurve out;
    const double half_pi = 0.5 * constants::pi;
    auto push = [&](double E) {
        out.E.push_back(E);
        out.delta.push_back(phase_shift(ps, E));
        out.tau.push_back(time_delay(ps, E));
    };
    // recursive bisection between (E0, d0) and (E1, d1)
    auto refine = [&](auto&& self, double E0, double d0, double E1, double d1, int depth) -> void {
        if (std::abs(d1 - d0) <= half_pi || depth > 40) return;
        if (out.inserted >= max_inserted) {
            out.refinement_capped = true;
            return;
        }
        const double Em = 0.5 * (E0 + E1);
        const double dm = phase_shift(ps, Em);
        self(self, E0, d0, Em, dm, depth + 1);
        ++out.inserted;
        out.E.push_back(Em);
        out.delta.push_back(dm);
        out.tau.push_back(time_delay(ps, Em));
        self(self, Em, dm, E1, d1, depth + 1);
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0) {
            const double d1 = phase_shift(ps, grid[i]);
            refine(refine, out.E.back(), out.delta.back(), grid[i], d1, 0);
        }
        push(grid[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Channel banks and cross-sections

/// Pole sets for one electronic state at fixed gamma: index [j][l].
/// `barrier_top[j][l]` (hartree) optionally records each channel's barrier
/// maximum, -infinity when the channel has no well and barrier.
struct ChannelBank {
    std::string state;
    double mu = 1.0;
    double gamma = 0.0;
    std::vector<PoleSet> singlet;  // j = 0
    std::vector<PoleSet> triplet;  // j = 1
    std::vector<double> barrier_top[2];

    const PoleSet& at(int j, int l) const {
        const auto& v = j == 0 ? singlet : triplet;
        if (j < 0 || j > 1 || l < 0 || static_cast<std::size_t>(l) >= v.size())
            throw ConfigError("missing pole set for j=" + std::to_string(j) + ", l=" + std::to_string(l));
        return v[static_cast<std::size_t>(l)];
    }
    int l_max() const { return static_cast<int>(std::min(singlet.size(), triplet.size())) - 1; }

    ChannelBank with_dissociation(double g) const {
        ChannelBank out;
        out.state = state;
        out.mu = mu;
        out.gamma = gamma + g;
        out.barrier_top[0] = barrier_top[0];
        out.barrier_top[1] = barrier_top[1];
        out.singlet.reserve(singlet.size());
        out.triplet.reserve(triplet.size());
        for (const auto& p : singlet) out.singlet.push_back(apply_dissociation(p, g));
        for (const auto& p : triplet) out.triplet.push_back(apply_dissociation(p, g));
        return out;
    }
};

/// Fills bank.barrier_top from the barrier profiles of the state's channels.
inline void attach_barriers(ChannelBank& bank, const ElectronicState& state) {
    for (int j = 0; j < 2; ++j) {
        auto& tops = bank.barrier_top[j];
        tops.clear();
        for (int l = 0; l <= bank.l_max(); ++l) {
            const auto prof = barrier_profile(ChannelPotential(state, j, l, bank.mu, bank.at(j, l).spec.a));
            const auto* b = std::get_if<BarrierProfile>(&prof);
            tops.push_back(b ? meV(b->barrier_height) : -std::numeric_limits<double>::infinity());
        }
    }
}

struct CutoffPolicy {
    int l_max = 60;
    bool adaptive = false;
    double adaptive_tol = 1e-8;  // relative contribution
    int adaptive_run = 3;        // consecutive negligible partial waves
};

struct CrossSection {
    double value = 0.0;  // bohr^2
    int l_used = 0;      // highest l included
};

/// Spin-exchange cross-section sigma = pi/(4k^2) sum_l (2l+1)|S_l^1 - S_l^0|^2
/// in bohr^2, summed in ascending l with compensation.
inline CrossSection sigma_se(const ChannelBank& bank, double E, const CutoffPolicy& cut = {}) {
    detail::check_energy(E);
    if (cut.l_max > bank.l_max())
        throw ConfigError("sigma_se: pole sets only available up to l=" + std::to_string(bank.l_max()));
    const double k = wavenumber(bank.mu, E);
    CompensatedSum sum;
    int quiet = 0;
    CrossSection out;
    for (int l = 0; l <= cut.l_max; ++l) {
        const cplx d = s_matrix(bank.at(1, l), E) - s_matrix(bank.at(0, l), E);
        const double term = (2.0 * l + 1.0) * std::norm(d);
        sum.add(term);
        out.l_used = l;
        if (cut.adaptive) {
            quiet = term < cut.adaptive_tol * sum.value() ? quiet + 1 : 0;
            if (quiet >= cut.adaptive_run) break;
        }
    }
    out.value = constants::pi / (4.0 * k * k) * sum.value();
    return out;
}

struct MeanDelay {
    double value = 0.0;  // atomic time
    bool zero_weight = false;
};

/// Elastic-cross-section-weighted mean delay for one spin channel; the weights
/// (2l+1) sin^2(delta_l) drop the common prefactor, which cancels.
inline MeanDelay mean_time_delay(const ChannelBank& bank, int j, double E, int l_max) {
    detail::check_energy(E);
    if (l_max > bank.l_max()) throw ConfigError("mean_time_delay: missing pole sets");
    CompensatedSum num, den;
    for (int l = 0; l <= l_max; ++l) {
        const auto& ps = bank.at(j, l);
        const double s = std::sin(phase_shift(ps, E));
        const double w = (2.0 * l + 1.0) * s * s;
        num.add(w * time_delay(ps, E));
        den.add(w);
    }
    if (den.value() == 0.0) return {0.0, true};
    return {num.value() / den.value(), false};
}

struct SpectrumRow {
    double E = 0.0;         // hartree
    double sigma = 0.0;     // bohr^2
    double tau_mean[2]{};   // atomic time, j = 0, 1
    std::vector<cplx> S[2];         // per-l, optional
    std::vector<double> delta[2];
    std::vector<double> tau[2];
};

/// Rows evaluated concurrently over the energies; each row is a sequential,
/// fixed-order reduction over l.
inline std::vector<SpectrumRow> spectrum(const ChannelBank& bank, const std::vector<double>& energies, const CutoffPolicy& cut,
                                         bool per_l = false, unsigned threads = 0) {
    std::vector<SpectrumRow> rows(energies.size());
    parallel_for(
        energies.size(),
        [&](std::size_t i) {
            SpectrumRow& r = rows[i];
            r.E = energies[i];
            r.sigma = sigma_se(bank, r.E, cut).value;
            for (int j = 0; j < 2; ++j) {
                r.tau_mean[j] = mean_time_delay(bank, j, r.E, cut.l_max).value;
                if (per_l) {
                    for (int l = 0; l <= cut.l_max; ++l) {
                        const auto& ps = bank.at(j, l);
                        r.S[j].push_back(s_matrix(ps, r.E));
                        r.delta[j].push_back(phase_shift(ps, r.E));
                        r.tau[j].push_back(time_delay(ps, r.E));
                    }
                }
            }
        },
        threads);
    return rows;
}

}  // namespace tunnelres

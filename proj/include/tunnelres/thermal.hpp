#pragma once

// Maxwell-Boltzmann averaged rate coefficients
//   k = sqrt(8 / (pi mu)) (kT)^(-3/2) int sigma(E) E exp(-E/kT) dE
// on a logarithmic base grid with resonance windows and adaptive bisection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tunnelres/parallel.hpp"
#include "tunnelres/scattering.hpp"
#include "tunnelres/semiclassical.hpp"
#include "tunnelres/units.hpp"

namespace tunnelres {

struct RateGridOptions {
    int base_points = 400;
    double lo = 1e-3;                // in units of kT
    double hi = 25.0;                // in units of kT
    int window_points = 50;
    double window_gammas = 10.0;     // window width in units of the pole width
    double window_min_meV = 1e-3;
    double narrow_fraction = 0.1;    // pole is narrow when Gamma < fraction * Re E
    double rel_tol = 1e-3;           // accepted relative quadrature error
    std::size_t max_points = 200000;
    int max_passes = 60;
    unsigned threads = 0;
};

struct RateResult {
    double T = 0.0;               // kelvin
    double gamma = 0.0;           // inverse atomic time
    double k_se = 0.0;            // cm^3/s
    double rel_error = 0.0;       // estimated relative quadrature error
    std::string method;           // "quantum" or "classical"
    std::size_t nodes = 0;
    std::size_t windows = 0;
    int l_max = 0;
    bool degraded = false;        // error target not met within the point cap
    std::vector<double> E;        // hartree, final grid
    std::vector<double> sigma;    // bohr^2
};

/// Energy k_B T in hartree.
inline double thermal_energy(double T_kelvin) {
    if (!(T_kelvin > 0.0)) throw ConfigError("temperature must be positive");
    return to_atomic(T_kelvin, Unit::kelvin);
}

/// Mean relative speed sqrt(8 kT / (pi mu)) in bohr per atomic time.
inline double mean_thermal_speed(double T_kelvin, double mu) {
    return std::sqrt(8.0 * thermal_energy(T_kelvin) / (constants::pi * mu));
}

inline double rate_to_cgs(double bohr3_per_time) {
    return bohr3_per_time * std::pow(constants::bohr_in_cm, 3) / constants::atomic_time_in_s;
}

/// Logarithmic base grid over [lo, hi] kT.
inline std::vector<double> base_energy_grid(double T_kelvin, const RateGridOptions& opt = {}) {
    if (opt.base_points < 2 || !(opt.hi > opt.lo) || !(opt.lo > 0.0)) throw ConfigError("invalid rate grid");
    const double kT = thermal_energy(T_kelvin);
    std::vector<double> E(static_cast<std::size_t>(opt.base_points));
    const double l0 = std::log(opt.lo * kT), l1 = std::log(opt.hi * kT);
    for (int i = 0; i < opt.base_points; ++i) E[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (opt.base_points - 1.0));
    return E;
}

struct EnergyWindow {
    double center = 0.0;  // hartree
    double width = 0.0;   // hartree
};

/// Windows around every narrow pole of the bank (poles already shifted by
/// the bank's gamma) with Re E inside [E_lo, E_hi]. When the bank carries
/// barrier tops, only poles below their channel's barrier are windowed.
inline std::vector<EnergyWindow> resonance_windows(const ChannelBank& bank, int l_max, double E_lo, double E_hi,
                                                   const RateGridOptions& opt = {}) {
    std::vector<EnergyWindow> out;
    const double wmin = meV(opt.window_min_meV);
    for (int j = 0; j < 2; ++j) {
        const auto& tops = bank.barrier_top[j];
        for (int l = 0; l <= l_max; ++l) {
            const double top = static_cast<std::size_t>(l) < tops.size() ? tops[static_cast<std::size_t>(l)]
                                                                          : std::numeric_limits<double>::infinity();
            for (const auto& k : bank.at(j, l).poles) {
                if (!(k.real() > 0.0) || !(k.imag() < 0.0)) continue;
                const auto [Er, G] = pole_energy(k, bank.mu);
                if (Er < E_lo || Er > E_hi || Er >= top || !(G < opt.narrow_fraction * Er)) continue;
                out.push_back({Er, std::max(opt.window_gammas * G, wmin)});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const EnergyWindow& x, const EnergyWindow& y) { return x.center < y.center; });
    return out;
}

inline void append_window(std::vector<double>& grid, const EnergyWindow& w, int points) {
    for (int i = 0; i < points; ++i)
        grid.push_back(w.center - 0.5 * w.width + w.width * i / std::max(1, points - 1));
}

/// Batch cross-section evaluator: energies (hartree) -> sigma (bohr^2).
using SigmaBatch = std::function<std::vector<double>(const std::vector<double>&)>;

/// Thermal average of sigma over an initial grid, refined by bisection until
/// the Richardson estimate meets rel_tol or the point cap is hit.
inline RateResult thermal_average(const SigmaBatch& sigma_of, double T_kelvin, double mu, std::vector<double> grid,
                                  const RateGridOptions& opt = {}) {
    if (!(mu > 0.0)) throw ConfigError("reduced mass must be positive");
    const double kT = thermal_energy(T_kelvin);
    const double E_lo = opt.lo * kT, E_hi = opt.hi * kT;
    grid.erase(std::remove_if(grid.begin(), grid.end(), [&](double e) { return !(e >= E_lo && e <= E_hi); }), grid.end());
    grid.push_back(E_lo);
    grid.push_back(E_hi);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> sig = sigma_of(grid);
    auto weight = [&](double e, double s) { return s * e * std::exp(-e / kT); };
    auto trapezoid = [&](const std::vector<double>& E, const std::vector<double>& S, std::size_t stride) {
        CompensatedSum sum;
        std::size_t i = 0;
        for (; i + stride < E.size(); i += stride) sum.add(0.5 * (E[i + stride] - E[i]) * (weight(E[i], S[i]) + weight(E[i + stride], S[i + stride])));
        if (i + 1 < E.size()) sum.add(0.5 * (E.back() - E[i]) * (weight(E[i], S[i]) + weight(E.back(), S.back())));
        return sum.value();
    };

    // candidate intervals are identified by their left energy
    std::vector<double> candidates(grid.begin(), grid.end() - 1);
    RateResult out;
    int pass = 0;
    while (!candidates.empty() && pass++ < opt.max_passes) {
        if (grid.size() + candidates.size() > opt.max_points) {
            out.degraded = true;
            break;
        }
        std::vector<double> mids;
        std::vector<std::size_t> left_index;
        mids.reserve(candidates.size());
        {
            std::size_t i = 0;
            for (double c : candidates) {
                i = static_cast<std::size_t>(std::lower_bound(grid.begin() + static_cast<std::ptrdiff_t>(i), grid.end(), c) - grid.begin());
                if (i + 1 >= grid.size()) break;
                const double m = 0.5 * (grid[i] + grid[i + 1]);
                if (!(m > grid[i] && m < grid[i + 1])) continue;
                mids.push_back(m);
                left_index.push_back(i);
            }
        }
        if (mids.empty()) break;
        const std::vector<double> sm = sigma_of(mids);
        const double total = trapezoid(grid, sig, 1);
        const double thresh = 1e-2 * opt.rel_tol * std::abs(total) + std::numeric_limits<double>::min();
        std::vector<double> next;
        std::vector<double> ng, ns;
        ng.reserve(grid.size() + mids.size());
        ns.reserve(grid.size() + mids.size());
        std::size_t m = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            ng.push_back(grid[i]);
            ns.push_back(sig[i]);
            if (m < mids.size() && left_index[m] == i) {
                const double h = grid[i + 1] - grid[i];
                const double e = 0.25 * h * std::abs(weight(grid[i], sig[i]) + weight(grid[i + 1], sig[i + 1]) - 2.0 * weight(mids[m], sm[m]));
                if (e > thresh) {
                    next.push_back(grid[i]);
                    next.push_back(mids[m]);
                }
                ng.push_back(mids[m]);
                ns.push_back(sm[m]);
                ++m;
            }
        }
        grid.swap(ng);
        sig.swap(ns);
        candidates.swap(next);
    }
    if (!candidates.empty()) out.degraded = true;

    const double fine = trapezoid(grid, sig, 1);
    const double coarse = trapezoid(grid, sig, 2);
    const double pref = std::sqrt(8.0 / (constants::pi * mu)) * std::pow(kT, -1.5);
    out.T = T_kelvin;
    out.k_se = rate_to_cgs(pref * fine);
    out.rel_error = fine != 0.0 ? std::abs(fine - coarse) / (3.0 * std::abs(fine)) : 0.0;
    if (out.rel_error > opt.rel_tol) out.degraded = true;
    out.nodes = grid.size();
    out.E = std::move(grid);
    out.sigma = std::move(sig);
    return out;
}

/// Quantum rate for a bank at gamma = 0 with dissociation `gamma` applied to
/// every pole of both spin channels.
inline RateResult quantum_rate(const ChannelBank& bank0, double T_kelvin, double gamma, const CutoffPolicy& cut = {},
                               const RateGridOptions& opt = {}) {
    const ChannelBank bank = bank0.with_dissociation(gamma);
    const double kT = thermal_energy(T_kelvin);
    std::vector<double> grid = base_energy_grid(T_kelvin, opt);
    const auto windows = resonance_windows(bank, cut.l_max, opt.lo * kT, opt.hi * kT, opt);
    for (const auto& w : windows) append_window(grid, w, opt.window_points);
    SigmaBatch batch = [&](const std::vector<double>& E) {
        std::vector<double> s(E.size());
        parallel_for(E.size(), [&](std::size_t i) { s[i] = sigma_se(bank, E[i], cut).value; }, opt.threads);
        return s;
    };
    RateResult r = thermal_average(batch, T_kelvin, bank.mu, std::move(grid), opt);
    r.gamma = gamma;
    r.method = "quantum";
    r.windows = windows.size();
    r.l_max = cut.l_max;
    return r;
}

/// Semi-classical rate; independent of gamma.
template <ClassicalPath P>
RateResult classical_rate(const P& path, double T_kelvin, const SemiclassicalOptions& sc = {}, const RateGridOptions& opt = {}) {
    SigmaBatch batch = [&](const std::vector<double>& E) {
        const auto cs = sigma_se_classical(path, E, sc, opt.threads);
        std::vector<double> s(E.size());
        for (std::size_t i = 0; i < E.size(); ++i) s[i] = cs[i].value;
        return s;
    };
    RateResult r = thermal_average(batch, T_kelvin, path.mu(), base_energy_grid(T_kelvin, opt), opt);
    r.method = "classical";
    return r;
}

struct Enhancement {
    double ratio = 0.0;
    bool infinite = false;
};

inline Enhancement enhancement_ratio(double k_quantum, double k_classical) {
    if (k_classical == 0.0) return {std::numeric_limits<double>::infinity(), true};
    return {k_quantum / k_classical, false};
}

/// gamma(p) = gamma0 + a p, rates in inverse atomic time and p in Torr.
struct GammaModel {
    double gamma0 = rate_from_lifetime(10e-9);
    double per_torr = rate_from_angular_MHz(25.0);

    double operator()(double p_torr) const {
        if (!(p_torr >= 0.0)) throw ConfigError("pressure must be non-negative");
        return gamma0 + per_torr * p_torr;
    }

    /// Radiative 5S decay rate of 3.8e6 s^-1 as gamma0.
    static GammaModel radiative_5S() { return {rate_from_lifetime(1.0 / 3.8e6), rate_from_angular_MHz(25.0)}; }
};

}  // namespace tunnelres

#pragma once

// Pole classification, resonance counting and the reduced-mass scaling study.

#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "tunnelres/parallel.hpp"
#include "tunnelres/potential_data.hpp"
#include "tunnelres/siegert.hpp"

namespace tunnelres {

enum class PoleKind { bound, antibound, resonance, continuum };

inline const char* to_string(PoleKind k) {
    switch (k) {
    case PoleKind::bound: return "bound";
    case PoleKind::antibound: return "antibound";
    case PoleKind::resonance: return "resonance";
    default: return "continuum";
    }
}

struct PoleClass {
    cplx k;
    double E_res = 0.0;  // hartree, Re(k^2 / 2 mu)
    double Gamma = 0.0;  // hartree, -2 Re k Im k / mu
    PoleKind kind = PoleKind::continuum;
    int l = 0;
    int j = 0;
};

/// One class per pole. `profile` is the barrier profile of the pole set's own
/// partial wave; without a barrier nothing counts as a resonance.
inline std::vector<PoleClass> classify_poles(const PoleSet& ps, const BarrierResult& profile, double axis_tol = 1e-8) {
    std::vector<PoleClass> out;
    out.reserve(ps.poles.size());
    const auto* barrier = std::get_if<BarrierProfile>(&profile);
    for (const auto& k : ps.poles) {
        PoleClass c;
        c.k = k;
        c.l = ps.l;
        c.j = ps.j;
        c.E_res = (k * k).real() / (2.0 * ps.mu);
        c.Gamma = -2.0 * k.real() * k.imag() / ps.mu;
        if (std::abs(k.real()) < axis_tol)
            c.kind = k.imag() > 0.0 ? PoleKind::bound : PoleKind::antibound;
        else if (k.real() > 0.0 && k.imag() < 0.0 && c.E_res > 0.0 && c.Gamma < c.E_res && barrier &&
                 c.E_res < meV(barrier->barrier_height))
            c.kind = PoleKind::resonance;
        else
            c.kind = PoleKind::continuum;
        out.push_back(c);
    }
    return out;
}

struct CensusOptions {
    SiegertSpec spec;
    int l_max = -1;             // -1: continue until the partial wave has no well and barrier
    int l_ceiling = 400;
    bool scale_basis = false;   // grow N with sqrt(mu_scale)
    double narrow_lifetime_s = 1e-12;  // resonances with 1/Gamma above this also count as narrow
    unsigned threads = 0;
};

struct CensusResult {
    double mu_scale = 1.0;
    int j = 1;
    int N_res = 0;
    int N_narrow = 0;            // subset with 1/Gamma > narrow_lifetime_s
    int l_last = 0;              // highest partial wave examined
    int N_used = 0;
    std::vector<int> per_l;      // resonance count per l
    std::vector<PoleClass> resonances;
};

/// Resonance count for one state at reduced mass mu_base * mu_scale (gamma = 0).
inline CensusResult count_resonances(const ElectronicState& state, double mu_base, double mu_scale, int j,
                                     const CensusOptions& opt = {}) {
    if (!(mu_scale > 0.0)) throw ConfigError("mu_scale must be positive");
    const double mu = mu_base * mu_scale;
    SiegertSpec spec = opt.spec;
    if (opt.scale_basis && mu_scale > 1.0) spec.N = static_cast<int>(std::ceil(spec.N * std::sqrt(mu_scale)));

    // partial waves to examine
    std::vector<BarrierResult> profiles;
    const int hard_max = opt.l_max >= 0 ? opt.l_max : opt.l_ceiling;
    for (int l = 0; l <= hard_max; ++l) {
        auto prof = barrier_profile(ChannelPotential(state, j, l, mu, spec.a));
        const bool none = std::holds_alternative<std::monostate>(prof);
        profiles.push_back(std::move(prof));
        if (opt.l_max < 0 && none && l > 0) break;
    }
    const int L = static_cast<int>(profiles.size()) - 1;

    CensusResult out;
    out.mu_scale = mu_scale;
    out.j = j;
    out.l_last = L;
    out.N_used = spec.N;
    out.per_l.assign(static_cast<std::size_t>(L + 1), 0);
    std::vector<std::vector<PoleClass>> found(static_cast<std::size_t>(L + 1));
    parallel_for(
        static_cast<std::size_t>(L + 1),
        [&](std::size_t l) {
            if (std::holds_alternative<std::monostate>(profiles[l])) return;
            const ChannelPotential cp(state, j, static_cast<int>(l), mu, spec.a);
            const PoleSet ps = solve_poles(cp, spec);
            for (const auto& c : classify_poles(ps, profiles[l]))
                if (c.kind == PoleKind::resonance) found[l].push_back(c);
        },
        opt.threads);
    for (int l = 0; l <= L; ++l) {
        out.per_l[static_cast<std::size_t>(l)] = static_cast<int>(found[static_cast<std::size_t>(l)].size());
        out.N_res += out.per_l[static_cast<std::size_t>(l)];
        for (const auto& c : found[static_cast<std::size_t>(l)])
            if (1.0 / c.Gamma > to_atomic(opt.narrow_lifetime_s, Unit::second)) ++out.N_narrow;
        out.resonances.insert(out.resonances.end(), found[static_cast<std::size_t>(l)].begin(), found[static_cast<std::size_t>(l)].end());
    }
    return out;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_line: need at least two matching points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("fit_line: degenerate input (all x equal)");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

struct ScalingStudy {
    std::vector<CensusResult> rows;
    LinearFit fit;         // N_res against mu_scale
    LinearFit narrow_fit;  // N_narrow against mu_scale
};

/// N_res over a list of reduced-mass scales with a straight-line fit. Requires
/// at least five scales spanning a factor of five.
inline ScalingStudy mass_scaling_study(const ElectronicState& state, double mu_base, const std::vector<double>& scales, int j = 1,
                                       const CensusOptions& opt = {}) {
    if (scales.size() < 5) throw ConfigError("mass_scaling_study: need at least 5 scales");
    double lo = scales.front(), hi = scales.front();
    for (double s : scales) {
        if (!(s > 0.0)) throw ConfigError("mass_scaling_study: scales must be positive");
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (hi < 5.0 * lo) throw ConfigError("mass_scaling_study: degenerate input, scales must span a factor of 5");
    ScalingStudy st;
    std::vector<double> x, y, yn;
    for (double s : scales) {
        st.rows.push_back(count_resonances(state, mu_base, s, j, opt));
        x.push_back(s);
        y.push_back(st.rows.back().N_res);
        yn.push_back(st.rows.back().N_narrow);
    }
    st.fit = fit_line(x, y);
    st.narrow_fit = fit_line(x, yn);
    return st;
}

}  // namespace tunnelres

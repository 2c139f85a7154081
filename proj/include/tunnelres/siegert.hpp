#pragma once

// Siegert pseudo-state poles of a single radial channel.
//
// The radial problem on [0, a] with u(0) = 0 and the outgoing boundary
// condition u'(a) = L_l(k) u(a) is discretised in a Lagrange basis built on
// Gauss-Lobatto-Legendre nodes. With k = i*kappa every coefficient is real:
//
//   (A + kappa^2 S + kappa b b^T - b sum_i y_i) c = 0,
//   kappa y_i = (zeta_i / a) y_i + (zeta_i / a^2) b^T c,
//
// where A = K + 2 mu W, b picks the boundary node and zeta_i are the zeros of
// the reverse Bessel polynomial theta_l (the partial-fraction poles of the
// outgoing Riccati-Hankel log-derivative). Linearising in kappa yields a real
// eigenproblem of size 2N + l whose eigenvalues come in exact conjugate pairs,
// i.e. k-poles in exact {k, -k*} pairs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/mpfr.hpp>
#include <lapacke.h>

#include "tunnelres/potential_data.hpp"
#include "tunnelres/units.hpp"

namespace tunnelres {

using cplx = std::complex<double>;

struct SiegertSpec {
    int N = 200;                 // number of basis functions (nodes in (0, a])
    double a = default_truncation_radius;
    bool exact_boundary = true;  // Riccati-Hankel boundary; false: plain (d/dR - ik) u = 0
    std::string basis = "gll-lagrange";

    void validate() const {
        if (N < 20) throw ConfigError("Siegert basis size must be >= 20");
        if (!(a > 0.0)) throw ConfigError("truncation radius must be positive");
    }
};

struct PoleSet {
    std::string state;
    int j = 0;
    int l = 0;
    double gamma = 0.0;  // inverse atomic time
    double mu = 1.0;
    SiegertSpec spec;
    std::vector<cplx> poles;  // bohr^-1, sorted by (Re, Im)
    std::size_t expected_count = 0;
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Quadrature and basis

namespace detail {

inline void legendre_with_derivative(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

inline double legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    if (n == 0) return 1.0;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/// Eigenvalues of a real general matrix via balanced LAPACK dgeev; conjugate
/// pairs come out exactly conjugate.
inline std::vector<cplx> real_eigenvalues(Eigen::MatrixXd M) {
    const lapack_int n = static_cast<lapack_int>(M.rows());
    std::vector<double> wr(n), wi(n);
    const lapack_int info =
        LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, M.data(), n, wr.data(), wi.data(), nullptr, 1, nullptr, 1);
    if (info != 0) throw NumericError("Siegert eigensolver did not converge (dgeev info " + std::to_string(info) + ")");
    std::vector<cplx> out(n);
    for (lapack_int i = 0; i < n; ++i) out[i] = cplx(wr[i], wi[i]);
    return out;
}

}  // namespace detail

/// Gauss-Legendre nodes/weights on [-1, 1], ascending.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(constants::pi * (i + 0.75) / (n + 0.5));
        double p = 0.0, dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            detail::legendre_with_derivative(n, z, p, dp);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        detail::legendre_with_derivative(n, z, p, dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

/// Gauss-Lobatto-Legendre nodes/weights on [-1, 1] for polynomial degree n
/// (n + 1 points), ascending.
inline void gauss_lobatto_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n + 1, 0.0);
    w.assign(n + 1, 0.0);
    x[0] = -1.0;
    x[n] = 1.0;
    // interior nodes: zeros of (1 - x^2) P_n', Newton from Chebyshev-Lobatto points
    for (int j = 1; j < n; ++j) {
        double z = -std::cos(constants::pi * j / n);
        for (int it = 0; it < 100; ++it) {
            const double pn = detail::legendre(n, z);
            const double pm = detail::legendre(n - 1, z);
            const double dz = (z * pn - pm) / ((n + 1.0) * pn);
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[j] = z;
    }
    std::sort(x.begin(), x.end());
    for (int j = 0; j <= n; ++j) {
        const double p = detail::legendre(n, x[j]);
        w[j] = 2.0 / (n * (n + 1.0) * p * p);
    }
}

/// Precomputed matrices of the Lagrange basis on GLL nodes mapped to [0, a].
/// Node 0 (R = 0) is dropped so every basis function vanishes at the origin;
/// the last function is the only one nonzero at R = a.
struct LobattoBasis {
    int N = 0;
    double a = 0.0;
    std::vector<double> nodes;     // R of the retained nodes, size N
    Eigen::MatrixXd kinetic;       // int phi_i' phi_j' dR
    Eigen::MatrixXd overlap;       // int phi_i phi_j dR
    std::vector<double> quad_r;    // 2N Gauss-Legendre points on [0, a]
    std::vector<double> quad_w;
    Eigen::MatrixXd quad_values;   // phi_j(quad_r[g]), 2N x N

    static LobattoBasis build(int N, double a) {
        LobattoBasis b;
        b.N = N;
        b.a = a;
        std::vector<double> x, w;
        gauss_lobatto_legendre(N, x, w);
        const int n = N + 1;

        // barycentric weights via log-magnitudes to avoid under/overflow
        std::vector<double> lam(n);
        std::vector<double> loglam(n);
        double maxlog = -1e300;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            int sign = 1;
            for (int k = 0; k < n; ++k) {
                if (k == j) continue;
                const double d = x[j] - x[k];
                s -= std::log(std::abs(d));
                if (d < 0) sign = -sign;
            }
            loglam[j] = s;
            lam[j] = sign;
            maxlog = std::max(maxlog, s);
        }
        for (int j = 0; j < n; ++j) lam[j] *= std::exp(loglam[j] - maxlog);

        Eigen::MatrixXd D(n, n);
        for (int i = 0; i < n; ++i) {
            double diag = 0.0;
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                D(i, j) = (lam[j] / lam[i]) / (x[i] - x[j]);
                diag -= D(i, j);
            }
            D(i, i) = diag;
        }
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
        for (int k = 0; k < n; ++k) K.noalias() += (w[k] * 2.0 / a) * D.row(k).transpose() * D.row(k);

        std::vector<double> gx, gw;
        gauss_legendre(2 * N, gx, gw);
        const int ng = 2 * N;
        Eigen::MatrixXd L(ng, n);
        for (int g = 0; g < ng; ++g) {
            double denom = 0.0;
            for (int j = 0; j < n; ++j) {
                L(g, j) = lam[j] / (gx[g] - x[j]);
                denom += L(g, j);
            }
            L.row(g) /= denom;
        }
        b.quad_r.resize(ng);
        b.quad_w.resize(ng);
        for (int g = 0; g < ng; ++g) {
            b.quad_r[g] = 0.5 * a * (gx[g] + 1.0);
            b.quad_w[g] = 0.5 * a * gw[g];
        }
        Eigen::MatrixXd S = L.transpose() * Eigen::Map<const Eigen::VectorXd>(b.quad_w.data(), ng).asDiagonal() * L;

        b.kinetic = K.bottomRightCorner(N, N);
        b.overlap = S.bottomRightCorner(N, N);
        b.quad_values = L.rightCols(N);
        b.nodes.resize(N);
        for (int j = 0; j < N; ++j) b.nodes[j] = 0.5 * a * (x[j + 1] + 1.0);
        return b;
    }

    /// Shared, thread-safe cache keyed by (N, a).
    static std::shared_ptr<const LobattoBasis> cached(int N, double a) {
        static std::mutex m;
        static std::map<std::pair<int, double>, std::shared_ptr<const LobattoBasis>> cache;
        std::lock_guard<std::mutex> lock(m);
        auto& slot = cache[{N, a}];
        if (!slot) slot = std::make_shared<const LobattoBasis>(build(N, a));
        return slot;
    }
};

// ---------------------------------------------------------------------------
// Outgoing Riccati-Hankel boundary

namespace detail {

using mp_real = boost::multiprecision::mpfr_float;

struct MpComplex {
    mp_real re, im;
};

inline MpComplex operator+(const MpComplex& a, const MpComplex& b) { return {a.re + b.re, a.im + b.im}; }
inline MpComplex operator-(const MpComplex& a, const MpComplex& b) { return {a.re - b.re, a.im - b.im}; }
inline MpComplex operator*(const MpComplex& a, const MpComplex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline MpComplex operator*(const MpComplex& a, const mp_real& s) { return {a.re * s, a.im * s}; }
inline MpComplex operator/(const MpComplex& a, const MpComplex& b) {
    const mp_real d = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}
inline mp_real mp_abs(const MpComplex& a) { return sqrt(a.re * a.re + a.im * a.im); }

// theta_l / theta_l' from theta_n = (2n-1) theta_{n-1} + z^2 theta_{n-2}
inline MpComplex bessel_newton_ratio(int l, const MpComplex& z) {
    MpComplex t0{1, 0}, t1{z.re + 1, z.im}, d0{0, 0}, d1{1, 0};
    const MpComplex z2 = z * z;
    for (int n = 2; n <= l; ++n) {
        const mp_real c = 2 * n - 1;
        const MpComplex t2 = t1 * c + z2 * t0;
        const MpComplex d2 = d1 * c + z * t0 * mp_real(2) + z2 * d0;
        t0 = t1;
        t1 = t2;
        d0 = d1;
        d1 = d2;
    }
    return t1 / d1;
}

// Aberth-Ehrlich iteration with l + 30 significant digits; the zeros are
// badly conditioned in double precision once l exceeds about 20.
inline std::vector<cplx> reverse_bessel_zeros_uncached(int l) {
    mp_real::default_precision(static_cast<unsigned>(30 + l));
    std::vector<MpComplex> z(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i) {
        const double th = constants::pi * (0.5 + (i + 0.5) / l);
        z[static_cast<std::size_t>(i)] = {mp_real(0.7 * l * std::cos(th)), mp_real(0.7 * l * std::sin(th))};
    }
    const mp_real tol = pow(mp_real(10), -25);
    bool converged = false;
    for (int it = 0; it < 1000 && !converged; ++it) {
        mp_real worst = 0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const MpComplex r = bessel_newton_ratio(l, z[i]);
            MpComplex repel{0, 0};
            for (std::size_t k = 0; k < z.size(); ++k)
                if (k != i) repel = repel + MpComplex{1, 0} / (z[i] - z[k]);
            const MpComplex w = r / (MpComplex{1, 0} - r * repel);
            z[i] = z[i] - w;
            const mp_real m = mp_abs(w) / (1 + mp_abs(z[i]));
            if (m > worst) worst = m;
        }
        converged = worst < tol;
    }
    if (!converged) throw NumericError("reverse Bessel zeros did not converge for l=" + std::to_string(l));
    std::vector<cplx> out;
    out.reserve(z.size());
    for (const auto& q : z) out.emplace_back(q.re.convert_to<double>(), q.im.convert_to<double>());
    return out;
}

}  // namespace detail

/// Zeros of the reverse Bessel polynomial
///   theta_l(z) = sum_m (l+m)! / (m! (l-m)! 2^m) z^(l-m),
/// returned with conjugate pairs adjacent (positive imaginary part first).
/// Computed once per l and cached.
inline std::vector<cplx> reverse_bessel_zeros(int l) {
    if (l <= 0) return {};
    static std::mutex mutex;
    static std::map<int, std::vector<cplx>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(l); it != cache.end()) return it->second;
    std::vector<cplx> roots = detail::reverse_bessel_zeros_uncached(l);
    // clean conjugate structure: real roots exact, pairs exact conjugates
    std::vector<cplx> out;
    std::vector<bool> used(roots.size(), false);
    std::sort(roots.begin(), roots.end(), [](cplx p, cplx q) { return p.real() < q.real() || (p.real() == q.real() && p.imag() > q.imag()); });
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        const cplx z = roots[i];
        if (std::abs(z.imag()) < 1e-9 * std::max(1.0, std::abs(z))) {
            out.emplace_back(z.real(), 0.0);
            continue;
        }
        std::size_t best = roots.size();
        double bestd = 1e300;
        for (std::size_t k = 0; k < roots.size(); ++k) {
            if (used[k]) continue;
            const double d = std::abs(roots[k] - std::conj(z));
            if (d < bestd) {
                bestd = d;
                best = k;
            }
        }
        if (best == roots.size() || bestd > 1e-6 * std::abs(z))
            throw NumericError("reverse Bessel zeros: conjugate pairing failed for l=" + std::to_string(l));
        used[best] = true;
        const cplx avg = 0.5 * (z + std::conj(roots[best]));
        out.emplace_back(avg.real(), std::abs(avg.imag()));
        out.emplace_back(avg.real(), -std::abs(avg.imag()));
    }
    cache.emplace(l, out);
    return out;
}

/// Log-derivative u'/u of the outgoing Riccati-Hankel function at R = a,
/// evaluated in partial-fraction form: i k + sum_i (z_i/a) / (k a - z_i) with
/// z_i = i zeta_i.
inline cplx outgoing_log_derivative(const std::vector<cplx>& zeta, double a, cplx k) {
    const cplx I(0.0, 1.0);
    cplx L = I * k;
    for (const auto& zt : zeta) {
        const cplx z = I * zt;
        L += (z / a) / (k * a - z);
    }
    return L;
}

// ---------------------------------------------------------------------------
// Pole solver

namespace detail {

inline void sort_and_dedupe(std::vector<cplx>& poles, double tol = 1e-10) {
    std::sort(poles.begin(), poles.end(), [](cplx p, cplx q) { return p.real() < q.real() || (p.real() == q.real() && p.imag() < q.imag()); });
    std::vector<cplx> out;
    out.reserve(poles.size());
    for (const auto& p : poles) {
        bool dup = false;
        for (auto it = out.rbegin(); it != out.rend() && p.real() - it->real() <= tol; ++it)
            if (std::abs(p - *it) < tol) {
                dup = true;
                break;
            }
        if (!dup) out.push_back(p);
    }
    poles.swap(out);
}

}  // namespace detail

/// Solves for all Siegert poles (gamma = 0) of the channel.
template <RadialChannel P>
PoleSet solve_poles(const P& channel, const SiegertSpec& spec, std::string state_label = {}, int j = 0) {
    spec.validate();
    const auto basis = LobattoBasis::cached(spec.N, spec.a);
    const int N = spec.N;
    const int l = channel.l();
    const double mu = channel.mu();
    const double a = spec.a;

    // A = K + 2 mu W
    const int ng = static_cast<int>(basis->quad_r.size());
    Eigen::VectorXd wq(ng);
    for (int g = 0; g < ng; ++g) wq[g] = basis->quad_w[g] * 2.0 * mu * channel(basis->quad_r[g]);
    const Eigen::MatrixXd A = basis->kinetic + basis->quad_values.transpose() * wq.asDiagonal() * basis->quad_values;

    const std::vector<cplx> zeta = spec.exact_boundary ? reverse_bessel_zeros(l) : std::vector<cplx>{};
    const int m = static_cast<int>(zeta.size());
    const int dim = 2 * N + m;

    Eigen::LLT<Eigen::MatrixXd> llt(basis->overlap);
    if (llt.info() != Eigen::Success) throw NumericError("overlap matrix not positive definite");
    const Eigen::MatrixXd SinvA = llt.solve(A);
    Eigen::VectorXd e_last = Eigen::VectorXd::Zero(N);
    e_last[N - 1] = 1.0;
    const Eigen::VectorXd Sinvb = llt.solve(e_last);

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
    M.block(0, N, N, N).setIdentity();
    M.block(N, 0, N, N) = -SinvA;
    M.block(N, N, N, N).col(N - 1) -= Sinvb;  // -S^-1 b b^T acting on d

    for (int i = 0; i < m;) {
        const int col = 2 * N + i;
        const double s = zeta[i].real();
        if (zeta[i].imag() == 0.0) {
            M.block(N, col, N, 1) = Sinvb;
            M(col, col) = s / a;
            M(col, N - 1) = s / (a * a);
            i += 1;
        } else {
            const double t = std::abs(zeta[i].imag());
            const int p = col, q = col + 1;
            M.block(N, p, N, 1) = Sinvb;
            M(p, p) = s / a;
            M(p, q) = t / a;
            M(p, N - 1) = 2.0 * s / (a * a);
            M(q, q) = s / a;
            M(q, p) = -t / a;
            M(q, N - 1) = -2.0 * t / (a * a);
            i += 2;
        }
    }

    const std::vector<cplx> kappa = detail::real_eigenvalues(M);

    PoleSet ps;
    ps.state = std::move(state_label);
    ps.j = j;
    ps.l = l;
    ps.mu = mu;
    ps.spec = spec;
    ps.expected_count = static_cast<std::size_t>(dim);
    ps.poles.reserve(dim);
    const cplx I(0.0, 1.0);
    for (const auto& kv : kappa) {
        cplx k = I * kv;
        // off-axis poles lie in the lower half plane; round-off can leave a
        // very narrow resonance marginally above the axis
        if (std::abs(k.real()) > 1e-8 && k.imag() > 0.0 && k.imag() < 1e-10 * std::abs(k)) k = std::conj(k);
        ps.poles.push_back(k);
    }
    detail::sort_and_dedupe(ps.poles);
    if (ps.poles.size() + static_cast<std::size_t>(l) < ps.expected_count)
        ps.warnings.push_back("pole count " + std::to_string(ps.poles.size()) + " differs from expected " +
                              std::to_string(ps.expected_count));
    return ps;
}

inline PoleSet solve_poles(const ChannelPotential& cp, const SiegertSpec& spec) {
    return solve_poles<ChannelPotential>(cp, spec, cp.label(), cp.j());
}

/// Shifts every pole by the external dissociation rate gamma (inverse atomic
/// time): k -> Re k + i (Im k - mu gamma / |k|). The mass factor makes the
/// shift a wave number with mu explicit; in mass-scaled units (mu = 1) it is
/// the familiar gamma / |k|.
inline PoleSet apply_dissociation(const PoleSet& ps, double gamma) {
    if (!(gamma >= 0.0)) throw ConfigError("dissociation rate must be non-negative");
    PoleSet out = ps;
    out.gamma = ps.gamma + gamma;
    if (gamma == 0.0) return out;
    for (auto& k : out.poles) {
        const double mag = std::abs(k);
        if (mag == 0.0) {
            out.warnings.push_back("zero-magnitude pole left unshifted");
            continue;
        }
        k = cplx(k.real(), k.imag() - ps.mu * gamma / mag);
    }
    return out;
}

/// Energy-plane view of a pole: (Re E, Gamma) with E = k^2 / (2 mu),
/// Gamma = -2 Im E.
inline std::pair<double, double> pole_energy(cplx k, double mu) {
    const cplx E = k * k / (2.0 * mu);
    return {E.real(), -2.0 * E.imag()};
}

}  // namespace tunnelres

#pragma once

// Ingestion of the tabulated potential-energy and hyperfine-coupling curves,
// their interpolation, and assembly of single-channel radial potentials
//   W(R) = V(R) + c_j alpha(R) + l(l+1) / (2 mu R^2).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tunnelres/spline.hpp"
#include "tunnelres/units.hpp"

namespace tunnelres {

inline constexpr double default_truncation_radius = 40.0;  // bohr

// ---------------------------------------------------------------------------
// Delimited tables

struct DelimitedTable {
    std::vector<std::string> columns;          // state labels (R column excluded)
    std::vector<double> r;                     // finite R rows, bohr
    std::vector<std::vector<double>> values;   // values[column][row]
    std::optional<std::vector<double>> infinity_row;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline char detect_delimiter(std::string_view header) {
    std::size_t best = 0;
    char delim = '\t';
    for (char c : {'\t', ',', ';'}) {
        const auto n = static_cast<std::size_t>(std::count(header.begin(), header.end(), c));
        if (n > best) {
            best = n;
            delim = c;
        }
    }
    if (best == 0) throw DataError("table header has no tab, comma or semicolon delimiter");
    return delim;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool is_infinity_token(std::string_view s) {
    return s == "\xE2\x88\x9E" || s == "inf" || s == "Inf" || s == "INF" || s == "infinity" || s == "Infinity";
}

inline double parse_number(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc() || ptr != last)
        throw DataError("malformed number '" + std::string(s) + "' on line " + std::to_string(line_no));
    return v;
}

}  // namespace detail

/// Parses a delimited text table whose first column is R (bohr) and whose
/// remaining columns are named curves. One row may carry an infinity token in
/// the R column; it is stored separately as the asymptote row.
inline DelimitedTable parse_delimited_table(std::string_view text) {
    DelimitedTable table;
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start <= text.size()) {
            auto pos = text.find('\n', start);
            auto line = detail::trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
            if (!line.empty() && line.front() != '#') lines.push_back(line);
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
    }
    if (lines.empty()) throw DataError("empty table");
    const char delim = detail::detect_delimiter(lines.front());
    auto header = detail::split(lines.front(), delim);
    if (header.size() < 2) throw DataError("table needs an R column and at least one curve");
    for (std::size_t c = 1; c < header.size(); ++c) table.columns.emplace_back(header[c]);
    table.values.assign(table.columns.size(), {});

    for (std::size_t li = 1; li < lines.size(); ++li) {
        auto cells = detail::split(lines[li], delim);
        if (cells.size() != header.size())
            throw DataError("line " + std::to_string(li + 1) + " has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        if (detail::is_infinity_token(cells[0])) {
            if (table.infinity_row) throw DataError("duplicate infinity row");
            std::vector<double> row;
            for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(detail::parse_number(cells[c], li + 1));
            table.infinity_row = std::move(row);
            continue;
        }
        const double r = detail::parse_number(cells[0], li + 1);
        if (!table.r.empty() && !(r > table.r.back()))
            throw DataError("R column not strictly increasing at line " + std::to_string(li + 1));
        table.r.push_back(r);
        for (std::size_t c = 1; c < cells.size(); ++c) table.values[c - 1].push_back(detail::parse_number(cells[c], li + 1));
    }
    return table;
}

// ---------------------------------------------------------------------------
// Curves

/// A sampled radial function on a bohr grid (V in meV or alpha in MHz).
struct TabulatedCurve {
    std::vector<double> r_nodes;
    std::vector<double> values;
    double asymptote = 0.0;

    void validate() const {
        if (r_nodes.size() < 4 || values.size() != r_nodes.size())
            throw DataError("tabulated curve needs at least 4 nodes with matching values");
        for (std::size_t i = 1; i < r_nodes.size(); ++i)
            if (!(r_nodes[i] > r_nodes[i - 1])) throw DataError("tabulated curve R nodes not strictly increasing");
    }
};

/// Interpolant over a curve truncated at radius `a`: natural cubic spline on
/// the nodes <= a, zero beyond a, and an exponential fitted to the first two
/// nodes below the first node.
class CurveInterpolant {
public:
    CurveInterpolant() = default;

    explicit CurveInterpolant(const TabulatedCurve& curve, double truncation = default_truncation_radius)
        : truncation_(truncation) {
        curve.validate();
        std::vector<double> r, v;
        for (std::size_t i = 0; i < curve.r_nodes.size(); ++i) {
            if (curve.r_nodes[i] <= truncation) {
                r.push_back(curve.r_nodes[i]);
                v.push_back(curve.values[i]);
            }
        }
        if (r.size() < 4) throw DataError("fewer than 4 nodes below the truncation radius");
        spline_ = NaturalCubicSpline(r, v);
        r0_ = r[0];
        v0_ = v[0];
        if (v[0] != 0.0 && v[1] != 0.0 && (v[0] > 0.0) == (v[1] > 0.0))
            decay_ = std::log(v[0] / v[1]) / (r[1] - r[0]);
    }

    double operator()(double R) const {
        if (!(R > 0.0)) throw std::domain_error("interpolate: R must be positive");
        if (R > truncation_) return 0.0;
        if (R < r0_) return decay_ ? v0_ * std::exp(-*decay_ * (R - r0_)) : v0_;
        return spline_(R);
    }

    double derivative(double R) const {
        if (R > truncation_) return 0.0;
        if (R < r0_) return decay_ ? -*decay_ * v0_ * std::exp(-*decay_ * (R - r0_)) : 0.0;
        return spline_.derivative(R);
    }

    double truncation() const { return truncation_; }
    double first_node() const { return r0_; }
    const NaturalCubicSpline& spline() const { return spline_; }

private:
    NaturalCubicSpline spline_;
    double truncation_ = default_truncation_radius;
    double r0_ = 0.0;
    double v0_ = 0.0;
    std::optional<double> decay_;
};

inline double interpolate(const CurveInterpolant& curve, double R) { return curve(R); }

// ---------------------------------------------------------------------------
// Electronic states

struct ElectronicState {
    std::string label;      // e.g. "5S:2Sigma"
    TabulatedCurve V;       // meV
    TabulatedCurve alpha;   // MHz (cyclic)
};

struct StateDataset {
    std::vector<ElectronicState> states;            // columns present in both tables
    std::vector<std::pair<std::string, TabulatedCurve>> potential_only;  // e.g. the cation
    std::size_t potential_columns = 0;
    std::size_t alpha_columns = 0;
    std::size_t potential_rows = 0;  // including the infinity row
    std::size_t alpha_rows = 0;

    /// Exact label, or a unique prefix before the ':' (e.g. "5S").
    const ElectronicState& find(std::string_view label) const {
        const ElectronicState* hit = nullptr;
        for (const auto& s : states)
            if (s.label == label) return s;
        for (const auto& s : states) {
            const auto colon = s.label.find(':');
            if (std::string_view(s.label).substr(0, colon) == label) {
                if (hit) throw DataError("ambiguous state label '" + std::string(label) + "'");
                hit = &s;
            }
        }
        if (!hit) throw DataError("unknown state label '" + std::string(label) + "'");
        return *hit;
    }
};

inline StateDataset parse_state_tables(std::string_view v_table_text, std::string_view alpha_table_text) {
    const auto vt = parse_delimited_table(v_table_text);
    const auto at = parse_delimited_table(alpha_table_text);

    StateDataset ds;
    ds.potential_columns = vt.columns.size();
    ds.alpha_columns = at.columns.size();
    ds.potential_rows = vt.r.size() + (vt.infinity_row ? 1 : 0);
    ds.alpha_rows = at.r.size() + (at.infinity_row ? 1 : 0);

    auto column_curve = [](const DelimitedTable& t, std::size_t c) {
        TabulatedCurve curve{t.r, t.values[c], t.infinity_row ? (*t.infinity_row)[c] : 0.0};
        curve.validate();
        return curve;
    };

    for (std::size_t ac = 0; ac < at.columns.size(); ++ac) {
        auto it = std::find(vt.columns.begin(), vt.columns.end(), at.columns[ac]);
        if (it == vt.columns.end())
            throw DataError("hyperfine column '" + at.columns[ac] + "' has no matching potential column");
    }
    for (std::size_t vc = 0; vc < vt.columns.size(); ++vc) {
        auto it = std::find(at.columns.begin(), at.columns.end(), vt.columns[vc]);
        if (it == at.columns.end()) {
            ds.potential_only.emplace_back(vt.columns[vc], column_curve(vt, vc));
            continue;
        }
        const auto ac = static_cast<std::size_t>(it - at.columns.begin());
        ElectronicState st{vt.columns[vc], column_curve(vt, vc), column_curve(at, ac)};
        st.alpha.asymptote = at.infinity_row ? (*at.infinity_row)[ac] : 0.0;
        ds.states.push_back(std::move(st));
    }
    return ds;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string default_data_dir() {
#ifdef TUNNELRES_DATA_DIR
    return TUNNELRES_DATA_DIR;
#else
    return "data";
#endif
}

/// Loads the bundled potential / hyperfine tables from `dir`.
inline StateDataset load_state_tables(const std::string& dir = default_data_dir()) {
    return parse_state_tables(read_text_file(dir + "/potentials_meV.tsv"), read_text_file(dir + "/hyperfine_MHz.tsv"));
}

// ---------------------------------------------------------------------------
// Channel potentials

/// I.S eigenvalue for two spin-1/2 particles coupled to total spin j.
inline double spin_coupling_coefficient(int j) {
    if (j == 0) return -0.75;
    if (j == 1) return 0.25;
    throw ConfigError("total spin j must be 0 or 1");
}

/// Anything the radial solvers can consume: W(R) in hartree including the
/// centrifugal term, with V = 0 beyond truncation().
template <class P>
concept RadialChannel = requires(const P& p, double r) {
    { p(r) } -> std::convertible_to<double>;
    { p.mu() } -> std::convertible_to<double>;
    { p.l() } -> std::convertible_to<int>;
    { p.truncation() } -> std::convertible_to<double>;
};

class ChannelPotential {
public:
    ChannelPotential(const ElectronicState& state, int j, int l, double mu, double truncation = default_truncation_radius)
        : label_(state.label), j_(j), l_(l), mu_(mu), cj_(spin_coupling_coefficient(j)),
          V_(state.V, truncation), alpha_(state.alpha, truncation) {
        if (l < 0) throw ConfigError("partial wave l must be non-negative");
        if (!(mu > 0.0)) throw ConfigError("reduced mass must be positive");
    }

    /// W(R) in hartree.
    double operator()(double R) const { return spin_independent(R) + cj_ * hyperfine(R) + centrifugal(R); }

    double spin_independent(double R) const { return meV(V_(R)); }
    double spin_independent_derivative(double R) const { return meV(V_.derivative(R)); }
    /// hbar*alpha(R) in hartree.
    double hyperfine(double R) const { return hyperfine_to_atomic(alpha_(R)); }
    double centrifugal(double R) const { return l_ * (l_ + 1.0) / (2.0 * mu_ * R * R); }

    const std::string& label() const { return label_; }
    int j() const { return j_; }
    int l() const { return l_; }
    double mu() const { return mu_; }
    double truncation() const { return V_.truncation(); }
    double first_node() const { return V_.first_node(); }
    const CurveInterpolant& potential_curve() const { return V_; }
    const CurveInterpolant& alpha_curve() const { return alpha_; }

private:
    std::string label_;
    int j_;
    int l_;
    double mu_;
    double cj_;
    CurveInterpolant V_;
    CurveInterpolant alpha_;
};

inline ChannelPotential channel_potential(const ElectronicState& state, int j, int l, double mu,
                                          double truncation = default_truncation_radius) {
    return ChannelPotential(state, j, l, mu, truncation);
}

/// Analytic channel for tests and synthetic studies: W = f(R) + centrifugal,
/// with f clamped to zero beyond the truncation radius.
class FunctionChannel {
public:
    FunctionChannel(std::function<double(double)> f, double mu, int l, double truncation)
        : f_(std::move(f)), mu_(mu), l_(l), truncation_(truncation) {}

    double operator()(double R) const {
        return (R > truncation_ ? 0.0 : f_(R)) + l_ * (l_ + 1.0) / (2.0 * mu_ * R * R);
    }
    double mu() const { return mu_; }
    int l() const { return l_; }
    double truncation() const { return truncation_; }

private:
    std::function<double(double)> f_;
    double mu_;
    int l_;
    double truncation_;
};

// ---------------------------------------------------------------------------
// Well / barrier profile

struct BarrierProfile {
    double well_depth;      // meV
    double well_R;          // bohr
    double barrier_height;  // meV
    double barrier_R;       // bohr
};

/// Either a well followed by an interior barrier, or std::monostate when the
/// channel has no such structure ("monotone").
using BarrierResult = std::variant<std::monostate, BarrierProfile>;

namespace detail {

// Golden-section refinement of an extremum bracketed by [lo, hi].
template <class F>
double refine_extremum(const F& f, double lo, double hi, bool maximize) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    auto val = [&](double x) { return maximize ? -f(x) : f(x); };
    double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    double fc = val(c), fd = val(d);
    for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
        if (fc < fd) {
            hi = d; d = c; fd = fc;
            c = hi - g * (hi - lo); fc = val(c);
        } else {
            lo = c; c = d; fc = fd;
            d = lo + g * (hi - lo); fd = val(d);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

template <RadialChannel P>
BarrierResult barrier_profile(const P& cp, double r_start, double step = 0.005) {
    const double a = cp.truncation();
    const auto n = static_cast<std::size_t>(std::ceil((a - r_start) / step));
    const double h = (a - r_start) / static_cast<double>(n);
    std::vector<double> w(n + 1);
    for (std::size_t i = 0; i <= n; ++i) w[i] = cp(r_start + h * static_cast<double>(i));

    // global interior minimum that is also a local minimum
    std::size_t imin = 0;
    double wmin = 0.0;
    bool found = false;
    for (std::size_t i = 1; i < n; ++i) {
        if (w[i] <= w[i - 1] && w[i] <= w[i + 1] && (!found || w[i] < wmin)) {
            wmin = w[i];
            imin = i;
            found = true;
        }
    }
    if (!found) return std::monostate{};

    // highest interior local maximum beyond the well
    std::size_t imax = 0;
    double wmax = 0.0;
    bool has_barrier = false;
    for (std::size_t i = imin + 1; i < n; ++i) {
        if (w[i] >= w[i - 1] && w[i] >= w[i + 1] && (!has_barrier || w[i] > wmax)) {
            wmax = w[i];
            imax = i;
            has_barrier = true;
        }
    }
    if (!has_barrier || !(w[imax] > w[n])) return std::monostate{};

    auto f = [&](double r) { return cp(r); };
    const double rw = detail::refine_extremum(f, r_start + h * (imin - 1.0), r_start + h * (imin + 1.0), false);
    const double rb = detail::refine_extremum(f, r_start + h * (imax - 1.0), r_start + h * (imax + 1.0), true);
    return BarrierProfile{to_meV(cp(rw)), rw, to_meV(cp(rb)), rb};
}

inline BarrierResult barrier_profile(const ChannelPotential& cp, double step = 0.005) {
    return barrier_profile(cp, cp.first_node(), step);
}

}  // namespace tunnelres

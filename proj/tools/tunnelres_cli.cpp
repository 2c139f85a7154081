// Command-line front end: ingest, poles, xsec, delay, semiclassical, rate,
// census and report.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tunnelres/tunnelres.hpp"

#ifndef TUNNELRES_VERSION
#define TUNNELRES_VERSION "0.0.0"
#endif

extern "C" void openblas_set_num_threads(int);

namespace fs = std::filesystem;
using namespace tunnelres;

namespace {

struct Options {
    // execution (not part of the run configuration)
    std::string data_dir = default_data_dir();
    std::string cache_dir;
    bool no_compute = false;
    unsigned threads = 0;
    std::string out;
    std::string outdir = "report";

    // run configuration
    std::string state = "5S";
    int N = 200;
    double a = default_truncation_radius;
    bool fallback_boundary = false;
    int l_max = 60;
    bool adaptive_l = false;
    double mu = 0.0;
    double mu_scale = 1.0;
    std::string gamma_inv = "1ns";
    double pressure_torr = -1.0;
    std::string gamma0_inv = "10ns";
    double per_torr_MHz = 25.0;
    double T = 373.15;
    double emin = 0.1;
    double emax = 60.0;
    int points = 2000;
    bool no_windows = false;
    bool per_l = false;
    std::string gamma_inv_list = "1ps,10ps,100ps,1ns,10ns";
    std::string scales = "1,2,4,6,8";
    int census_j = 1;
    int census_l_max = -1;
    bool scale_basis = false;
    double time_cap_ps = 100.0;
    std::string figure;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> v;
    for (const auto& item : split_list(s)) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("not a number: '" + item + "'");
        }
    }
    if (v.empty()) throw ConfigError("empty number list");
    return v;
}

class Runner {
public:
    Runner(Options o, std::string command) : o_(std::move(o)), command_(std::move(command)) {
        if (o_.N < 20) throw ConfigError("N must be >= 20");
        if (!(o_.a > 0.0)) throw ConfigError("a must be positive");
        if (o_.l_max < 0) throw ConfigError("l-max must be non-negative");
        if (!(o_.mu_scale > 0.0)) throw ConfigError("mu-scale must be positive");
        if (!(o_.T > 0.0)) throw ConfigError("T must be positive");
        if (!(o_.emin > 0.0) || !(o_.emax > o_.emin) || o_.points < 2) throw ConfigError("invalid energy grid");
        if (o_.census_j != 0 && o_.census_j != 1) throw ConfigError("census-j must be 0 or 1");
        tables_ = load_tables(o_.data_dir);
        if (!o_.cache_dir.empty()) cache_.emplace(o_.cache_dir);
    }

    int run() {
        if (command_ == "ingest") return ingest();
        if (command_ == "poles") return poles();
        if (command_ == "xsec") return write(spectrum_csv(o_.state, true), default_out("xsec_" + o_.state + ".csv"));
        if (command_ == "delay") return write(spectrum_csv(o_.state, false), default_out("delay_" + o_.state + ".csv"));
        if (command_ == "semiclassical") return write(semiclassical_csv(o_.state), default_out("semiclassical_" + o_.state + ".csv"));
        if (command_ == "rate") return write(rate_csv(o_.state), default_out("rate_" + o_.state + ".csv"));
        if (command_ == "census") return census(default_out("census_" + o_.state + ".csv"));
        if (command_ == "report") return report();
        throw ConfigError("unknown subcommand " + command_);
    }

private:
    // ---- configuration ----------------------------------------------------

    double mu() const { return (o_.mu > 0.0 ? o_.mu : mu_K_He3()) * o_.mu_scale; }

    double gamma() const {
        if (o_.pressure_torr >= 0.0) {
            GammaModel m{rate_from_lifetime(parse_lifetime(o_.gamma0_inv)), rate_from_angular_MHz(o_.per_torr_MHz)};
            return m(o_.pressure_torr);
        }
        if (o_.gamma_inv == "inf" || o_.gamma_inv == "none") return 0.0;
        return rate_from_lifetime(parse_lifetime(o_.gamma_inv));
    }

    SiegertSpec spec() const {
        SiegertSpec s;
        s.N = o_.N;
        s.a = o_.a;
        s.exact_boundary = !o_.fallback_boundary;
        return s;
    }

    CutoffPolicy cutoff() const {
        CutoffPolicy c;
        c.l_max = o_.l_max;
        c.adaptive = o_.adaptive_l;
        return c;
    }

    /// Physics-relevant settings only; identical runs give identical text.
    std::vector<std::pair<std::string, std::string>> run_config(const std::string& state) const {
        auto num = [](double v) { return CsvWriter::format(v); };
        std::vector<std::pair<std::string, std::string>> c{
            {"command", command_},
            {"state", state},
            {"tables", tables_.digest},
            {"N", std::to_string(o_.N)},
            {"a", num(o_.a)},
            {"boundary", o_.fallback_boundary ? "plain-outgoing" : "riccati-hankel"},
            {"l_max", std::to_string(o_.l_max)},
            {"adaptive_l", o_.adaptive_l ? "true" : "false"},
            {"mu", num(mu())},
            {"mu_scale", num(o_.mu_scale)},
            {"gamma_inv", o_.gamma_inv},
            {"pressure_torr", num(o_.pressure_torr)},
            {"gamma0_inv", o_.gamma0_inv},
            {"per_torr_MHz", num(o_.per_torr_MHz)},
            {"T", num(o_.T)},
            {"emin_meV", num(o_.emin)},
            {"emax_meV", num(o_.emax)},
            {"points", std::to_string(o_.points)},
            {"windows", o_.no_windows ? "off" : "on"},
            {"per_l", o_.per_l ? "true" : "false"},
            {"gamma_inv_list", o_.gamma_inv_list},
            {"scales", o_.scales},
            {"census_j", std::to_string(o_.census_j)},
            {"census_l_max", std::to_string(o_.census_l_max)},
            {"scale_basis", o_.scale_basis ? "true" : "false"},
            {"time_cap_ps", num(o_.time_cap_ps)},
        };
        return c;
    }

    void header(CsvWriter& w, const std::string& state) const {
        const auto cfg = run_config(state);
        Fnv1a h;
        for (const auto& [k, v] : cfg) h.add(k).add(std::string_view("=")).add(v).add(std::string_view("\n"));
        w.meta("tool", std::string("tunnelres ") + TUNNELRES_VERSION);
        w.meta("config_hash", h.hex());
        w.meta("gamma_au", gamma());
        w.meta("N", std::to_string(o_.N));
        w.meta("a_bohr", o_.a);
        w.meta("l_max", std::to_string(o_.l_max));
        w.meta("mu_me", mu());
        for (const auto& [k, v] : cfg) w.meta("config." + k, v);
    }

    std::string default_out(const std::string& name) const { return o_.out.empty() ? name : o_.out; }

    int write(const CsvWriter& w, const fs::path& path) const {
        w.write(path);
        std::cout << "wrote " << path.string() << '\n';
        return 0;
    }

    // ---- shared computations ---------------------------------------------

    ChannelBank bank(const std::string& state, BankStats* stats = nullptr) {
        BankRequest req;
        req.state = state;
        req.mu = mu();
        req.spec = spec();
        req.l_max = o_.l_max;
        return build_bank(tables_, req, cache_ ? &*cache_ : nullptr, o_.no_compute, o_.threads, stats);
    }

    std::vector<double> energy_grid(const ChannelBank* shifted) const {
        std::vector<double> E;
        for (int i = 0; i < o_.points; ++i) E.push_back(meV(o_.emin + (o_.emax - o_.emin) * i / (o_.points - 1.0)));
        if (shifted && !o_.no_windows) {
            RateGridOptions g;
            for (const auto& w : resonance_windows(*shifted, o_.l_max, meV(o_.emin), meV(o_.emax), g))
                append_window(E, w, g.window_points);
        }
        E.erase(std::remove_if(E.begin(), E.end(), [&](double e) { return e < meV(o_.emin) || e > meV(o_.emax); }), E.end());
        std::sort(E.begin(), E.end());
        E.erase(std::unique(E.begin(), E.end()), E.end());
        return E;
    }

    static double ps(double atomic_time) { return from_atomic(atomic_time, Unit::second) * 1e12; }
    static double cm2(double bohr2) { return convert({bohr2, Unit::bohr2}, Unit::cm2).value; }

    CsvWriter spectrum_csv(const std::string& state, bool with_sigma) {
        const ChannelBank b = bank(state).with_dissociation(gamma());
        const auto E = energy_grid(&b);
        const auto rows = spectrum(b, E, cutoff(), o_.per_l, o_.threads);
        CsvWriter w;
        header(w, b.state);
        std::vector<std::string> cols{"E_meV"};
        if (with_sigma) cols.push_back("sigma_se_cm2");
        cols.push_back("tau_mean_j0_ps");
        cols.push_back("tau_mean_j1_ps");
        if (o_.per_l)
            for (int j = 0; j < 2; ++j)
                for (int l = 0; l <= o_.l_max; ++l) {
                    const std::string sfx = "_j" + std::to_string(j) + "_l" + std::to_string(l);
                    if (with_sigma) {
                        cols.push_back("S_re" + sfx);
                        cols.push_back("S_im" + sfx);
                        cols.push_back("delta" + sfx);
                    }
                    cols.push_back("tau" + sfx + "_ps");
                }
        w.columns(cols);
        for (const auto& r : rows) {
            std::vector<double> v{to_meV(r.E)};
            if (with_sigma) v.push_back(cm2(r.sigma));
            v.push_back(ps(r.tau_mean[0]));
            v.push_back(ps(r.tau_mean[1]));
            if (o_.per_l)
                for (int j = 0; j < 2; ++j)
                    for (std::size_t l = 0; l < r.tau[j].size(); ++l) {
                        if (with_sigma) {
                            v.push_back(r.S[j][l].real());
                            v.push_back(r.S[j][l].imag());
                            v.push_back(r.delta[j][l]);
                        }
                        v.push_back(ps(r.tau[j][l]));
                    }
            w.row(v);
        }
        return w;
    }

    SemiclassicalOptions sc_options() const {
        SemiclassicalOptions s;
        s.time_cap_s = o_.time_cap_ps * 1e-12;
        return s;
    }

    CsvWriter semiclassical_csv(const std::string& state) {
        const ElectronicState& st = tables_.data.find(state);
        const auto path = classical_path(st, mu(), o_.a);
        const auto E = energy_grid(nullptr);
        const auto cs = sigma_se_classical(path, E, sc_options(), o_.threads);
        CsvWriter w;
        header(w, st.label);
        std::size_t capped = 0, fallback = 0;
        for (const auto& c : cs) {
            capped += c.capped;
            fallback += c.fallback ? 1 : 0;
        }
        w.meta("orbiting_time_cap_ps", o_.time_cap_ps);
        w.meta("capped_trajectories", std::to_string(capped));
        w.meta("trapezoid_fallbacks", std::to_string(fallback));
        w.columns({"E_meV", "sigma_c_cm2"});
        for (std::size_t i = 0; i < E.size(); ++i) w.row({to_meV(E[i]), cm2(cs[i].value)});
        return w;
    }

    CsvWriter rate_csv(const std::string& state) {
        const ChannelBank b = bank(state);
        RateGridOptions g;
        g.threads = o_.threads;
        const RateResult rc = classical_rate(classical_path(tables_.data.find(state), mu(), o_.a), o_.T, sc_options(), g);
        CsvWriter w;
        header(w, b.state);
        w.meta("classical_rel_error", rc.rel_error);
        w.columns({"gamma_inv_ns", "k_quantum_cm3s", "k_classical_cm3s", "ratio", "err_estimate"});
        int i = 0;
        for (const auto& item : split_list(o_.gamma_inv_list)) {
            const double life = parse_lifetime(item);
            const RateResult rq = quantum_rate(b, o_.T, rate_from_lifetime(life), cutoff(), g);
            const auto en = enhancement_ratio(rq.k_se, rc.k_se);
            char diag[160];
            std::snprintf(diag, sizeof diag, "nodes=%zu windows=%zu degraded=%s", rq.nodes, rq.windows, rq.degraded ? "true" : "false");
            w.meta("row" + std::to_string(i++), diag);
            w.row({life * 1e9, rq.k_se, rc.k_se, en.ratio, rq.rel_error});
        }
        return w;
    }

    int census(const fs::path& csv_path) {
        const ElectronicState& st = tables_.data.find(o_.state);
        CensusOptions c;
        c.spec = spec();
        c.l_max = o_.census_l_max;
        c.scale_basis = o_.scale_basis;
        c.threads = o_.threads;
        const double base = o_.mu > 0.0 ? o_.mu : mu_K_He3();
        const ScalingStudy study = mass_scaling_study(st, base, parse_numbers(o_.scales), o_.census_j, c);
        CsvWriter w;
        header(w, st.label);
        w.meta("rule", "Re E > 0, Gamma < Re E, Re E < barrier maximum of the partial wave; gamma = 0");
        w.meta("narrow_lifetime_s", c.narrow_lifetime_s);
        w.columns({"mu_scale", "N_res", "N_narrow", "l_last", "N_basis"});
        nlohmann::json js;
        js["state"] = st.label;
        js["j"] = o_.census_j;
        js["slope"] = study.fit.slope;
        js["intercept"] = study.fit.intercept;
        js["r2"] = study.fit.r2;
        js["narrow_lifetime_s"] = c.narrow_lifetime_s;
        js["narrow_fit"] = {{"slope", study.narrow_fit.slope}, {"intercept", study.narrow_fit.intercept}, {"r2", study.narrow_fit.r2}};
        js["rule"] = "Re E > 0, Gamma < Re E, Re E < barrier maximum of the partial wave; gamma = 0";
        for (const auto& r : study.rows) {
            w.row({r.mu_scale, static_cast<double>(r.N_res), static_cast<double>(r.N_narrow), static_cast<double>(r.l_last),
                   static_cast<double>(r.N_used)});
            js["rows"].push_back({{"mu_scale", r.mu_scale}, {"N_res", r.N_res}, {"N_narrow", r.N_narrow}, {"per_l", r.per_l}});
        }
        write(w, csv_path);
        fs::path jp = csv_path;
        jp.replace_extension(".json");
        std::ofstream(jp) << js.dump(2) << '\n';
        std::cout << "wrote " << jp.string() << '\n';
        return 0;
    }

    // ---- subcommands -------------------------------------------------------

    int ingest() {
        const auto& d = tables_.data;
        std::size_t nodes = d.potential_rows;
        std::cout << d.potential_columns << " V states, " << d.alpha_columns << " alpha states, " << nodes << " R nodes\n";
        for (const auto& s : d.states)
            std::cout << "  " << s.label << ": " << s.V.r_nodes.size() << " V nodes, " << s.alpha.r_nodes.size()
                      << " alpha nodes, V(inf) = " << s.V.asymptote << " meV\n";
        for (const auto& [label, c] : d.potential_only) std::cout << "  " << label << ": " << c.r_nodes.size() << " V nodes (no alpha)\n";
        std::cout << "table digest " << tables_.digest << '\n';
        return 0;
    }

    int poles() {
        BankStats stats;
        const ChannelBank b = bank(o_.state, &stats);
        std::size_t bound = 0;
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l <= b.l_max(); ++l)
                for (const auto& k : b.at(j, l).poles)
                    if (std::abs(k.real()) < 1e-8 && k.imag() > 0.0) ++bound;
        std::cout << b.state << ": " << stats.solved << " pole sets solved, " << stats.loaded << " loaded from cache, "
                  << bound << " bound poles over j=0,1 and l<=" << b.l_max() << '\n';
        if (!o_.out.empty()) {
            nlohmann::json arr = nlohmann::json::array();
            for (int j = 0; j < 2; ++j)
                for (int l = 0; l <= b.l_max(); ++l) arr.push_back(to_json(b.at(j, l)));
            std::ofstream(o_.out) << arr.dump() << '\n';
            std::cout << "wrote " << o_.out << '\n';
        }
        return 0;
    }

    int report() {
        const fs::path dir = o_.outdir;
        fs::create_directories(dir);
        const std::string f = o_.figure;
        if (f == "fig2") {
            CsvWriter w;
            header(w, "4S,5S");
            w.columns({"R_bohr", "V_4S_meV", "V_5S_meV", "alpha_4S_MHz", "alpha_5S_MHz", "W_5S_j1_l0_meV", "W_5S_j1_l25_meV"});
            const auto& s4 = tables_.data.find("4S");
            const auto& s5 = tables_.data.find("5S");
            const CurveInterpolant V4(s4.V, o_.a), V5(s5.V, o_.a), A4(s4.alpha, o_.a), A5(s5.alpha, o_.a);
            const ChannelPotential c50(s5, 1, 0, mu(), o_.a), c525(s5, 1, 25, mu(), o_.a);
            for (int i = 0;; ++i) {
                const double R = 3.0 + 0.05 * i;
                if (R > o_.a + 1e-9) break;
                w.row({R, V4(R), V5(R), A4(R), A5(R), to_meV(c50(R)), to_meV(c525(R))});
            }
            return write(w, dir / "fig2_curves.csv");
        }
        if (f == "fig3b") {
            for (const char* s : {"4S", "5S"}) {
                write(spectrum_csv(s, true), dir / (std::string("fig3b_xsec_") + s + ".csv"));
                write(semiclassical_csv(s), dir / (std::string("fig3b_semiclassical_") + s + ".csv"));
            }
            return 0;
        }
        if (f == "fig3c") return write(rate_csv("5S"), dir / "fig3c_rate_5S.csv");
        if (f == "fig3d") {
            for (const char* s : {"4S", "5S"}) write(spectrum_csv(s, false), dir / (std::string("fig3d_delay_") + s + ".csv"));
            return 0;
        }
        if (f == "fig4a") return census(dir / "fig4a_census.csv");
        throw ConfigError("unknown figure '" + f + "' (expected fig2|fig3b|fig3c|fig3d|fig4a)");
    }

    Options o_;
    std::string command_;
    TableSource tables_;
    std::optional<PoleCache> cache_;
};

}  // namespace

int main(int argc, char** argv) {
    openblas_set_num_threads(1);
    CLI::App app{"Spin-exchange tunneling-resonance scattering engine"};
    app.set_version_flag("--version", std::string("tunnelres ") + TUNNELRES_VERSION);
    app.set_config("--config", "", "key = value configuration file");
    app.require_subcommand(1);
    Options o;

    app.add_option("--data", o.data_dir, "directory with potentials_meV.tsv and hyperfine_MHz.tsv");
    app.add_option("--cache", o.cache_dir, "pole-set cache directory");
    app.add_flag("--no-compute", o.no_compute, "fail instead of solving pole sets missing from the cache");
    app.add_option("--threads", o.threads, "worker threads (default: TUNNELRES_THREADS or all cores)");
    app.add_option("--out,-o", o.out, "output file");
    app.add_option("--outdir", o.outdir, "output directory for report");

    app.add_option("--state", o.state, "electronic state label or prefix, e.g. 4S, 5S");
    app.add_option("--N", o.N, "Siegert basis size");
    app.add_option("--a", o.a, "truncation radius (bohr)");
    app.add_flag("--fallback-boundary", o.fallback_boundary, "plain outgoing boundary (d/dR - ik)u = 0");
    app.add_option("--l-max", o.l_max, "highest partial wave");
    app.add_flag("--adaptive-l", o.adaptive_l, "stop the partial-wave sum once contributions become negligible");
    app.add_option("--mu", o.mu, "reduced mass in electron masses (default K-3He)");
    app.add_option("--mu-scale", o.mu_scale, "multiplier on the reduced mass");
    app.add_option("--gamma-inv", o.gamma_inv, "dissociation lifetime, e.g. 1ns, 10ps, or 'none'");
    app.add_option("--pressure", o.pressure_torr, "buffer pressure in Torr; selects gamma = gamma0 + a p");
    app.add_option("--gamma0-inv", o.gamma0_inv, "spontaneous lifetime for the pressure model");
    app.add_option("--per-torr-MHz", o.per_torr_MHz, "collisional rate per Torr as 2 pi x MHz");
    app.add_option("--T", o.T, "temperature (K)");
    app.add_option("--emin", o.emin, "lowest energy (meV)");
    app.add_option("--emax", o.emax, "highest energy (meV)");
    app.add_option("--points", o.points, "uniform energy points");
    app.add_flag("--no-windows", o.no_windows, "do not add resonance windows to the energy grid");
    app.add_flag("--per-l", o.per_l, "emit per-partial-wave columns");
    app.add_option("--gamma-inv-list", o.gamma_inv_list, "lifetimes for the rate sweep");
    app.add_option("--scales", o.scales, "reduced-mass scales for the census");
    app.add_option("--census-j", o.census_j, "spin channel counted by the census");
    app.add_option("--census-l-max", o.census_l_max, "census partial-wave limit (-1: until the barrier vanishes)");
    app.add_flag("--scale-basis", o.scale_basis, "grow N with sqrt(mu-scale) in the census");
    app.add_option("--time-cap-ps", o.time_cap_ps, "orbiting path-time cap for the semiclassical integral");

    for (const char* name : {"ingest", "poles", "xsec", "delay", "semiclassical", "rate", "census"}) app.add_subcommand(name)->fallthrough();
    auto* rep = app.add_subcommand("report", "CSV set for one figure")->fallthrough();
    rep->add_option("figure", o.figure, "fig2|fig3b|fig3c|fig3d|fig4a")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        return Runner(o, app.get_subcommands().front()->get_name()).run();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const UnitError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

#pragma once

// Glue used by the command-line tool and the acceptance runner: table loading
// with a content digest, and pole-set banks backed by the on-disk cache.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tunnelres/io.hpp"
#include "tunnelres/parallel.hpp"
#include "tunnelres/potential_data.hpp"
#include "tunnelres/scattering.hpp"
#include "tunnelres/siegert.hpp"

namespace tunnelres {

struct TableSource {
    std::string directory;
    std::string digest;  // FNV-1a of both raw tables
    StateDataset data;
};

inline TableSource load_tables(const std::string& dir = default_data_dir()) {
    const std::string v = read_text_file(dir + "/potentials_meV.tsv");
    const std::string al = read_text_file(dir + "/hyperfine_MHz.tsv");
    TableSource t;
    t.directory = dir;
    t.digest = Fnv1a().add(v).add(std::string_view("\x1f")).add(al).hex();
    t.data = parse_state_tables(v, al);
    return t;
}

struct BankRequest {
    std::string state = "5S";
    double mu = 0.0;  // electron masses; 0 selects K-3He
    SiegertSpec spec;
    int l_max = 60;
};

struct BankStats {
    std::size_t solved = 0;
    std::size_t loaded = 0;
};

/// Pole sets (gamma = 0) for both spin channels and l = 0..l_max. With a cache,
/// existing sets are loaded and new ones stored; with no_compute a missing
/// entry is an error.
inline ChannelBank build_bank(const TableSource& tables, const BankRequest& req, const PoleCache* cache = nullptr,
                              bool no_compute = false, unsigned threads = 0, BankStats* stats = nullptr) {
    if (req.l_max < 0) throw ConfigError("l_max must be non-negative");
    req.spec.validate();
    const ElectronicState& st = tables.data.find(req.state);
    const double mu = req.mu > 0.0 ? req.mu : mu_K_He3();
    const std::size_t n = static_cast<std::size_t>(req.l_max + 1);
    std::vector<PoleSet> sets(2 * n);
    std::vector<char> solved(2 * n, 0);
    parallel_for(
        2 * n,
        [&](std::size_t idx) {
            const int j = static_cast<int>(idx / n);
            const int l = static_cast<int>(idx % n);
            const std::string key = pole_cache_key(tables.digest, st.label, j, l, mu, req.spec);
            if (cache && cache->load(key, sets[idx])) return;
            if (no_compute)
                throw DataError("pole set for " + st.label + " j=" + std::to_string(j) + " l=" + std::to_string(l) +
                                " not in cache (--no-compute)");
            sets[idx] = solve_poles(ChannelPotential(st, j, l, mu, req.spec.a), req.spec);
            solved[idx] = 1;
            if (cache) cache->store(key, sets[idx]);
        },
        threads);
    ChannelBank bank;
    bank.state = st.label;
    bank.mu = mu;
    for (std::size_t i = 0; i < n; ++i) {
        bank.singlet.push_back(std::move(sets[i]));
        bank.triplet.push_back(std::move(sets[n + i]));
    }
    attach_barriers(bank, st);
    if (stats) {
        for (char s : solved) s ? ++stats->solved : ++stats->loaded;
    }
    return bank;
}

}  // namespace tunnelres

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tunnelres/siegert.hpp"

namespace tunnelres {

/// 64-bit FNV-1a.
class Fnv1a {
public:
    Fnv1a& add(std::string_view s) {
        for (unsigned char c : s) {
            h_ ^= c;
            h_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    Fnv1a& add(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g;", v);
        return add(std::string_view(buf));
    }
    Fnv1a& add(long long v) { return add(std::to_string(v) + ";"); }
    std::uint64_t value() const { return h_; }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

// ---------------------------------------------------------------------------
// Pole sets as JSON

inline nlohmann::json to_json(const PoleSet& ps) {
    nlohmann::json j;
    j["state"] = ps.state;
    j["j"] = ps.j;
    j["l"] = ps.l;
    j["gamma"] = ps.gamma;
    j["mu"] = ps.mu;
    j["N"] = ps.spec.N;
    j["a"] = ps.spec.a;
    j["exact_boundary"] = ps.spec.exact_boundary;
    j["basis"] = ps.spec.basis;
    j["expected_count"] = ps.expected_count;
    j["warnings"] = ps.warnings;
    auto& arr = j["poles"] = nlohmann::json::array();
    for (const auto& k : ps.poles) arr.push_back({{"re", k.real()}, {"im", k.imag()}});
    return j;
}

inline PoleSet pole_set_from_json(const nlohmann::json& j) {
    try {
        PoleSet ps;
        ps.state = j.at("state").get<std::string>();
        ps.j = j.at("j").get<int>();
        ps.l = j.at("l").get<int>();
        ps.gamma = j.at("gamma").get<double>();
        ps.mu = j.at("mu").get<double>();
        ps.spec.N = j.at("N").get<int>();
        ps.spec.a = j.at("a").get<double>();
        ps.spec.exact_boundary = j.value("exact_boundary", true);
        ps.spec.basis = j.value("basis", std::string("gll-lagrange"));
        ps.expected_count = j.value("expected_count", std::size_t{0});
        ps.warnings = j.value("warnings", std::vector<std::string>{});
        for (const auto& p : j.at("poles")) ps.poles.emplace_back(p.at("re").get<double>(), p.at("im").get<double>());
        return ps;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed pole-set document: ") + e.what());
    }
}

/// Cache key: content hash of the raw tables plus everything that shapes the
/// eigenproblem.
inline std::string pole_cache_key(std::string_view table_digest, const std::string& state, int j, int l, double mu,
                                  const SiegertSpec& spec) {
    Fnv1a h;
    h.add(table_digest).add(state).add(static_cast<long long>(j)).add(static_cast<long long>(l)).add(mu);
    h.add(static_cast<long long>(spec.N)).add(spec.a).add(static_cast<long long>(spec.exact_boundary)).add(spec.basis);
    return h.hex();
}

/// Directory of pole-set JSON files keyed by pole_cache_key.
class PoleCache {
public:
    explicit PoleCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::filesystem::path path_for(const std::string& key) const { return dir_ / ("poles_" + key + ".json"); }

    bool load(const std::string& key, PoleSet& out) const {
        std::ifstream in(path_for(key));
        if (!in) return false;
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("corrupt cache file " + path_for(key).string() + ": " + e.what());
        }
        out = pole_set_from_json(j);
        return true;
    }

    void store(const std::string& key, const PoleSet& ps) const {
        std::filesystem::create_directories(dir_);
        const auto final_path = path_for(key);
        const auto tmp = final_path.string() + ".tmp";
        {
            std::ofstream out(tmp);
            if (!out) throw DataError("cannot write cache file " + tmp);
            out << to_json(ps).dump() << '\n';
        }
        std::filesystem::rename(tmp, final_path);
    }

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// CSV

/// Fixed-format CSV writer: '#'-prefixed metadata lines, one header row, and
/// numbers printed with %.10e so outputs are byte-stable.
class CsvWriter {
public:
    void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
    void meta(const std::string& key, double value) { meta_.emplace_back(key, format(value)); }
    void columns(std::vector<std::string> names) { columns_ = std::move(names); }
    void row(const std::vector<double>& values) {
        std::string line;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += format(values[i]);
        }
        rows_.push_back(std::move(line));
    }

    std::string str() const {
        std::ostringstream os;
        for (const auto& [k, v] : meta_) os << "# " << k << ": " << v << '\n';
        for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << '\n';
        for (const auto& r : rows_) os << r << '\n';
        return os.str();
    }

    void write(const std::filesystem::path& path) const {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path.string());
        out << str();
    }

    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10e", v);
        return buf;
    }

private:
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

struct CsvTable {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw DataError("CSV has no column '" + name + "'");
    }
};

/// Reads files produced by CsvWriter.
inline CsvTable read_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon != std::string::npos && line.size() > 2)
                t.meta.emplace_back(line.substr(2, colon - 2), line.substr(std::min(line.size(), colon + 2)));
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (!header) {
            t.columns = cells;
            header = true;
            continue;
        }
        std::vector<double> r;
        for (const auto& s : cells) {
            try {
                r.push_back(std::stod(s));
            } catch (const std::exception&) {
                throw DataError("CSV: bad number '" + s + "'");
            }
        }
        t.rows.push_back(std::move(r));
    }
    return t;
}

}  // namespace tunnelres

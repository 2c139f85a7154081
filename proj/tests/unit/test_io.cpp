#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "tunnelres/pipeline.hpp"

using namespace tunnelres;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tunnelres_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Hash, StableAndSensitive) {
    EXPECT_EQ(Fnv1a().add(std::string_view("abc")).hex(), Fnv1a().add(std::string_view("abc")).hex());
    EXPECT_NE(Fnv1a().add(1.0).hex(), Fnv1a().add(1.0000000000000002).hex());
    EXPECT_EQ(Fnv1a().hex(), "cbf29ce484222325");
}

TEST(PoleJson, RoundTrip) {
    PoleSet ps;
    ps.state = "5S:2Sigma";
    ps.j = 1;
    ps.l = 7;
    ps.mu = 5102.89;
    ps.gamma = 1e-8;
    ps.poles = {cplx(0.1234567890123, -1e-9), cplx(0.0, 0.25)};
    ps.warnings = {"w"};
    const PoleSet back = pole_set_from_json(nlohmann::json::parse(to_json(ps).dump()));
    EXPECT_EQ(back.state, ps.state);
    EXPECT_EQ(back.l, 7);
    EXPECT_EQ(back.poles, ps.poles);
    EXPECT_EQ(back.gamma, ps.gamma);
    EXPECT_EQ(back.warnings, ps.warnings);
    EXPECT_THROW(pole_set_from_json(nlohmann::json::parse("{\"state\": 3}")), DataError);
}

TEST(PoleCache, StoreLoadAndKeys) {
    const fs::path dir = scratch_dir("cache");
    PoleCache cache(dir);
    PoleSet ps;
    ps.state = "x";
    ps.poles = {cplx(1.0, -0.5)};
    SiegertSpec s;
    const std::string k1 = pole_cache_key("digest", "x", 0, 3, 5102.89, s);
    s.N = 150;
    EXPECT_NE(k1, pole_cache_key("digest", "x", 0, 3, 5102.89, s));
    EXPECT_NE(k1, pole_cache_key("other", "x", 0, 3, 5102.89, SiegertSpec{}));
    PoleSet out;
    EXPECT_FALSE(cache.load(k1, out));
    cache.store(k1, ps);
    ASSERT_TRUE(cache.load(k1, out));
    EXPECT_EQ(out.poles, ps.poles);
    std::ofstream(cache.path_for("broken")) << "{not json";
    EXPECT_THROW(cache.load("broken", out), DataError);
    fs::remove_all(dir);
}

TEST(Pipeline, BankFromCacheEqualsFreshSolve) {
    const TableSource t = load_tables();
    const fs::path dir = scratch_dir("bank");
    PoleCache cache(dir);
    BankRequest req;
    req.l_max = 2;
    req.spec.N = 60;
    BankStats first, second;
    const ChannelBank a = build_bank(t, req, &cache, false, 2, &first);
    const ChannelBank b = build_bank(t, req, &cache, true, 1, &second);
    EXPECT_EQ(first.solved, 6u);
    EXPECT_EQ(second.loaded, 6u);
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l <= 2; ++l) EXPECT_EQ(a.at(j, l).poles, b.at(j, l).poles);
    EXPECT_EQ(a.barrier_top[1], b.barrier_top[1]);
    req.l_max = 3;
    EXPECT_THROW(build_bank(t, req, &cache, true), DataError);
    fs::remove_all(dir);
}

TEST(Csv, DeterministicTextAndRoundTrip) {
    CsvWriter w;
    w.meta("config_hash", "abc");
    w.meta("T", 373.15);
    w.columns({"E_meV", "sigma"});
    w.row({0.1, 1.0 / 3.0});
    w.row({2.0, -4e-30});
    const std::string text = w.str();
    EXPECT_EQ(text, "# config_hash: abc\n# T: 3.7315000000e+02\nE_meV,sigma\n1.0000000000e-01,3.3333333333e-01\n2.0000000000e+00,-4.0000000000e-30\n");
    const CsvTable t = read_csv(text);
    EXPECT_EQ(t.columns.size(), 2u);
    EXPECT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.column("sigma"), 1u);
    EXPECT_DOUBLE_EQ(t.rows[1][1], -4e-30);
    EXPECT_EQ(t.meta[0].second, "abc");
    EXPECT_THROW(t.column("nope"), DataError);
    EXPECT_THROW(read_csv("a\nx\n"), DataError);
}

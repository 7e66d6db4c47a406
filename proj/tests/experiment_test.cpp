#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wiretap/experiment.hpp"

using namespace wiretap;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cell += '"', ++i;
        else if (c == '"') quoted = false;
        else cell += c;
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        row.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
}

json without_wall_time(json j) {
  j.erase("wall_time");
  return j;
}

std::vector<std::string> issue_fields(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    std::vector<std::string> f;
    for (const auto& i : e.issues()) f.push_back(i.field);
    return f;
  }
  return {};
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST(Experiment, TypeTwoRateIsOneMinusAlpha) {
  for (auto [alpha, rate] : std::vector<std::pair<std::string, double>>{{"0", 1.0}, {"1/4", 0.75}, {"1/2", 0.5}}) {
    auto cfg = config_from_json({{"scenario", "type2"}, {"K", 8}, {"alpha", alpha}, {"beta", 0.3}});
    auto rep = run(cfg);
    EXPECT_NEAR(rep["theoretical_rate"].get<double>(), rate, 1e-12) << alpha;
    EXPECT_FALSE(rep.contains("bler"));
    EXPECT_FALSE(rep.contains("per_main"));
  }
}

TEST(Experiment, WynerErasureRate) {
  // I(U;Y) - I(U;Z) = (1 - 0.1) - (1 - 0.4) for uniform input
  auto cfg = config_from_json({{"scenario", "wyner"},
                               {"K", 8},
                               {"main", {{"type", "bec"}, {"eps", 0.1}}},
                               {"eve", {{"type", "bec"}, {"eps", 0.4}}}});
  auto rep = run(cfg);
  EXPECT_NEAR(rep["theoretical_rate"].get<double>(), 0.3, 1e-12);
  EXPECT_EQ(rep["trials"], 0);
}

TEST(Experiment, FieldDiagnostics) {
  auto f = issue_fields({{"scenario", "wyner"}, {"alpha", "1/4"}, {"main", "noiseless"}, {"eve", "noiseless"}});
  EXPECT_TRUE(has(f, "alpha"));
  f = issue_fields({{"scenario", "type2"}, {"eve", {{"type", "bsc"}, {"p", 0.1}}}});
  EXPECT_TRUE(has(f, "eve"));
  f = issue_fields({{"scenario", "avc_eve"},
                    {"main", "noiseless"},
                    {"eves", {{{"type", "bec"}, {"eps", 0.3}}, {{"type", "bec"}, {"eps", 0.5}}}}});
  EXPECT_TRUE(has(f, "best_eve"));
  // BEC(0.3) is not a degraded version of BEC(0.5)
  f = issue_fields({{"scenario", "avc_eve"},
                    {"main", "noiseless"},
                    {"best_eve", 1},
                    {"eves", {{{"type", "bec"}, {"eps", 0.3}}, {{"type", "bec"}, {"eps", 0.5}}}}});
  EXPECT_TRUE(has(f, "best_eve"));
  f = issue_fields({{"scenario", "compound"},
                    {"mains", {"noiseless", "noiseless"}},
                    {"eves", {"noiseless"}},
                    {"multipliers", {2, 1}}});
  EXPECT_TRUE(has(f, "multipliers"));
  f = issue_fields({{"scenario", "hybrid"}, {"K", 12}, {"beta", 0.7}, {"colour", 3}});
  EXPECT_TRUE(has(f, "K"));
  EXPECT_TRUE(has(f, "colour"));
  f = issue_fields({{"scenario", "hybrid"}, {"K", 12}, {"beta", 0.7}});
  EXPECT_TRUE(has(f, "K"));
  EXPECT_TRUE(has(f, "beta"));
  EXPECT_TRUE(has(f, "main"));
  EXPECT_TRUE(issue_fields({{"scenario", "avc_eve"},
                            {"main", "noiseless"},
                            {"best_eve", 0},
                            {"eves", {{{"type", "bec"}, {"eps", 0.3}}, {{"type", "bec"}, {"eps", 0.5}}}}})
                  .empty());
}

TEST(Experiment, AvcDefaultsToAlternatingStates) {
  auto cfg = config_from_json({{"scenario", "avc_eve"},
                               {"main", "noiseless"},
                               {"best_eve", 0},
                               {"eves", {{{"type", "bec"}, {"eps", 0.3}}, {{"type", "bec"}, {"eps", 0.5}}}}});
  ASSERT_TRUE(cfg.eve_states);
  EXPECT_EQ(*cfg.eve_states, Exposure::EveStates::alternating);
}

TEST(Experiment, ChannelSpecs) {
  const auto dir = std::filesystem::temp_directory_path() / "wiretap_channel_spec";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "ch.json") << R"({"type": "table", "name": "z", "rows": [[0.7, 0.2, 0.1], [0.1, 0.2, 0.7]]})";
  }
  auto c = channel_from_json(json{{"file", "ch.json"}}, dir);
  EXPECT_EQ(c.name, "z");
  EXPECT_EQ(c.outputs(), 3u);
  EXPECT_DOUBLE_EQ(c(1, 2), 0.7);
  auto back = channel_from_json(to_json(c));
  EXPECT_TRUE(back.table.isApprox(c.table, 0));
  EXPECT_THROW(channel_from_json(json{{"type", "table"}, {"rows", {{0.5, 0.6}, {0.5, 0.5}}}}), std::invalid_argument);
  EXPECT_THROW(channel_from_json(json{{"type", "awgn"}}), std::invalid_argument);
  auto s = source_from_json(to_json(SourceSpec::from_conditional(0.3, 0.2)));
  EXPECT_TRUE(s.q.isApprox(SourceSpec::from_conditional(0.3, 0.2).q, 0));
  std::filesystem::remove_all(dir);
}

TEST(Experiment, WilsonInterval) {
  // values from the closed form, evaluated by hand
  auto a = wilson_interval(0, 10);
  EXPECT_NEAR(a.lo, 0.0, 1e-12);
  EXPECT_NEAR(a.hi, 0.27753, 1e-4);
  auto b = wilson_interval(5, 10);
  EXPECT_NEAR(b.lo, 0.23659, 1e-4);
  EXPECT_NEAR(b.hi, 0.76341, 1e-4);
  auto z = wilson_interval(0, 0);
  EXPECT_EQ(z.lo, 0.0);
  EXPECT_EQ(z.hi, 1.0);
}

TEST(Sweep, AlphaAxisGivesTypeTwoRates) {
  json base = {{"scenario", "type2"}, {"K", 8}, {"beta", 0.3}};
  auto rows = parse_csv(sweep(base, "alpha", {"0", "0.25", "0.5"}));
  ASSERT_EQ(rows.size(), 4u);
  const auto rate = column(rows[0], "theoretical_rate"), err = column(rows[0], "error");
  ASSERT_LT(rate, rows[0].size());
  const double expect[] = {1.0, 0.75, 0.5};
  for (std::size_t i = 0; i < 3; ++i) {
    ASSERT_EQ(rows[i + 1].size(), rows[0].size());
    EXPECT_EQ(rows[i + 1][err], "");
    EXPECT_NEAR(std::stod(rows[i + 1][rate]), expect[i], 1e-12);
  }
}

TEST(Sweep, EmptyAndBadValues) {
  json base = {{"scenario", "type2"}, {"K", 8}, {"beta", 0.3}};
  auto empty = parse_csv(sweep(base, "alpha", {}));
  ASSERT_EQ(empty.size(), 1u);
  EXPECT_EQ(empty[0][0], "axis");
  EXPECT_THROW(sweep(base, "scenario", {"wyner"}), std::invalid_argument);
  auto rows = parse_csv(sweep(base, "K", {"12", "x"}));
  ASSERT_EQ(rows.size(), 3u);
  const auto err = column(rows[0], "error");
  EXPECT_NE(rows[1][err].find("K"), std::string::npos);
  EXPECT_NE(rows[2][err], "");
}

TEST(Run, DeterministicAcrossThreadCounts) {
  json j = {{"scenario", "wyner"},
            {"K", 16},
            {"L", 2},
            {"B", 2},
            {"beta", 0.45},
            {"samples", 4000},
            {"main", {{"type", "bec"}, {"eps", 0.05}}},
            {"eve", {{"type", "bec"}, {"eps", 0.6}}},
            {"trials", 6},
            {"seed", 11}};
  auto a = run(config_from_json(j));
  auto b = run(config_from_json(j));
  j["threads"] = 3;
  auto c = run(config_from_json(j));
  ASSERT_TRUE(a.contains("bler"));
  EXPECT_EQ(without_wall_time(a).dump(), without_wall_time(b).dump());
  EXPECT_EQ(without_wall_time(a).dump(), without_wall_time(c).dump());
  EXPECT_GE(a["wall_time"].get<double>(), 0.0);
  const auto lo = a["bler_ci95"][0].get<double>(), hi = a["bler_ci95"][1].get<double>();
  EXPECT_LE(lo, a["bler"].get<double>());
  EXPECT_GE(hi, a["bler"].get<double>());
}

TEST(Run, CacheMatchesRecomputation) {
  const auto dir = std::filesystem::temp_directory_path() / "wiretap_cache_test";
  std::filesystem::remove_all(dir);
  DirectoryProfileStore store(dir);
  auto cfg = config_from_json({{"scenario", "wyner"},
                               {"K", 32},
                               {"beta", 0.4},
                               {"samples", 3000},
                               {"main", {{"type", "bec"}, {"eps", 0.1}}},
                               {"eve", {{"type", "bec"}, {"eps", 0.4}}}});
  const auto fresh = construct_report(cfg, nullptr);
  const auto cold = construct_report(cfg, &store);
  std::size_t files = 0;
  for (auto& e : std::filesystem::directory_iterator(dir)) files += e.path().extension() == ".json";
  EXPECT_GT(files, 0u);
  const auto warm = construct_report(cfg, &store);
  EXPECT_EQ(fresh.dump(), cold.dump());
  EXPECT_EQ(fresh.dump(), warm.dump());
  // a different seed is a different key
  cfg.seed = 2;
  construct_report(cfg, &store);
  std::size_t more = 0;
  for (auto& e : std::filesystem::directory_iterator(dir)) more += e.path().extension() == ".json";
  EXPECT_GT(more, files);
  std::filesystem::remove_all(dir);
}

TEST(Run, TinyConfigRunsLeakageChecks) {
  auto cfg = config_from_json({{"scenario", "type2"}, {"K", 4}, {"alpha", "1/4"}, {"beta", 0.25}, {"trials", 2}});
  ASSERT_TRUE(cfg.tiny());
  auto rep = run(cfg);
  ASSERT_TRUE(rep.contains("leakage_checks"));
  const auto& lk = rep["leakage_checks"];
  ASSERT_TRUE(lk.contains("leftover_hash"));
  EXPECT_TRUE(lk["leftover_hash"]["pass"].get<bool>()) << lk.dump(2);
  EXPECT_TRUE(lk["sampler_divergence"]["pass"].get<bool>()) << lk.dump(2);
  EXPECT_EQ(rep["key_agreement_rate"].get<double>(), 1.0);
  EXPECT_EQ(rep["session_error_rate"].get<double>(), 0.0);
}

TEST(Run, CompoundReportsEachMain) {
  auto cfg = config_from_json({{"scenario", "compound"},
                               {"K", 8},
                               {"beta", 0.4},
                               {"B", 2},
                               {"mains", {"noiseless", "noiseless"}},
                               {"eves", {{{"type", "bec"}, {"eps", 1.0}}}},
                               {"multipliers", {1, 2}},
                               {"trials", 3}});
  auto rep = run(cfg);
  ASSERT_EQ(rep["per_main"].size(), 2u);
  for (const auto& m : rep["per_main"]) EXPECT_EQ(m["block_errors"], 0);
  EXPECT_EQ(rep["code"]["pieces"], 2);
}

TEST(BenchGf, PathsAgree) {
  auto rep = bench_gf({64, 1024}, 50, 3);
  ASSERT_EQ(rep["results"].size(), 2u);
  for (const auto& r : rep["results"]) {
    EXPECT_GT(r["portable_ns"].get<double>(), 0.0);
    if (rep["hardware_available"].get<bool>()) EXPECT_TRUE(r["agree"].get<bool>());
  }
}

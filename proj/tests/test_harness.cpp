/*
 * Copyright 2026 The attrib_forge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <filesystem>

#include "doctest.h"

#include "attrib_forge/error.hpp"
#include "attrib_forge/fixtures.hpp"
#include "attrib_forge/harness.hpp"
#include "test_support.hpp"

using namespace attrib_forge;

namespace {

struct GridFixture {
  fixtures::Fixture fx;
  EmbeddingSet m2;
  GridEmbeddings grids() const { return {&fx.embeddings, &m2}; }
};

GridFixture grid_fixture(std::vector<fixtures::FixtureArtist> artists, std::uint64_t seed,
                         double gap = 0.5, std::uint32_t min_side = 300,
                         std::uint32_t max_side = 460, double separation = 2.0) {
  fixtures::FixtureSpec spec;
  spec.artists = std::move(artists);
  spec.dim = 8;
  spec.separation = separation;
  spec.domain_gap = gap;
  spec.grid = GridSpec{};
  spec.min_side_px = min_side;
  spec.max_side_px = max_side;
  spec.seed = seed;
  GridFixture out{fixtures::generate(spec), {}};
  GridSpec m2;
  m2.strategy = Strategy::kM2;
  out.m2 = fixtures::generate_embeddings(spec, out.fx.manifest, out.fx.oracle, m2);
  return out;
}

ExperimentConfig quick(Setting setting) {
  ExperimentConfig base;
  base.train.max_rounds = 60;
  base.train.early_stop_patience = 10;
  base.train.min_samples_leaf = 5;
  return config_for(setting, base);
}

DatasetManifest real_manifest(const std::vector<std::pair<std::string, int>>& counts) {
  std::vector<PaintingEntry> entries;
  for (const auto& [artist, n] : counts) {
    for (int i = 0; i < n; ++i) {
      entries.push_back({artist + "_" + std::to_string(i), artist, Domain::kReal, 500, 500, std::nullopt});
    }
  }
  return make_manifest(entries);
}

}  // namespace

TEST_CASE("settings names and configs") {
  for (auto s : kAllSettings) CHECK(parse_setting(setting_name(s)) == s);
  CHECK(setting_name(Setting::kSyntheticToReal) == "synthetic-to-real");
  CHECK_THROWS_AS(parse_setting("hybrid"), DataError);
  CHECK(tests_on_real(Setting::kRealOnly));
  CHECK_FALSE(tests_on_real(Setting::kSyntheticOnly));
  CHECK(config_for(Setting::kHybridM2, ExperimentConfig{}).grid_train.strategy == Strategy::kM2);
  CHECK(config_for(Setting::kHybridM1, ExperimentConfig{}).grid_train.strategy == Strategy::kM1);
  CHECK(config_for(Setting::kHybridM2, ExperimentConfig{}).grid_test.strategy == Strategy::kM1);
  ExperimentConfig wrong;
  wrong.setting = Setting::kHybridM2;
  CHECK_THROWS_AS(wrong.validate(), DataError);
}

TEST_CASE("plan_splits: seven real paintings give 5 train, 1 valid, 1 test") {
  const auto manifest = real_manifest({{"GD", 7}, {"GR", 13}});
  const auto plan = plan_splits(manifest, quick(Setting::kRealOnly));
  const auto& gd = plan.per_artist.at("GD");
  CHECK(gd.test == std::vector<std::string>{"GD_0"});
  CHECK(gd.valid.size() == 1);
  CHECK(gd.train.size() == 5);
  const auto& gr = plan.per_artist.at("GR");
  CHECK(gr.valid.size() == 2);  // floor(0.2 * 12)
  CHECK(gr.train.size() == 10);
  CHECK_NOTHROW(check_group_integrity(plan));
}

TEST_CASE("plan_splits: holdout directive picks the test painting") {
  auto manifest = real_manifest({{"GD", 4}, {"GR", 4}});
  manifest.holdout_ids = {"GD_2"};
  const auto plan = plan_splits(manifest, quick(Setting::kRealOnly));
  CHECK(plan.per_artist.at("GD").test == std::vector<std::string>{"GD_2"});
  CHECK(plan.per_artist.at("GR").test == std::vector<std::string>{"GR_0"});
}

TEST_CASE("plan_splits: synthetic-only tests on the highest ordinals") {
  std::vector<PaintingEntry> entries;
  for (const std::string artist : {"GD", "GR"}) {
    entries.push_back({artist + "_real", artist, Domain::kReal, 500, 500, std::nullopt});
    // Manifest order deliberately differs from ordinal order.
    for (std::uint32_t i = 0; i < 100; ++i) {
      const std::uint32_t ordinal = (i * 37) % 100;
      entries.push_back({artist + "_s" + std::to_string(ordinal), artist, Domain::kSynthetic, 500,
                         500, ordinal});
    }
  }
  const auto manifest = make_manifest(entries);
  const auto plan = plan_splits(manifest, quick(Setting::kSyntheticOnly));
  for (const std::string artist : {"GD", "GR"}) {
    auto test = plan.per_artist.at(artist).test;
    std::sort(test.begin(), test.end());
    CHECK(test == std::vector<std::string>{artist + "_s95", artist + "_s96", artist + "_s97",
                                           artist + "_s98", artist + "_s99"});
    const auto& split = plan.per_artist.at(artist);
    CHECK(split.valid.size() == 19);  // floor(0.2 * 95)
    CHECK(split.train.size() == 76);
    for (const auto& id : split.train) CHECK(id != artist + "_real");
  }
}

TEST_CASE("plan_splits: training pools per setting") {
  const auto gf = grid_fixture({{"A", 4, 8}, {"B", 4, 8}}, 3);
  const auto& manifest = gf.fx.manifest;
  auto count_domain = [&](const std::vector<std::string>& ids, Domain d) {
    return std::count_if(ids.begin(), ids.end(), [&](const std::string& id) {
      return manifest.find(id)->domain == d;
    });
  };
  for (auto s : kAllSettings) {
    const auto plan = plan_splits(manifest, quick(s));
    const auto& a = plan.per_artist.at("A");
    std::vector<std::string> pool = a.train;
    pool.insert(pool.end(), a.valid.begin(), a.valid.end());
    switch (s) {
      case Setting::kRealOnly:
        CHECK(count_domain(pool, Domain::kReal) == 3);
        CHECK(count_domain(pool, Domain::kSynthetic) == 0);
        break;
      case Setting::kSyntheticOnly:
        CHECK(count_domain(pool, Domain::kSynthetic) == 3);
        CHECK(count_domain(a.test, Domain::kSynthetic) == 5);
        break;
      case Setting::kSyntheticToReal:
        CHECK(count_domain(pool, Domain::kReal) == 0);
        CHECK(count_domain(pool, Domain::kSynthetic) == 8);
        break;
      case Setting::kHybridM1:
      case Setting::kHybridM2:
        CHECK(count_domain(pool, Domain::kReal) == 3);
        CHECK(count_domain(pool, Domain::kSynthetic) == 8);
        break;
    }
    if (tests_on_real(s)) {
      CHECK(a.test.size() == 1);
      CHECK(count_domain(a.test, Domain::kReal) == 1);
    }
    CHECK_NOTHROW(check_group_integrity(plan));
  }
}

TEST_CASE("plan_splits errors") {
  CHECK_THROWS_WITH_AS(plan_splits(real_manifest({{"GD", 1}, {"GR", 5}}), quick(Setting::kRealOnly)),
                       doctest::Contains("cannot form non-empty train and validation sets"), DataError);
  CHECK_THROWS_WITH_AS(plan_splits(real_manifest({{"GD", 5}, {"GR", 5}}), quick(Setting::kSyntheticToReal)),
                       doctest::Contains("no synthetic data"), DataError);
  CHECK_THROWS_AS(plan_splits(real_manifest({{"GD", 5}}), quick(Setting::kRealOnly)), DataError);

  // An artist with only synthetic paintings has nothing to hold out.
  auto manifest = make_manifest({{"a0", "A", Domain::kReal, 500, 500, std::nullopt},
                                 {"a1", "A", Domain::kReal, 500, 500, std::nullopt},
                                 {"a2", "A", Domain::kReal, 500, 500, std::nullopt},
                                 {"b0", "B", Domain::kSynthetic, 500, 500, 0u},
                                 {"b1", "B", Domain::kSynthetic, 500, 500, 1u}});
  CHECK_THROWS_WITH_AS(plan_splits(manifest, quick(Setting::kRealOnly)),
                       doctest::Contains("missing hold-out designation"), DataError);
}

TEST_CASE("check_group_integrity detects shared paintings") {
  SplitPlan plan;
  plan.artists = {"A", "B"};
  plan.per_artist["A"] = {{"p1", "p2"}, {"p3"}, {"p4"}};
  plan.per_artist["B"] = {{"q1"}, {"p4"}, {"q3"}};
  CHECK_THROWS_AS(check_group_integrity(plan), InvariantError);
}

TEST_CASE("label_one_vs_rest") {
  const auto gf = grid_fixture({{"A", 3, 0}, {"B", 3, 0}, {"C", 3, 0}}, 4);
  const auto table = join(gf.fx.manifest, gf.fx.embeddings);
  const auto y = label_one_vs_rest(table, "B");
  std::size_t b_rows = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(y[i] == (table.rows[i].artist == "B"));
    b_rows += table.rows[i].artist == "B";
  }
  CHECK(static_cast<std::size_t>(std::count(y.begin(), y.end(), 1)) == b_rows);
  CHECK_THROWS_AS(label_one_vs_rest(table, "Z"), DataError);
}

TEST_CASE("build_tables: no leakage, shared test set, M2 density") {
  const auto gf = grid_fixture({{"A", 4, 8}, {"B", 5, 8}, {"C", 4, 8}}, 5);
  std::vector<std::pair<std::string, std::uint32_t>> reference_test;
  std::size_t m1_train_rows = 0;
  for (auto s : kAllSettings) {
    const auto tables = build_tables(gf.fx.manifest, gf.grids(), quick(s));
    const auto test_ids = tables.plan.test_ids();
    const auto valid_ids = tables.plan.valid_ids();
    for (const auto& row : tables.train.rows) {
      CHECK(test_ids.count(row.painting_id) == 0);
      CHECK(valid_ids.count(row.painting_id) == 0);
    }
    for (const auto& row : tables.valid.rows) CHECK(test_ids.count(row.painting_id) == 0);

    if (tests_on_real(s)) {
      std::vector<std::pair<std::string, std::uint32_t>> keys;
      for (const auto& row : tables.test.rows) keys.emplace_back(row.painting_id, row.patch_index);
      if (reference_test.empty()) reference_test = keys;
      CHECK(keys == reference_test);
    }
    if (s == Setting::kHybridM1) m1_train_rows = tables.train.size();
    if (s == Setting::kHybridM2) {
      CHECK(tables.train.size() == 4 * m1_train_rows);
    }
  }
  CHECK(!reference_test.empty());
}

TEST_CASE("M2 grids carry four times the M1 patches per painting") {
  const auto gf = grid_fixture({{"A", 3, 3}, {"B", 3, 3}}, 6, 0.5, 224, 1500);
  std::map<std::string, std::size_t> m1, m2;
  for (const auto& r : gf.fx.embeddings.records) m1[r.painting_id]++;
  for (const auto& r : gf.m2.records) m2[r.painting_id]++;
  for (const auto& [id, n] : m1) CHECK(m2[id] == 4 * n);
}

TEST_CASE("run_experiment: deterministic per-artist results") {
  const auto gf = grid_fixture({{"A", 4, 6}, {"B", 4, 6}, {"C", 4, 6}}, 7);
  auto cfg = quick(Setting::kHybridM1);
  const auto a = run_experiment(gf.fx.manifest, gf.grids(), cfg);
  cfg.threads = 3;
  const auto b = run_experiment(gf.fx.manifest, gf.grids(), cfg);
  REQUIRE(a.outcomes.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.outcomes[i].artist == b.outcomes[i].artist);
    CHECK(a.outcomes[i].eval == b.outcomes[i].eval);
    CHECK(gbdt::encode_model(a.outcomes[i].model) == gbdt::encode_model(b.outcomes[i].model));
    CHECK(a.outcomes[i].test_rows == a.test_keys.size());
  }
  CHECK(report_entries(a).size() == 3);
}

TEST_CASE("run_experiment: zero-gap hybrid AUC tracks the Bayes oracle") {
  // Large paintings give each hold-out a few hundred test patches.
  const auto gf = grid_fixture({{"A", 6, 8}, {"B", 6, 8}}, 8, 0.0, 1800, 2200, 2.0);
  ExperimentConfig base;
  const auto result = run_experiment(gf.fx.manifest, gf.grids(), config_for(Setting::kHybridM1, base));
  const double bayes = fixtures::bayes_auc(gf.fx.oracle, "A", {"B"}, Domain::kReal).value;
  for (const auto& o : result.outcomes) {
    CHECK(std::abs(o.eval.roc_auc - bayes) <= 0.02);
  }
}

TEST_CASE("run_suite: 35 cells, failures recorded, files written") {
  const auto gf = grid_fixture(fixtures::default_artists(7, 8), 9);
  const std::vector<Setting> all(kAllSettings.begin(), kAllSettings.end());
  const auto suite = run_suite(gf.fx.manifest, gf.grids(), all, quick(Setting::kRealOnly));
  CHECK(suite.report.artists().size() == 7);
  CHECK(suite.report.settings().size() == 5);
  CHECK(suite.report.failures.empty());
  CHECK(suite.seconds.size() == 5);
  std::size_t cells = 0;
  for (const auto& a : suite.report.artists())
    for (const auto& s : suite.report.settings()) cells += suite.report.cell(a, s) != nullptr;
  CHECK(cells == 35);

  const auto one = run_suite(gf.fx.manifest, gf.grids(), {Setting::kRealOnly}, quick(Setting::kRealOnly));
  CHECK(one.report.settings() == std::vector<std::string>{"real-only"});

  // A manifest without synthetic data fails the synthetic settings only.
  fixtures::FixtureSpec rs;
  rs.artists = {{"A", 4, 0}, {"B", 4, 0}};
  rs.dim = 4;
  const auto rfx = fixtures::generate(rs);
  const auto partial = run_suite(rfx.manifest, {&rfx.embeddings, nullptr},
                                 {Setting::kRealOnly, Setting::kSyntheticOnly}, quick(Setting::kRealOnly));
  CHECK(partial.report.failures.count("synthetic-only") == 1);
  CHECK(partial.report.cell("A", "real-only") != nullptr);

  attrib_forge::testing::TempDir tmp;
  write_experiment(suite.runs[0], tmp.path().string());
  CHECK(std::filesystem::exists(tmp.path() / "real-only" / "GD" / "model.agbm"));
  CHECK(std::filesystem::exists(tmp.path() / "real-only" / "JH" / "eval.csv"));
  write_report(suite.report, tmp.path().string());
  for (const char* name : {"report_auc.csv", "report_acc.csv", "report_precision.csv",
                           "report_recall.csv", "report_f1.csv", "summary.csv"}) {
    CHECK(std::filesystem::exists(tmp.path() / name));
  }
}

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

#ifndef ATTRIB_FORGE_HARNESS_HPP_
#define ATTRIB_FORGE_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "attrib_forge/data_io.hpp"
#include "attrib_forge/gbdt.hpp"
#include "attrib_forge/metrics.hpp"
#include "attrib_forge/patch_grid.hpp"

namespace attrib_forge {

enum class Setting : std::uint8_t {
  kRealOnly,
  kSyntheticOnly,
  kSyntheticToReal,
  kHybridM1,
  kHybridM2,
};

inline constexpr std::array<Setting, 5> kAllSettings = {
    Setting::kRealOnly, Setting::kSyntheticOnly, Setting::kSyntheticToReal,
    Setting::kHybridM1, Setting::kHybridM2};

// "real-only", "synthetic-only", "synthetic-to-real", "hybrid-m1", "hybrid-m2"
std::string_view setting_name(Setting setting);
Setting parse_setting(std::string_view text);
// Settings whose test set is the real hold-out painting of each artist.
bool tests_on_real(Setting setting);

struct ExperimentConfig {
  Setting setting = Setting::kRealOnly;
  GridSpec grid_train;
  GridSpec grid_test;
  gbdt::TrainConfig train;
  double valid_fraction = 0.2;
  std::uint32_t synthetic_test_count = 5;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  std::uint32_t threads = 1;

  void validate() const;
};

// Copy of `base` for `setting`: training grid M2 for Hybrid-M2 and M1 for
// every other setting. The test grid is left as configured.
ExperimentConfig config_for(Setting setting, const ExperimentConfig& base);

struct ArtistSplit {
  std::vector<std::string> train;
  std::vector<std::string> valid;
  std::vector<std::string> test;
};

struct SplitPlan {
  Setting setting = Setting::kRealOnly;
  std::vector<std::string> artists;
  std::map<std::string, ArtistSplit> per_artist;

  std::set<std::string> train_ids() const;
  std::set<std::string> valid_ids() const;
  std::set<std::string> test_ids() const;
};

// Real-test settings hold out one real painting per artist: the one named by
// a `#holdout` line, else the artist's first real entry. Synthetic-Only holds
// out the synthetic_test_count highest ordinals. Validation takes
// max(1, floor(valid_fraction * pool)) whole paintings per artist from the
// training pool, chosen by a seeded shuffle.
SplitPlan plan_splits(const DatasetManifest& manifest, const ExperimentConfig& cfg);

// Throws InvariantError if any painting sits in two roles.
void check_group_integrity(const SplitPlan& plan);

std::vector<std::uint8_t> label_one_vs_rest(const LabeledPatchTable& table,
                                            const std::string& target_artist);

struct GridEmbeddings {
  const EmbeddingSet* m1 = nullptr;
  const EmbeddingSet* m2 = nullptr;

  const EmbeddingSet& get(Strategy strategy) const;
};

// Split plan plus the train/validation/test patch tables it selects. Train
// and validation rows come from the training grid, test rows from the test
// grid. Construction runs the group-integrity and leakage checks.
struct ExperimentTables {
  SplitPlan plan;
  LabeledPatchTable train;
  LabeledPatchTable valid;
  LabeledPatchTable test;
};

ExperimentTables build_tables(const DatasetManifest& manifest,
                              const GridEmbeddings& embeddings,
                              const ExperimentConfig& cfg);

gbdt::BoostedModel train_artist(const ExperimentTables& tables, const std::string& artist,
                                const gbdt::TrainConfig& cfg);
EvalResult evaluate_artist(const ExperimentTables& tables, const std::string& artist,
                           const gbdt::BoostedModel& model, double threshold);

struct ArtistOutcome {
  std::string artist;
  EvalResult eval;
  gbdt::BoostedModel model;
  std::size_t train_rows = 0;
  std::size_t valid_rows = 0;
  std::size_t test_rows = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  SplitPlan plan;
  std::vector<ArtistOutcome> outcomes;  // manifest artist order
  // Test patches as (painting_id, patch_index), shared by every artist.
  std::vector<std::pair<std::string, std::uint32_t>> test_keys;
  std::size_t train_rows = 0;
};

ExperimentResult run_experiment(const DatasetManifest& manifest,
                                const GridEmbeddings& embeddings,
                                const ExperimentConfig& cfg);

struct SuiteResult {
  ExperimentReport report;
  std::vector<ExperimentResult> runs;
  std::vector<std::pair<Setting, double>> seconds;  // wall-clock per setting
};

// Runs each setting with the shared base config; a failing setting is
// recorded in report.failures and the rest still run.
SuiteResult run_suite(const DatasetManifest& manifest, const GridEmbeddings& embeddings,
                      const std::vector<Setting>& settings, const ExperimentConfig& base);

std::vector<ReportEntry> report_entries(const ExperimentResult& result);

// <dir>/<setting>/<artist>/{model.agbm,eval.csv}
void write_experiment(const ExperimentResult& result, const std::string& dir);
// report_auc.csv, report_acc.csv, report_precision.csv, report_recall.csv,
// report_f1.csv and summary.csv under `dir`.
void write_report(const ExperimentReport& report, const std::string& dir);

}  // namespace attrib_forge

#endif  // ATTRIB_FORGE_HARNESS_HPP_

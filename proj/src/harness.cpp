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

#include "attrib_forge/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "attrib_forge/error.hpp"
#include "attrib_forge/seeding.hpp"

namespace attrib_forge {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kValidStream = 0x76616C6964ull;

// Fisher-Yates with an explicit index draw, so the permutation does not
// depend on the standard library's shuffle.
void seeded_shuffle(std::vector<std::string>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

std::string stage_error(const std::string& artist, std::string_view stage,
                        const std::exception& err) {
  return "artist " + artist + ", stage " + std::string(stage) + ": " + err.what();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace

std::string_view setting_name(Setting setting) {
  switch (setting) {
    case Setting::kRealOnly: return "real-only";
    case Setting::kSyntheticOnly: return "synthetic-only";
    case Setting::kSyntheticToReal: return "synthetic-to-real";
    case Setting::kHybridM1: return "hybrid-m1";
    case Setting::kHybridM2: return "hybrid-m2";
  }
  return "unknown";
}

Setting parse_setting(std::string_view text) {
  for (auto s : kAllSettings) {
    if (text == setting_name(s)) return s;
  }
  throw DataError("unknown setting '" + std::string(text) +
                  "' (expected real-only, synthetic-only, synthetic-to-real, "
                  "hybrid-m1 or hybrid-m2)");
}

bool tests_on_real(Setting setting) { return setting != Setting::kSyntheticOnly; }

void ExperimentConfig::validate() const {
  attrib_forge::validate(grid_train);
  attrib_forge::validate(grid_test);
  train.validate();
  const auto expected =
      setting == Setting::kHybridM2 ? Strategy::kM2 : Strategy::kM1;
  if (grid_train.strategy != expected) {
    throw DataError(std::string("setting ") + std::string(setting_name(setting)) +
                    " trains on " + std::string(strategy_name(expected)) + " patches");
  }
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw DataError("valid_fraction must lie in (0, 1)");
  }
  if (synthetic_test_count < 1) throw DataError("synthetic_test_count must be >= 1");
  if (!std::isfinite(threshold)) throw DataError("threshold must be finite");
  if (threads < 1) throw DataError("threads must be >= 1");
}

ExperimentConfig config_for(Setting setting, const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.setting = setting;
  cfg.grid_train.strategy = setting == Setting::kHybridM2 ? Strategy::kM2 : Strategy::kM1;
  return cfg;
}

std::set<std::string> SplitPlan::train_ids() const {
  std::set<std::string> out;
  for (const auto& [artist, split] : per_artist) out.insert(split.train.begin(), split.train.end());
  return out;
}

std::set<std::string> SplitPlan::valid_ids() const {
  std::set<std::string> out;
  for (const auto& [artist, split] : per_artist) out.insert(split.valid.begin(), split.valid.end());
  return out;
}

std::set<std::string> SplitPlan::test_ids() const {
  std::set<std::string> out;
  for (const auto& [artist, split] : per_artist) out.insert(split.test.begin(), split.test.end());
  return out;
}

SplitPlan plan_splits(const DatasetManifest& manifest, const ExperimentConfig& cfg) {
  cfg.validate();
  validate(manifest);
  const Setting setting = cfg.setting;
  const bool needs_synthetic = setting != Setting::kRealOnly;
  if (needs_synthetic &&
      std::none_of(manifest.entries.begin(), manifest.entries.end(),
                   [](const PaintingEntry& e) { return e.domain == Domain::kSynthetic; })) {
    throw DataError(std::string("no synthetic data in manifest for setting ") +
                    std::string(setting_name(setting)));
  }
  if (manifest.artists.size() < 2) {
    throw DataError("one-vs-rest experiments need at least 2 artists");
  }

  SplitPlan plan;
  plan.setting = setting;
  plan.artists = manifest.artists;
  for (const auto& artist : manifest.artists) {
    std::vector<const PaintingEntry*> real;
    std::vector<const PaintingEntry*> synthetic;
    for (const auto& e : manifest.entries) {
      if (e.artist != artist) continue;
      (e.domain == Domain::kReal ? real : synthetic).push_back(&e);
    }
    std::sort(synthetic.begin(), synthetic.end(),
              [](const PaintingEntry* a, const PaintingEntry* b) {
                if (*a->synthetic_ordinal != *b->synthetic_ordinal) {
                  return *a->synthetic_ordinal < *b->synthetic_ordinal;
                }
                return a->painting_id < b->painting_id;
              });

    ArtistSplit split;
    std::vector<std::string> pool;
    if (tests_on_real(setting)) {
      const PaintingEntry* holdout = nullptr;
      for (const auto* e : real) {
        if (!manifest.holdout_ids.contains(e->painting_id)) continue;
        if (holdout != nullptr) {
          throw DataError("artist " + artist + " has more than one #holdout painting");
        }
        holdout = e;
      }
      if (holdout == nullptr && !real.empty()) holdout = real.front();
      if (holdout == nullptr) {
        throw DataError("missing hold-out designation: artist " + artist +
                        " has no real paintings");
      }
      split.test.push_back(holdout->painting_id);
      if (setting == Setting::kRealOnly || setting == Setting::kHybridM1 ||
          setting == Setting::kHybridM2) {
        for (const auto* e : real) {
          if (e != holdout) pool.push_back(e->painting_id);
        }
      }
      if (setting != Setting::kRealOnly) {
        if (synthetic.empty()) {
          throw DataError("no synthetic data for artist " + artist + " in setting " +
                          std::string(setting_name(setting)));
        }
        for (const auto* e : synthetic) pool.push_back(e->painting_id);
      }
    } else {
      if (synthetic.size() <= cfg.synthetic_test_count) {
        throw DataError("artist " + artist + " has " + std::to_string(synthetic.size()) +
                        " synthetic paintings; synthetic-only needs more than " +
                        std::to_string(cfg.synthetic_test_count));
      }
      const std::size_t cut = synthetic.size() - cfg.synthetic_test_count;
      for (std::size_t i = 0; i < synthetic.size(); ++i) {
        (i < cut ? pool : split.test).push_back(synthetic[i]->painting_id);
      }
    }

    const auto n_valid = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(cfg.valid_fraction * static_cast<double>(pool.size()))));
    if (pool.size() < n_valid + 1) {
      throw DataError("artist " + artist + " has " + std::to_string(pool.size()) +
                      " training painting(s): cannot form non-empty train and "
                      "validation sets");
    }
    seeded_shuffle(pool, mix_seed(mix_seed(cfg.seed, kValidStream), hash_name(artist)));
    split.valid.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_valid));
    split.train.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_valid), pool.end());
    std::sort(split.valid.begin(), split.valid.end());
    std::sort(split.train.begin(), split.train.end());
    plan.per_artist.emplace(artist, std::move(split));
  }
  check_group_integrity(plan);
  return plan;
}

void check_group_integrity(const SplitPlan& plan) {
  std::map<std::string, std::string> role_of;
  for (const auto& [artist, split] : plan.per_artist) {
    const std::pair<const char*, const std::vector<std::string>*> roles[] = {
        {"train", &split.train}, {"valid", &split.valid}, {"test", &split.test}};
    for (const auto& [role, ids] : roles) {
      for (const auto& id : *ids) {
        auto [it, inserted] = role_of.emplace(id, role);
        if (!inserted) {
          throw InvariantError("painting " + id + " appears in both " + it->second +
                               " and " + role + " (" +
                               std::string(setting_name(plan.setting)) + ")");
        }
      }
    }
  }
}

std::vector<std::uint8_t> label_one_vs_rest(const LabeledPatchTable& table,
                                            const std::string& target_artist) {
  std::vector<std::uint8_t> labels(table.size());
  bool seen = false;
  for (std::size_t i = 0; i < table.size(); ++i) {
    labels[i] = table.rows[i].artist == target_artist ? 1 : 0;
    seen = seen || labels[i];
  }
  if (!seen) throw DataError("unknown artist '" + target_artist + "' in patch table");
  return labels;
}

const EmbeddingSet& GridEmbeddings::get(Strategy strategy) const {
  const EmbeddingSet* set = strategy == Strategy::kM1 ? m1 : m2;
  if (set == nullptr) {
    throw DataError("no " + std::string(strategy_name(strategy)) + " embeddings available");
  }
  return *set;
}

ExperimentTables build_tables(const DatasetManifest& manifest,
                              const GridEmbeddings& embeddings,
                              const ExperimentConfig& cfg) {
  ExperimentTables tables;
  tables.plan = plan_splits(manifest, cfg);
  const auto& plan = tables.plan;

  const EmbeddingSet& train_set = embeddings.get(cfg.grid_train.strategy);
  const EmbeddingSet& test_set = embeddings.get(cfg.grid_test.strategy);
  const LabeledPatchTable train_source = join(manifest, train_set);
  const LabeledPatchTable test_source =
      &train_set == &test_set ? train_source : join(manifest, test_set);

  const auto train_ids = plan.train_ids();
  const auto valid_ids = plan.valid_ids();
  const auto test_ids = plan.test_ids();
  tables.train = select_paintings(train_source, train_ids);
  tables.valid = select_paintings(train_source, valid_ids);
  tables.test = select_paintings(test_source, test_ids);

  auto require_rows = [](const LabeledPatchTable& table, const std::set<std::string>& ids,
                         std::string_view role) {
    std::set<std::string> present;
    for (const auto& row : table.rows) present.insert(row.painting_id);
    for (const auto& id : ids) {
      if (!present.contains(id)) {
        throw DataError("no embeddings for " + std::string(role) + " painting " + id);
      }
    }
  };
  require_rows(tables.train, train_ids, "train");
  require_rows(tables.valid, valid_ids, "validation");
  require_rows(tables.test, test_ids, "test");

  // Leakage check over the rows actually fed to the model.
  for (const auto* table : {&tables.train, &tables.valid}) {
    for (const auto& row : table->rows) {
      if (test_ids.contains(row.painting_id)) {
        throw InvariantError("test painting " + row.painting_id + " leaked into training rows");
      }
    }
  }
  for (const auto& row : tables.train.rows) {
    if (valid_ids.contains(row.painting_id)) {
      throw InvariantError("validation painting " + row.painting_id +
                           " leaked into training rows");
    }
  }
  return tables;
}

gbdt::BoostedModel train_artist(const ExperimentTables& tables, const std::string& artist,
                                const gbdt::TrainConfig& cfg) {
  const auto train_labels = label_one_vs_rest(tables.train, artist);
  const auto valid_labels = label_one_vs_rest(tables.valid, artist);
  return gbdt::fit(tables.train.features, train_labels, tables.valid.features, valid_labels,
                   cfg);
}

EvalResult evaluate_artist(const ExperimentTables& tables, const std::string& artist,
                           const gbdt::BoostedModel& model, double threshold) {
  const auto labels = label_one_vs_rest(tables.test, artist);
  const auto scores = gbdt::predict_proba(model, tables.test.features);
  EvalResult eval = classify_eval(scores, labels, threshold);
  std::vector<std::string> groups;
  groups.reserve(tables.test.size());
  for (const auto& row : tables.test.rows) groups.push_back(row.painting_id);
  eval.painting_accuracy = painting_accuracy(scores, labels, groups, threshold);
  return eval;
}

ExperimentResult run_experiment(const DatasetManifest& manifest,
                                const GridEmbeddings& embeddings,
                                const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.config = cfg;
  const ExperimentTables tables = build_tables(manifest, embeddings, cfg);
  result.plan = tables.plan;
  result.train_rows = tables.train.size();
  for (const auto& row : tables.test.rows) {
    result.test_keys.emplace_back(row.painting_id, row.patch_index);
  }

  // Bins depend only on the training features, so all artists share them.
  const gbdt::PreparedData prepared =
      gbdt::prepare(tables.train.features, tables.valid.features, cfg.train.max_bins);
  const auto& artists = tables.plan.artists;
  const std::size_t n_artists = artists.size();
  result.outcomes.resize(n_artists);
  std::vector<std::exception_ptr> errors(n_artists);

  auto run_artist = [&](std::size_t a) {
    const std::string& artist = artists[a];
    ArtistOutcome& out = result.outcomes[a];
    out.artist = artist;
    std::string_view stage = "labels";
    try {
      const auto train_labels = label_one_vs_rest(tables.train, artist);
      const auto valid_labels = label_one_vs_rest(tables.valid, artist);
      stage = "fit";
      out.model = gbdt::fit(prepared, train_labels, valid_labels, cfg.train);
      stage = "evaluate";
      out.eval = evaluate_artist(tables, artist, out.model, cfg.threshold);
      out.train_rows = tables.train.size();
      out.valid_rows = tables.valid.size();
      out.test_rows = tables.test.size();
    } catch (const InvariantError& err) {
      errors[a] = std::make_exception_ptr(InvariantError(stage_error(artist, stage, err)));
    } catch (const std::exception& err) {
      errors[a] = std::make_exception_ptr(DataError(stage_error(artist, stage, err)));
    }
  };

  const std::size_t workers = std::min<std::size_t>(cfg.threads, n_artists);
  if (workers <= 1) {
    for (std::size_t a = 0; a < n_artists; ++a) run_artist(a);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t a = next++; a < n_artists; a = next++) run_artist(a);
      });
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return result;
}

std::vector<ReportEntry> report_entries(const ExperimentResult& result) {
  std::vector<ReportEntry> entries;
  for (const auto& o : result.outcomes) {
    entries.push_back({o.artist, std::string(setting_name(result.config.setting)), o.eval});
  }
  return entries;
}

SuiteResult run_suite(const DatasetManifest& manifest, const GridEmbeddings& embeddings,
                      const std::vector<Setting>& settings, const ExperimentConfig& base) {
  if (settings.empty()) throw DataError("suite needs at least one setting");
  SuiteResult suite;
  std::map<std::string, std::string> failures;
  for (auto setting : settings) {
    const auto start = std::chrono::steady_clock::now();
    try {
      suite.runs.push_back(run_experiment(manifest, embeddings, config_for(setting, base)));
    } catch (const InvariantError&) {
      throw;
    } catch (const std::exception& err) {
      failures[std::string(setting_name(setting))] = err.what();
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    suite.seconds.emplace_back(setting, elapsed.count());
  }
  // Artist-major so rows follow manifest order.
  std::vector<ReportEntry> entries;
  for (const auto& artist : manifest.artists) {
    for (const auto& run : suite.runs) {
      for (auto& e : report_entries(run)) {
        if (e.artist == artist) entries.push_back(std::move(e));
      }
    }
  }
  if (!entries.empty()) suite.report = aggregate_report(entries);
  suite.report.failures = std::move(failures);
  return suite;
}

void write_experiment(const ExperimentResult& result, const std::string& dir) {
  const fs::path setting_dir = fs::path(dir) / std::string(setting_name(result.config.setting));
  for (const auto& o : result.outcomes) {
    const fs::path artist_dir = setting_dir / o.artist;
    fs::create_directories(artist_dir);
    gbdt::save_model(o.model, (artist_dir / "model.agbm").string());
    write_text(artist_dir / "eval.csv",
               format_eval_csv({o.artist, std::string(setting_name(result.config.setting)), o.eval}));
  }
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  fs::create_directories(dir);
  const std::pair<const char*, Metric> files[] = {
      {"report_auc.csv", Metric::kRocAuc},
      {"report_acc.csv", Metric::kAccuracy},
      {"report_precision.csv", Metric::kPrecision},
      {"report_recall.csv", Metric::kRecall},
      {"report_f1.csv", Metric::kF1},
  };
  for (const auto& [name, metric] : files) {
    write_text(fs::path(dir) / name, heatmap_csv(report, metric));
  }
  write_text(fs::path(dir) / "summary.csv", summary_csv(report));
}

}  // namespace attrib_forge

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

#ifndef ATTRIB_FORGE_METRICS_HPP_
#define ATTRIB_FORGE_METRICS_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attrib_forge {

// Probability that a random positive outscores a random negative, ties
// counted as one half. Computed from midranks; throws DataError unless both
// classes are present.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool operator==(const ClassMetrics&) const = default;
};

struct EvalResult {
  double roc_auc = 0.0;  // NaN when the labels hold a single class
  double accuracy = 0.0;
  ClassMetrics positive;
  ClassMetrics negative;
  Confusion confusion;
  double threshold = 0.5;
  // Extension: fraction of test paintings whose mean patch probability lands
  // on the correct side of the threshold. Not a patch-level metric.
  std::optional<double> painting_accuracy;

  bool operator==(const EvalResult&) const = default;
};

// Predictions are [score >= threshold]. Zero denominators yield 0.
EvalResult classify_eval(std::span<const double> scores,
                         std::span<const std::uint8_t> labels,
                         double threshold = 0.5);

// Per-painting majority verdict from averaged patch probabilities.
// `groups[i]` identifies the painting of patch i; a painting's label is taken
// from its patches, which must agree.
double painting_accuracy(std::span<const double> scores,
                         std::span<const std::uint8_t> labels,
                         std::span<const std::string> groups, double threshold);

enum class Metric : std::uint8_t { kRocAuc, kPrecision, kRecall, kF1, kAccuracy };

inline constexpr std::array<Metric, 5> kAllMetrics = {
    Metric::kRocAuc, Metric::kPrecision, Metric::kRecall, Metric::kF1,
    Metric::kAccuracy};

std::string_view metric_name(Metric metric);
// Precision/recall/F1 refer to the positive (target artist) class.
double metric_value(const EvalResult& result, Metric metric);

struct ReportEntry {
  std::string artist;
  std::string setting;
  EvalResult result;
};

struct Extreme {
  std::string best_artist;
  double best = 0.0;
  std::string worst_artist;
  double worst = 0.0;
};

// Dense artist x setting view over a set of results. Row and column order is
// order of first appearance in the input.
class ExperimentReport {
 public:
  const std::vector<std::string>& artists() const { return artists_; }
  const std::vector<std::string>& settings() const { return settings_; }

  const EvalResult* cell(const std::string& artist, const std::string& setting) const;
  std::optional<double> value(const std::string& artist, const std::string& setting,
                              Metric metric) const;
  // Highest and lowest artist for one setting column; ties go to the artist
  // listed first. Empty when the column has no finite values.
  std::optional<Extreme> extreme(const std::string& setting, Metric metric) const;

  // Failures recorded by a suite run, keyed by setting.
  std::map<std::string, std::string> failures;

 private:
  friend ExperimentReport aggregate_report(const std::vector<ReportEntry>& entries);

  std::vector<std::string> artists_;
  std::vector<std::string> settings_;
  std::map<std::pair<std::string, std::string>, EvalResult> cells_;
};

// Throws DataError on empty input or on a repeated (artist, setting) pair.
ExperimentReport aggregate_report(const std::vector<ReportEntry>& entries);

// `artist,<setting>...` with one row per artist; missing cells are `NA`.
std::string heatmap_csv(const ExperimentReport& report, Metric metric);
// Best/worst artist per setting and metric, one row each.
std::string summary_csv(const ExperimentReport& report);

// Single-result file written next to each model; values at full precision.
std::string format_eval_csv(const ReportEntry& entry);
ReportEntry parse_eval_csv(std::string_view text);

}  // namespace attrib_forge

#endif  // ATTRIB_FORGE_METRICS_HPP_

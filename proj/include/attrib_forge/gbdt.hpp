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

#ifndef ATTRIB_FORGE_GBDT_HPP_
#define ATTRIB_FORGE_GBDT_HPP_

// Histogram gradient-boosted decision trees for binary classification.
//
// Features are quantile-binned once on the training rows; every tree splits
// on (feature, bin) pairs, sending rows with bin <= threshold to the left.
// Trees grow leaf-wise: the leaf with the largest second-order gain is split
// next until num_leaves is reached or no split has positive gain.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attrib_forge/data_io.hpp"

namespace attrib_forge::gbdt {

enum class ClassWeighting : std::uint8_t { kBalanced, kNone };

std::string_view class_weighting_name(ClassWeighting mode);
ClassWeighting parse_class_weighting(std::string_view text);

struct TrainConfig {
  double learning_rate = 0.05;
  std::uint32_t max_rounds = 1000;
  std::uint32_t num_leaves = 31;
  std::uint32_t max_bins = 256;
  std::uint32_t min_samples_leaf = 20;
  double l2_lambda = 1.0;
  std::uint32_t early_stop_patience = 50;
  ClassWeighting class_weighting = ClassWeighting::kBalanced;
  // Recorded for provenance; training itself draws no random numbers.
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct ClassWeights {
  double positive = 1.0;
  double negative = 1.0;
};

// Balanced: w_c = N / (2 N_c). Throws DataError("degenerate labels") when
// only one class is present.
ClassWeights class_weights(std::span<const std::uint8_t> labels,
                           ClassWeighting mode = ClassWeighting::kBalanced);

// Per-feature ascending split thresholds. Feature j has edges[j].size() + 1
// bins; bin(x) is the index of the first edge >= x.
using BinEdges = std::vector<std::vector<double>>;

// Column-major bin indices.
struct BinnedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint16_t> bins;

  std::uint16_t at(std::size_t row, std::size_t col) const {
    return bins[col * rows + row];
  }
  std::span<const std::uint16_t> column(std::size_t col) const {
    return {bins.data() + col * rows, rows};
  }
};

inline constexpr std::uint32_t kMaxBinsLimit = 65536;

std::uint16_t bin_index(std::span<const double> edges, double value);

// Edges for one feature column. With at most max_bins distinct values every
// value gets its own bin; otherwise max_bins bins are cut at count quantiles
// of the sorted values. Edges sit midway between neighbouring distinct values.
std::vector<double> quantile_edges(std::vector<float> values, std::uint32_t max_bins);

BinEdges compute_bin_edges(const FeatureMatrix& features, std::uint32_t max_bins);
BinnedMatrix apply_bins(const FeatureMatrix& features, const BinEdges& edges);
std::pair<BinnedMatrix, BinEdges> bin_features(const FeatureMatrix& features,
                                               std::uint32_t max_bins);

struct TreeNode {
  bool is_leaf = true;
  std::uint32_t feature = 0;
  std::uint32_t bin_threshold = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // learning-rate-scaled log-odds increment (leaves)

  bool operator==(const TreeNode&) const = default;
};

// nodes[0] is the root; children always follow their parent.
struct Tree {
  std::vector<TreeNode> nodes;

  std::size_t leaf_count() const;
  double predict_binned(const BinnedMatrix& binned, std::size_t row) const;
  double predict(std::span<const float> features, const BinEdges& edges) const;
  bool operator==(const Tree&) const = default;
};

struct RoundLog {
  double valid_auc = 0.0;
  double valid_logloss = 0.0;
  bool operator==(const RoundLog&) const = default;
};

struct BoostedModel {
  TrainConfig config;
  double base_score = 0.0;
  std::vector<Tree> trees;
  BinEdges bin_edges;
  std::uint32_t best_round = 0;
  // One entry per boosting round actually run, including rounds after
  // best_round whose trees were discarded.
  std::vector<RoundLog> train_log;

  std::size_t dim() const { return bin_edges.size(); }
  bool operator==(const BoostedModel&) const = default;
};

double sigmoid(double raw);

// Unweighted logistic loss of one sample, computed from the raw score.
double logistic_loss(double raw, std::uint8_t label);

struct GradHess {
  double grad = 0.0;
  double hess = 0.0;
};

// Derivatives of weight * logistic_loss w.r.t. the raw score:
// g = w (p - y), h = w p (1 - p).
GradHess logistic_grad_hess(double raw, std::uint8_t label, double weight);

double split_gain(double grad_left, double hess_left, double grad_right,
                  double hess_right, double lambda);

struct SplitCandidate {
  bool found = false;
  std::uint32_t feature = 0;
  std::uint32_t bin = 0;
  double gain = 0.0;
  double grad_left = 0.0;
  double hess_left = 0.0;
  std::uint32_t count_left = 0;
};

// Best (feature, bin) split over `rows` with strictly positive gain, honoring
// min_samples_leaf on both sides. Ties keep the lowest feature, then bin.
SplitCandidate find_best_split(const BinnedMatrix& binned, const BinEdges& edges,
                               std::span<const std::uint32_t> rows,
                               std::span<const double> grad,
                               std::span<const double> hess,
                               const TrainConfig& cfg);

// Training and validation rows binned with edges from the training rows.
struct PreparedData {
  BinEdges edges;
  BinnedMatrix train;
  BinnedMatrix valid;
};

PreparedData prepare(const FeatureMatrix& train, const FeatureMatrix& valid,
                     std::uint32_t max_bins);

BoostedModel fit(const PreparedData& data, std::span<const std::uint8_t> train_labels,
                 std::span<const std::uint8_t> valid_labels, const TrainConfig& cfg);

BoostedModel fit(const FeatureMatrix& train, std::span<const std::uint8_t> train_labels,
                 const FeatureMatrix& valid, std::span<const std::uint8_t> valid_labels,
                 const TrainConfig& cfg);

double predict_raw(const BoostedModel& model, std::span<const float> features);
double predict_proba(const BoostedModel& model, std::span<const float> features);
std::vector<double> predict_proba(const BoostedModel& model, const FeatureMatrix& features);

inline constexpr char kModelMagic[4] = {'A', 'G', 'B', 'M'};
inline constexpr std::uint16_t kModelVersion = 1;

std::vector<std::uint8_t> encode_model(const BoostedModel& model);
BoostedModel decode_model(std::span<const std::uint8_t> bytes);
void save_model(const BoostedModel& model, const std::string& path);
BoostedModel load_model(const std::string& path);

}  // namespace attrib_forge::gbdt

#endif  // ATTRIB_FORGE_GBDT_HPP_

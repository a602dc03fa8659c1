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

#include "attrib_forge/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "attrib_forge/binary_io.hpp"
#include "attrib_forge/error.hpp"
#include "attrib_forge/metrics.hpp"

namespace attrib_forge::gbdt {
namespace {

struct HistBin {
  double grad = 0.0;
  double hess = 0.0;
  std::uint32_t count = 0;
};

using Histogram = std::vector<HistBin>;

std::vector<std::size_t> feature_offsets(const BinEdges& edges) {
  std::vector<std::size_t> offsets(edges.size() + 1, 0);
  for (std::size_t f = 0; f < edges.size(); ++f) {
    offsets[f + 1] = offsets[f] + edges[f].size() + 1;
  }
  return offsets;
}

Histogram build_histogram(const BinnedMatrix& binned,
                          const std::vector<std::size_t>& offsets,
                          std::span<const std::uint32_t> rows,
                          std::span<const double> grad, std::span<const double> hess) {
  Histogram hist(offsets.back());
  for (std::size_t f = 0; f < binned.cols; ++f) {
    auto column = binned.column(f);
    HistBin* base = hist.data() + offsets[f];
    for (auto r : rows) {
      HistBin& b = base[column[r]];
      b.grad += grad[r];
      b.hess += hess[r];
      ++b.count;
    }
  }
  return hist;
}

SplitCandidate best_split_from_histogram(const Histogram& hist,
                                         const std::vector<std::size_t>& offsets,
                                         double grad_total, double hess_total,
                                         std::uint32_t count_total,
                                         const TrainConfig& cfg) {
  SplitCandidate best;
  const double lambda = cfg.l2_lambda;
  for (std::size_t f = 0; f + 1 < offsets.size(); ++f) {
    const std::size_t n_bins = offsets[f + 1] - offsets[f];
    double grad_left = 0.0;
    double hess_left = 0.0;
    std::uint32_t count_left = 0;
    for (std::size_t b = 0; b + 1 < n_bins; ++b) {
      const HistBin& bin = hist[offsets[f] + b];
      grad_left += bin.grad;
      hess_left += bin.hess;
      count_left += bin.count;
      const std::uint32_t count_right = count_total - count_left;
      if (count_left < cfg.min_samples_leaf) continue;
      if (count_right < cfg.min_samples_leaf) break;
      const double grad_right = grad_total - grad_left;
      const double hess_right = hess_total - hess_left;
      if (hess_left + lambda <= 0.0 || hess_right + lambda <= 0.0) continue;
      const double gain = split_gain(grad_left, hess_left, grad_right, hess_right, lambda);
      if (gain > best.gain) {
        best.found = true;
        best.feature = static_cast<std::uint32_t>(f);
        best.bin = static_cast<std::uint32_t>(b);
        best.gain = gain;
        best.grad_left = grad_left;
        best.hess_left = hess_left;
        best.count_left = count_left;
      }
    }
  }
  return best;
}

double leaf_value(double grad, double hess, const TrainConfig& cfg) {
  const double denom = hess + cfg.l2_lambda;
  if (denom <= 0.0) return 0.0;
  return -cfg.learning_rate * grad / denom;
}

struct GrowLeaf {
  std::int32_t node = 0;
  std::vector<std::uint32_t> rows;
  Histogram hist;
  double grad = 0.0;
  double hess = 0.0;
  SplitCandidate split;
};

// Grows one tree and reports, for every leaf, the training rows it holds.
Tree grow_tree(const BinnedMatrix& binned, const std::vector<std::size_t>& offsets,
               std::vector<std::uint32_t> all_rows, std::span<const double> grad,
               std::span<const double> hess, const TrainConfig& cfg,
               std::vector<std::pair<std::int32_t, std::vector<std::uint32_t>>>& leaf_rows) {
  Tree tree;
  tree.nodes.emplace_back();

  std::vector<GrowLeaf> leaves;
  {
    GrowLeaf root;
    root.rows = std::move(all_rows);
    for (auto r : root.rows) {
      root.grad += grad[r];
      root.hess += hess[r];
    }
    root.hist = build_histogram(binned, offsets, root.rows, grad, hess);
    root.split = best_split_from_histogram(root.hist, offsets, root.grad, root.hess,
                                           static_cast<std::uint32_t>(root.rows.size()),
                                           cfg);
    leaves.push_back(std::move(root));
  }

  while (leaves.size() < cfg.num_leaves) {
    std::size_t pick = leaves.size();
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const auto& s = leaves[i].split;
      if (!s.found) continue;
      if (pick == leaves.size() || s.gain > leaves[pick].split.gain ||
          (s.gain == leaves[pick].split.gain && leaves[i].node < leaves[pick].node)) {
        pick = i;
      }
    }
    if (pick == leaves.size()) break;

    GrowLeaf parent = std::move(leaves[pick]);
    const SplitCandidate& s = parent.split;
    auto column = binned.column(s.feature);

    GrowLeaf left;
    GrowLeaf right;
    left.rows.reserve(s.count_left);
    right.rows.reserve(parent.rows.size() - s.count_left);
    for (auto r : parent.rows) {
      (column[r] <= s.bin ? left.rows : right.rows).push_back(r);
    }
    left.grad = s.grad_left;
    left.hess = s.hess_left;
    right.grad = parent.grad - s.grad_left;
    right.hess = parent.hess - s.hess_left;

    GrowLeaf& small = left.rows.size() <= right.rows.size() ? left : right;
    GrowLeaf& large = left.rows.size() <= right.rows.size() ? right : left;
    small.hist = build_histogram(binned, offsets, small.rows, grad, hess);
    large.hist = std::move(parent.hist);
    for (std::size_t b = 0; b < large.hist.size(); ++b) {
      large.hist[b].grad -= small.hist[b].grad;
      large.hist[b].hess -= small.hist[b].hess;
      large.hist[b].count -= small.hist[b].count;
    }

    left.node = static_cast<std::int32_t>(tree.nodes.size());
    right.node = left.node + 1;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    TreeNode& p = tree.nodes[static_cast<std::size_t>(parent.node)];
    p.is_leaf = false;
    p.feature = s.feature;
    p.bin_threshold = s.bin;
    p.left = left.node;
    p.right = right.node;

    for (GrowLeaf* child : {&left, &right}) {
      child->split = best_split_from_histogram(
          child->hist, offsets, child->grad, child->hess,
          static_cast<std::uint32_t>(child->rows.size()), cfg);
    }
    leaves[pick] = std::move(left);
    leaves.push_back(std::move(right));
  }

  leaf_rows.clear();
  for (auto& leaf : leaves) {
    tree.nodes[static_cast<std::size_t>(leaf.node)].value =
        leaf_value(leaf.grad, leaf.hess, cfg);
    leaf_rows.emplace_back(leaf.node, std::move(leaf.rows));
  }
  return tree;
}

void check_finite(const FeatureMatrix& m, const char* what) {
  for (float v : m.values) {
    if (!std::isfinite(v)) {
      throw DataError(std::string("non-finite feature value in ") + what);
    }
  }
}

void check_labels(std::span<const std::uint8_t> labels, std::size_t rows,
                  const char* what) {
  if (labels.size() != rows) {
    throw DataError(std::string(what) + ": " + std::to_string(labels.size()) +
                    " labels for " + std::to_string(rows) + " rows");
  }
  for (auto y : labels) {
    if (y > 1) throw DataError(std::string(what) + ": labels must be 0 or 1");
  }
}

double mean_logloss(std::span<const double> raw, std::span<const std::uint8_t> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) total += logistic_loss(raw[i], labels[i]);
  return total / static_cast<double>(raw.size());
}

[[noreturn]] void corrupt(const std::string& what) {
  throw FormatError("corrupt model file: " + what);
}

}  // namespace

std::string_view class_weighting_name(ClassWeighting mode) {
  return mode == ClassWeighting::kBalanced ? "balanced" : "none";
}

ClassWeighting parse_class_weighting(std::string_view text) {
  if (text == "balanced") return ClassWeighting::kBalanced;
  if (text == "none") return ClassWeighting::kNone;
  throw DataError("unknown class weighting '" + std::string(text) +
                  "' (expected balanced or none)");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw DataError("learning_rate must lie in (0, 1]");
  }
  if (max_rounds < 1) throw DataError("max_rounds must be >= 1");
  if (num_leaves < 2) throw DataError("num_leaves must be >= 2");
  if (max_bins < 2 || max_bins > kMaxBinsLimit) {
    throw DataError("max_bins must lie in [2, 65536]");
  }
  if (min_samples_leaf < 1) throw DataError("min_samples_leaf must be >= 1");
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
    throw DataError("l2_lambda must be a finite value >= 0");
  }
  if (early_stop_patience < 1) throw DataError("early_stop_patience must be >= 1");
}

ClassWeights class_weights(std::span<const std::uint8_t> labels, ClassWeighting mode) {
  std::size_t n_pos = 0;
  for (auto y : labels) n_pos += (y != 0);
  const std::size_t n = labels.size();
  if (n_pos == 0 || n_pos == n) throw DataError("degenerate labels");
  if (mode == ClassWeighting::kNone) return {1.0, 1.0};
  const double total = static_cast<double>(n);
  return {total / (2.0 * static_cast<double>(n_pos)),
          total / (2.0 * static_cast<double>(n - n_pos))};
}

std::uint16_t bin_index(std::span<const double> edges, double value) {
  auto it = std::lower_bound(edges.begin(), edges.end(), value);
  return static_cast<std::uint16_t>(it - edges.begin());
}

std::vector<double> quantile_edges(std::vector<float> values, std::uint32_t max_bins) {
  if (max_bins < 2 || max_bins > kMaxBinsLimit) {
    throw DataError("max_bins must lie in [2, 65536]");
  }
  std::sort(values.begin(), values.end());
  std::vector<double> uniques;
  std::vector<std::size_t> cumulative;  // rows with value <= uniques[k]
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (uniques.empty() || values[i] != uniques.back()) {
      uniques.push_back(values[i]);
      cumulative.push_back(0);
    }
    cumulative.back() = i + 1;
  }
  const std::size_t n_unique = uniques.size();
  std::vector<double> edges;
  if (n_unique <= 1) return edges;
  auto midpoint = [&](std::size_t gap) {
    return uniques[gap] + (uniques[gap + 1] - uniques[gap]) / 2.0;
  };
  if (n_unique <= max_bins) {
    for (std::size_t g = 0; g + 1 < n_unique; ++g) edges.push_back(midpoint(g));
    return edges;
  }
  // Pick max_bins - 1 distinct gaps between neighbouring unique values, each
  // at the first gap whose cumulative count reaches the j-th quantile, while
  // leaving room for the remaining cuts.
  const double n = static_cast<double>(values.size());
  const std::size_t last_gap = n_unique - 2;
  std::size_t prev = 0;
  for (std::uint32_t j = 1; j < max_bins; ++j) {
    const double target = n * static_cast<double>(j) / static_cast<double>(max_bins);
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target,
                               [](std::size_t c, double t) { return static_cast<double>(c) < t; });
    std::size_t gap = static_cast<std::size_t>(it - cumulative.begin());
    if (j > 1) gap = std::max(gap, prev + 1);
    gap = std::min(gap, last_gap - (max_bins - 1 - j));
    edges.push_back(midpoint(gap));
    prev = gap;
  }
  return edges;
}

BinEdges compute_bin_edges(const FeatureMatrix& features, std::uint32_t max_bins) {
  if (features.rows == 0) throw DataError("cannot bin an empty table");
  check_finite(features, "training features");
  BinEdges edges(features.cols);
  std::vector<float> column(features.rows);
  for (std::size_t f = 0; f < features.cols; ++f) {
    for (std::size_t i = 0; i < features.rows; ++i) column[i] = features.at(i, f);
    edges[f] = quantile_edges(column, max_bins);
  }
  return edges;
}

BinnedMatrix apply_bins(const FeatureMatrix& features, const BinEdges& edges) {
  if (features.cols != edges.size()) {
    throw DataError("feature dim " + std::to_string(features.cols) +
                    " does not match binning dim " + std::to_string(edges.size()));
  }
  check_finite(features, "features");
  BinnedMatrix out;
  out.rows = features.rows;
  out.cols = features.cols;
  out.bins.resize(out.rows * out.cols);
  for (std::size_t f = 0; f < out.cols; ++f) {
    for (std::size_t i = 0; i < out.rows; ++i) {
      out.bins[f * out.rows + i] = bin_index(edges[f], features.at(i, f));
    }
  }
  return out;
}

std::pair<BinnedMatrix, BinEdges> bin_features(const FeatureMatrix& features,
                                               std::uint32_t max_bins) {
  auto edges = compute_bin_edges(features, max_bins);
  auto binned = apply_bins(features, edges);
  return {std::move(binned), std::move(edges)};
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf; }));
}

double Tree::predict_binned(const BinnedMatrix& binned, std::size_t row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(binned.at(row, n.feature) <= n.bin_threshold ? n.left
                                                                               : n.right);
  }
  return nodes[i].value;
}

double Tree::predict(std::span<const float> features, const BinEdges& edges) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf) {
    const auto& n = nodes[i];
    const auto bin = bin_index(edges[n.feature], features[n.feature]);
    i = static_cast<std::size_t>(bin <= n.bin_threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

double sigmoid(double raw) {
  if (raw >= 0.0) return 1.0 / (1.0 + std::exp(-raw));
  const double e = std::exp(raw);
  return e / (1.0 + e);
}

double logistic_loss(double raw, std::uint8_t label) {
  // softplus(-raw) for positives, softplus(raw) for negatives
  const double z = label != 0 ? -raw : raw;
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

GradHess logistic_grad_hess(double raw, std::uint8_t label, double weight) {
  const double p = sigmoid(raw);
  const double y = label != 0 ? 1.0 : 0.0;
  return {weight * (p - y), weight * p * (1.0 - p)};
}

double split_gain(double grad_left, double hess_left, double grad_right,
                  double hess_right, double lambda) {
  const double g = grad_left + grad_right;
  const double h = hess_left + hess_right;
  return grad_left * grad_left / (hess_left + lambda) +
         grad_right * grad_right / (hess_right + lambda) - g * g / (h + lambda);
}

SplitCandidate find_best_split(const BinnedMatrix& binned, const BinEdges& edges,
                               std::span<const std::uint32_t> rows,
                               std::span<const double> grad, std::span<const double> hess,
                               const TrainConfig& cfg) {
  const auto offsets = feature_offsets(edges);
  double g = 0.0;
  double h = 0.0;
  for (auto r : rows) {
    g += grad[r];
    h += hess[r];
  }
  auto hist = build_histogram(binned, offsets, rows, grad, hess);
  return best_split_from_histogram(hist, offsets, g, h,
                                   static_cast<std::uint32_t>(rows.size()), cfg);
}

PreparedData prepare(const FeatureMatrix& train, const FeatureMatrix& valid,
                     std::uint32_t max_bins) {
  if (train.cols != valid.cols) {
    throw DataError("train dim " + std::to_string(train.cols) +
                    " does not match validation dim " + std::to_string(valid.cols));
  }
  PreparedData data;
  data.edges = compute_bin_edges(train, max_bins);
  data.train = apply_bins(train, data.edges);
  data.valid = apply_bins(valid, data.edges);
  return data;
}

BoostedModel fit(const PreparedData& data, std::span<const std::uint8_t> train_labels,
                 std::span<const std::uint8_t> valid_labels, const TrainConfig& cfg) {
  cfg.validate();
  check_labels(train_labels, data.train.rows, "training set");
  check_labels(valid_labels, data.valid.rows, "validation set");
  if (data.valid.rows == 0) throw DataError("validation set is empty");
  if (data.train.cols != data.valid.cols || data.train.cols != data.edges.size()) {
    throw DataError("train/validation dim mismatch");
  }
  const auto weights = class_weights(train_labels, cfg.class_weighting);
  {
    std::size_t valid_pos = 0;
    for (auto y : valid_labels) valid_pos += y;
    if (valid_pos == 0 || valid_pos == valid_labels.size()) {
      throw DataError("validation set must contain both classes");
    }
  }

  const std::size_t n = data.train.rows;
  std::vector<double> w(n);
  double w_pos = 0.0;
  double w_neg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = train_labels[i] ? weights.positive : weights.negative;
    (train_labels[i] ? w_pos : w_neg) += w[i];
  }

  BoostedModel model;
  model.config = cfg;
  model.bin_edges = data.edges;
  model.base_score = std::log(w_pos / w_neg);

  const auto offsets = feature_offsets(data.edges);
  std::vector<double> raw_train(n, model.base_score);
  std::vector<double> raw_valid(data.valid.rows, model.base_score);
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  std::vector<std::uint32_t> all_rows(n);
  for (std::size_t i = 0; i < n; ++i) all_rows[i] = static_cast<std::uint32_t>(i);
  std::vector<std::pair<std::int32_t, std::vector<std::uint32_t>>> leaf_rows;

  double best_auc = -std::numeric_limits<double>::infinity();
  double best_loss = std::numeric_limits<double>::infinity();
  std::uint32_t stale_rounds = 0;
  std::uint32_t selected_round = 0;
  RoundLog selected{-std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};

  for (std::uint32_t round = 1; round <= cfg.max_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto gh = logistic_grad_hess(raw_train[i], train_labels[i], w[i]);
      grad[i] = gh.grad;
      hess[i] = gh.hess;
    }
    Tree tree = grow_tree(data.train, offsets, all_rows, grad, hess, cfg, leaf_rows);
    for (const auto& [node, rows] : leaf_rows) {
      const double v = tree.nodes[static_cast<std::size_t>(node)].value;
      for (auto r : rows) raw_train[r] += v;
    }
    for (std::size_t i = 0; i < data.valid.rows; ++i) {
      raw_valid[i] += tree.predict_binned(data.valid, i);
    }
    model.trees.push_back(std::move(tree));

    RoundLog log{roc_auc(raw_valid, valid_labels), mean_logloss(raw_valid, valid_labels)};
    model.train_log.push_back(log);

    // Selection: best AUC, then lower log-loss, then the earlier round.
    if (log.valid_auc > selected.valid_auc ||
        (log.valid_auc == selected.valid_auc && log.valid_logloss < selected.valid_logloss)) {
      selected = log;
      selected_round = round;
    }
    // Patience resets when either metric reaches a new best.
    bool improved = false;
    if (log.valid_auc > best_auc) {
      best_auc = log.valid_auc;
      improved = true;
    }
    if (log.valid_logloss < best_loss) {
      best_loss = log.valid_logloss;
      improved = true;
    }
    stale_rounds = improved ? 0 : stale_rounds + 1;
    if (stale_rounds >= cfg.early_stop_patience) break;
  }

  model.trees.resize(selected_round);
  model.best_round = selected_round;
  return model;
}

BoostedModel fit(const FeatureMatrix& train, std::span<const std::uint8_t> train_labels,
                 const FeatureMatrix& valid, std::span<const std::uint8_t> valid_labels,
                 const TrainConfig& cfg) {
  cfg.validate();
  return fit(prepare(train, valid, cfg.max_bins), train_labels, valid_labels, cfg);
}

double predict_raw(const BoostedModel& model, std::span<const float> features) {
  if (features.size() != model.dim()) {
    throw DataError("feature vector has " + std::to_string(features.size()) +
                    " components, model expects " + std::to_string(model.dim()));
  }
  double raw = model.base_score;
  for (const auto& tree : model.trees) raw += tree.predict(features, model.bin_edges);
  return raw;
}

double predict_proba(const BoostedModel& model, std::span<const float> features) {
  return sigmoid(predict_raw(model, features));
}

std::vector<double> predict_proba(const BoostedModel& model, const FeatureMatrix& features) {
  std::vector<double> out(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i) out[i] = predict_proba(model, features.row(i));
  return out;
}

std::vector<std::uint8_t> encode_model(const BoostedModel& model) {
  binary::Writer w;
  w.put_bytes(std::string_view(kModelMagic, 4));
  w.put(kModelVersion);
  const auto& c = model.config;
  w.put_f64(c.learning_rate);
  w.put(c.max_rounds);
  w.put(c.num_leaves);
  w.put(c.max_bins);
  w.put(c.min_samples_leaf);
  w.put_f64(c.l2_lambda);
  w.put(c.early_stop_patience);
  w.put(static_cast<std::uint8_t>(c.class_weighting));
  w.put(c.seed);
  w.put_f64(model.base_score);
  w.put(static_cast<std::uint32_t>(model.bin_edges.size()));
  for (const auto& edges : model.bin_edges) {
    w.put(static_cast<std::uint32_t>(edges.size()));
    for (double e : edges) w.put_f64(e);
  }
  w.put(model.best_round);
  w.put(static_cast<std::uint32_t>(model.trees.size()));
  for (const auto& tree : model.trees) {
    w.put(static_cast<std::uint32_t>(tree.nodes.size()));
    for (const auto& node : tree.nodes) {
      w.put(static_cast<std::uint8_t>(node.is_leaf ? 1 : 0));
      if (node.is_leaf) {
        w.put_f64(node.value);
      } else {
        w.put(node.feature);
        w.put(node.bin_threshold);
        w.put(static_cast<std::uint32_t>(node.left));
        w.put(static_cast<std::uint32_t>(node.right));
      }
    }
  }
  w.put(static_cast<std::uint32_t>(model.train_log.size()));
  for (const auto& log : model.train_log) {
    w.put_f64(log.valid_auc);
    w.put_f64(log.valid_logloss);
  }
  return w.release();
}

BoostedModel decode_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kModelMagic, kModelMagic + 4, bytes.begin())) {
    throw FormatError("bad magic: not a model file");
  }
  binary::Reader r(bytes);
  BoostedModel m;
  try {
    r.get_bytes(4);
    const auto version = r.get<std::uint16_t>();
    if (version != kModelVersion) {
      throw FormatError("model file version " + std::to_string(version) +
                        " is not supported (expected " + std::to_string(kModelVersion) + ")");
    }
    auto& c = m.config;
    c.learning_rate = r.get_f64();
    c.max_rounds = r.get<std::uint32_t>();
    c.num_leaves = r.get<std::uint32_t>();
    c.max_bins = r.get<std::uint32_t>();
    c.min_samples_leaf = r.get<std::uint32_t>();
    c.l2_lambda = r.get_f64();
    c.early_stop_patience = r.get<std::uint32_t>();
    const auto weighting = r.get<std::uint8_t>();
    if (weighting > 1) corrupt("unknown class weighting code");
    c.class_weighting = static_cast<ClassWeighting>(weighting);
    c.seed = r.get<std::uint64_t>();
    m.base_score = r.get_f64();
    if (!std::isfinite(m.base_score)) corrupt("non-finite base score");

    const auto n_features = r.get<std::uint32_t>();
    if (n_features > r.remaining() / 4) corrupt("feature count exceeds file size");
    m.bin_edges.resize(n_features);
    for (auto& edges : m.bin_edges) {
      const auto n_edges = r.get<std::uint32_t>();
      if (n_edges >= kMaxBinsLimit || n_edges > r.remaining() / 8) corrupt("bad edge count");
      edges.resize(n_edges);
      for (auto& e : edges) e = r.get_f64();
      for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i - 1] < edges[i])) corrupt("bin edges not strictly increasing");
      }
    }

    m.best_round = r.get<std::uint32_t>();
    const auto n_trees = r.get<std::uint32_t>();
    if (n_trees != m.best_round) corrupt("tree count differs from best_round");
    if (n_trees > r.remaining() / 4) corrupt("tree count exceeds file size");
    m.trees.resize(n_trees);
    for (auto& tree : m.trees) {
      const auto n_nodes = r.get<std::uint32_t>();
      if (n_nodes == 0 || n_nodes > r.remaining() / 9) corrupt("bad node count");
      tree.nodes.resize(n_nodes);
      std::vector<std::uint8_t> referenced(n_nodes, 0);
      for (std::uint32_t i = 0; i < n_nodes; ++i) {
        auto& node = tree.nodes[i];
        node.is_leaf = r.get<std::uint8_t>() != 0;
        if (node.is_leaf) {
          node.value = r.get_f64();
          if (!std::isfinite(node.value)) corrupt("non-finite leaf value");
          continue;
        }
        node.feature = r.get<std::uint32_t>();
        node.bin_threshold = r.get<std::uint32_t>();
        const auto left = r.get<std::uint32_t>();
        const auto right = r.get<std::uint32_t>();
        if (node.feature >= n_features) corrupt("split feature out of range");
        if (node.bin_threshold >= m.bin_edges[node.feature].size()) {
          corrupt("split bin out of range");
        }
        if (left <= i || right <= i || left >= n_nodes || right >= n_nodes || left == right) {
          corrupt("bad child index");
        }
        if (referenced[left]++ || referenced[right]++) corrupt("node has two parents");
        node.left = static_cast<std::int32_t>(left);
        node.right = static_cast<std::int32_t>(right);
      }
      for (std::uint32_t i = 1; i < n_nodes; ++i) {
        if (!referenced[i]) corrupt("unreachable node");
      }
    }

    const auto n_log = r.get<std::uint32_t>();
    if (n_log > r.remaining() / 16) corrupt("log length exceeds file size");
    if (n_log < m.best_round) corrupt("training log shorter than best_round");
    m.train_log.resize(n_log);
    for (auto& log : m.train_log) {
      log.valid_auc = r.get_f64();
      log.valid_logloss = r.get_f64();
    }
  } catch (const FormatError& err) {
    const std::string what = err.what();
    if (what.starts_with("corrupt model file") || what.starts_with("model file version")) {
      throw;
    }
    corrupt(what);
  }
  if (!r.at_end()) corrupt("trailing bytes after training log");
  return m;
}

void save_model(const BoostedModel& model, const std::string& path) {
  binary::write_file(path, encode_model(model));
}

BoostedModel load_model(const std::string& path) {
  return decode_model(binary::read_file(path));
}

}  // namespace attrib_forge::gbdt

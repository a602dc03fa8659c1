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

#include "attrib_forge/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

#include "attrib_forge/error.hpp"

namespace attrib_forge {
namespace {

using nlohmann::json;

enum class Kind { kString, kInteger, kReal };

struct KeyBinding {
  ConfigKey info;
  Kind kind;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
T parse_unsigned(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw DataError("config key " + key + ": expected a non-negative integer, got '" +
                    text + "'");
  }
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw DataError("config key " + key + ": expected a number, got '" + text + "'");
  }
  return value;
}

#define AF_STRING(KEY, FLAG, HELP, FIELD)                                      \
  KeyBinding {                                                                 \
    {KEY, FLAG, HELP}, Kind::kString,                                          \
        [](RunConfig& c, const std::string& v) { c.FIELD = v; },               \
        [](const RunConfig& c) { return c.FIELD; }                             \
  }
#define AF_UINT(KEY, FLAG, HELP, FIELD)                                        \
  KeyBinding {                                                                 \
    {KEY, FLAG, HELP}, Kind::kInteger,                                         \
        [](RunConfig& c, const std::string& v) {                               \
          c.FIELD = parse_unsigned<decltype(c.FIELD)>(KEY, v);                 \
        },                                                                     \
        [](const RunConfig& c) { return fmt::format("{}", c.FIELD); }          \
  }
#define AF_REAL(KEY, FLAG, HELP, FIELD)                                        \
  KeyBinding {                                                                 \
    {KEY, FLAG, HELP}, Kind::kReal,                                            \
        [](RunConfig& c, const std::string& v) { c.FIELD = parse_real(KEY, v); }, \
        [](const RunConfig& c) { return fmt::format("{}", c.FIELD); }          \
  }

const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> kBindings = {
      AF_UINT("seed", "--seed", "base seed for splits and fixtures", seed),
      AF_UINT("threads", "--threads", "artists trained concurrently", threads),
      AF_STRING("out", "--out", "output root (default $ATTRIB_FORGE_OUT or ./runs)", out),
      AF_STRING("paths.manifest", "--manifest", "manifest file", manifest),
      AF_STRING("paths.embeddings_m1", "--embeddings", "M1 embedding container", embeddings_m1),
      AF_STRING("paths.embeddings_m2", "--embeddings-m2", "M2 embedding container", embeddings_m2),
      AF_STRING("experiment.setting", "--setting", "setting for experiment/train/evaluate", setting),
      AF_STRING("experiment.settings", "--settings", "comma-separated settings for suite", settings),
      AF_REAL("experiment.valid_fraction", "--valid-fraction", "validation share of training paintings", valid_fraction),
      AF_UINT("experiment.synthetic_test_count", "--synthetic-test-count", "synthetic-only hold-out size per artist", synthetic_test_count),
      AF_REAL("experiment.threshold", "--threshold", "probability threshold for accuracy/precision/recall", threshold),
      AF_STRING("experiment.test_grid", "--test-grid", "test patch grid (m1|m2)", test_grid),
      AF_UINT("grid.patch_size", "--patch-size", "square patch side in pixels", patch_size),
      AF_REAL("grid.overlap_factor", "--overlap-factor", "M1 size-proportional adjustment coefficient", overlap_factor),
      AF_REAL("train.learning_rate", "--learning-rate", "boosting shrinkage", train.learning_rate),
      AF_UINT("train.max_rounds", "--max-rounds", "boosting round cap", train.max_rounds),
      AF_UINT("train.num_leaves", "--num-leaves", "leaves per tree", train.num_leaves),
      AF_UINT("train.max_bins", "--max-bins", "histogram bins per feature", train.max_bins),
      AF_UINT("train.min_samples_leaf", "--min-samples-leaf", "minimum rows per leaf", train.min_samples_leaf),
      AF_REAL("train.l2_lambda", "--l2-lambda", "L2 penalty on leaf values", train.l2_lambda),
      AF_UINT("train.early_stop_patience", "--patience", "rounds without AUC or log-loss improvement before stopping", train.early_stop_patience),
      KeyBinding{{"train.class_weighting", "--class-weighting", "balanced|none"},
                 Kind::kString,
                 [](RunConfig& c, const std::string& v) {
                   c.train.class_weighting = gbdt::parse_class_weighting(v);
                 },
                 [](const RunConfig& c) {
                   return std::string(gbdt::class_weighting_name(c.train.class_weighting));
                 }},
      AF_UINT("fixture.artists", "--artists", "number of fixture artists", fixture_artists),
      AF_UINT("fixture.synthetic", "--synthetic", "synthetic paintings per fixture artist", fixture_synthetic),
      AF_UINT("fixture.dim", "--dim", "fixture embedding dimension", fixture_dim),
      AF_REAL("fixture.separation", "--separation", "artist mean distance scale", fixture_separation),
      AF_REAL("fixture.sigma", "--sigma", "within-artist standard deviation", fixture_sigma),
      AF_REAL("fixture.gap", "--gap", "synthetic-domain mean shift", fixture_gap),
      AF_UINT("fixture.min_side", "--min-side", "smallest fixture painting side (px)", fixture_min_side),
      AF_UINT("fixture.max_side", "--max-side", "largest fixture painting side (px)", fixture_max_side),
  };
  return kBindings;
}

#undef AF_STRING
#undef AF_UINT
#undef AF_REAL

const KeyBinding& binding(std::string_view key) {
  for (const auto& b : bindings()) {
    if (b.info.key == key) return b;
  }
  throw DataError("unknown config key '" + std::string(key) + "'");
}

void apply_json(RunConfig& cfg, const json& node, const std::string& prefix) {
  if (!node.is_object()) throw DataError("config: expected an object at '" + prefix + "'");
  for (const auto& [name, value] : node.items()) {
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    if (value.is_object()) {
      apply_json(cfg, value, key);
      continue;
    }
    const auto& b = binding(key);
    if (value.is_string()) {
      set_config_value(cfg, key, value.get<std::string>());
    } else if (value.is_number() && b.kind != Kind::kString) {
      set_config_value(cfg, key, value.dump());
    } else {
      throw DataError("config key " + key + " has a value of the wrong type");
    }
  }
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& b : bindings()) out.push_back(b.info);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, const std::string& value) {
  binding(key).set(cfg, value);
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) {
  return binding(key).get(cfg);
}

RunConfig parse_run_config(std::string_view json_text, RunConfig base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw FormatError(std::string("config is not valid JSON: ") + err.what());
  }
  apply_json(base, doc, "");
  return base;
}

RunConfig read_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), std::move(base));
}

std::string format_run_config(const RunConfig& cfg) {
  json doc = json::object();
  for (const auto& b : bindings()) {
    json* node = &doc;
    std::string_view key = b.info.key;
    std::size_t dot;
    while ((dot = key.find('.')) != std::string_view::npos) {
      node = &(*node)[std::string(key.substr(0, dot))];
      key.remove_prefix(dot + 1);
    }
    const auto text = b.get(cfg);
    (*node)[std::string(key)] = b.kind == Kind::kString ? json(text) : json::parse(text);
  }
  return doc.dump(2) + "\n";
}

std::vector<Setting> parse_settings(std::string_view list) {
  std::vector<Setting> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto comma = list.find(',', start);
    if (comma == std::string_view::npos) comma = list.size();
    auto name = list.substr(start, comma - start);
    if (name == "all") {
      out.insert(out.end(), kAllSettings.begin(), kAllSettings.end());
    } else if (!name.empty()) {
      out.push_back(parse_setting(name));
    }
    start = comma + 1;
  }
  if (out.empty()) throw DataError("no settings selected");
  return out;
}

ExperimentConfig experiment_config(const RunConfig& cfg, Setting setting) {
  ExperimentConfig base;
  base.grid_train.patch_size = cfg.patch_size;
  base.grid_train.overlap_factor = cfg.overlap_factor;
  base.grid_test = base.grid_train;
  base.grid_test.strategy = parse_strategy(cfg.test_grid);
  base.train = cfg.train;
  base.train.seed = cfg.seed;
  base.valid_fraction = cfg.valid_fraction;
  base.synthetic_test_count = cfg.synthetic_test_count;
  base.threshold = cfg.threshold;
  base.seed = cfg.seed;
  base.threads = cfg.threads;
  auto out = config_for(setting, base);
  out.validate();
  return out;
}

fixtures::FixtureSpec fixture_spec(const RunConfig& cfg) {
  fixtures::FixtureSpec spec;
  if (cfg.fixture_artists < 1) throw DataError("fixture needs at least one artist");
  spec.artists = fixtures::default_artists(cfg.fixture_artists, cfg.fixture_synthetic);
  spec.dim = cfg.fixture_dim;
  spec.separation = cfg.fixture_separation;
  spec.sigma = cfg.fixture_sigma;
  spec.domain_gap = cfg.fixture_gap;
  spec.min_side_px = cfg.fixture_min_side;
  spec.max_side_px = cfg.fixture_max_side;
  spec.seed = cfg.seed;
  GridSpec grid;
  grid.patch_size = cfg.patch_size;
  grid.overlap_factor = cfg.overlap_factor;
  spec.grid = grid;
  spec.validate();
  return spec;
}

}  // namespace attrib_forge

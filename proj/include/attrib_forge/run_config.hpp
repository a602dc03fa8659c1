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

#ifndef ATTRIB_FORGE_RUN_CONFIG_HPP_
#define ATTRIB_FORGE_RUN_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "attrib_forge/fixtures.hpp"
#include "attrib_forge/gbdt.hpp"
#include "attrib_forge/harness.hpp"

namespace attrib_forge {

// Fully resolved command configuration. On disk it is a nested JSON object
// whose dotted leaf paths are the keys listed by config_keys().
struct RunConfig {
  std::uint64_t seed = 0;
  std::uint32_t threads = 1;
  std::string out;

  std::string manifest;
  std::string embeddings_m1;
  std::string embeddings_m2;

  std::string setting = "real-only";
  std::string settings = "real-only,synthetic-only,synthetic-to-real,hybrid-m1,hybrid-m2";
  double valid_fraction = 0.2;
  std::uint32_t synthetic_test_count = 5;
  double threshold = 0.5;
  std::string test_grid = "m1";

  std::uint32_t patch_size = 224;
  double overlap_factor = 0.5;

  gbdt::TrainConfig train;

  std::uint32_t fixture_artists = 7;
  std::uint32_t fixture_synthetic = 20;
  std::uint32_t fixture_dim = 16;
  double fixture_separation = 3.0;
  double fixture_sigma = 1.0;
  double fixture_gap = 0.5;
  std::uint32_t fixture_min_side = 320;
  std::uint32_t fixture_max_side = 640;

  bool operator==(const RunConfig&) const = default;
};

struct ConfigKey {
  std::string key;   // dotted path, e.g. "train.learning_rate"
  std::string flag;  // command-line flag, e.g. "--learning-rate"
  std::string help;
};

const std::vector<ConfigKey>& config_keys();

// Assigns one key from its textual form; throws DataError on unknown keys or
// unparsable values.
void set_config_value(RunConfig& cfg, std::string_view key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);

// Unknown keys are rejected.
RunConfig parse_run_config(std::string_view json_text, RunConfig base = {});
RunConfig read_run_config(const std::string& path, RunConfig base = {});
std::string format_run_config(const RunConfig& cfg);

std::vector<Setting> parse_settings(std::string_view list);
ExperimentConfig experiment_config(const RunConfig& cfg, Setting setting);
fixtures::FixtureSpec fixture_spec(const RunConfig& cfg);

}  // namespace attrib_forge

#endif  // ATTRIB_FORGE_RUN_CONFIG_HPP_

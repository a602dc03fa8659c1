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

#ifndef ATTRIB_FORGE_FIXTURES_HPP_
#define ATTRIB_FORGE_FIXTURES_HPP_

// Parametric per-artist embedding datasets. Every artist a has a real-domain
// mean mu_a = separation * u_a and a synthetic-domain mean mu_a + gap * v_a,
// where u_a, v_a are seeded unit vectors. Patches are spherical Gaussians
// around those means, so the Bayes-optimal AUC of any two-artist task has a
// closed form.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attrib_forge/data_io.hpp"
#include "attrib_forge/patch_grid.hpp"

namespace attrib_forge::fixtures {

struct FixtureArtist {
  std::string name;
  std::uint32_t n_real = 0;
  std::uint32_t n_synthetic = 0;
  bool operator==(const FixtureArtist&) const = default;
};

struct FixtureSpec {
  std::vector<FixtureArtist> artists;
  std::uint32_t dim = 16;
  double separation = 3.0;
  double sigma = 1.0;
  double domain_gap = 0.0;
  // Records per painting when `grid` is unset; offsets are then all zero.
  std::uint32_t patches_per_painting = 20;
  // When set, each painting gets one record per patch of its grid.
  std::optional<GridSpec> grid;
  std::uint32_t min_side_px = 320;
  std::uint32_t max_side_px = 640;
  std::uint64_t seed = 0;

  void validate() const;
};

// Artist names and real painting counts of the seven-painter corpus the
// fixture defaults mirror.
std::vector<FixtureArtist> default_artists(std::size_t count, std::uint32_t n_synthetic);

struct FixtureOracle {
  std::uint32_t dim = 0;
  double sigma = 1.0;
  std::vector<std::string> artists;
  std::vector<std::vector<double>> real_means;
  std::vector<std::vector<double>> synthetic_means;

  const std::vector<double>& mean(std::string_view artist, Domain domain) const;
  bool operator==(const FixtureOracle&) const = default;
};

struct Fixture {
  DatasetManifest manifest;
  EmbeddingSet embeddings;
  FixtureOracle oracle;
};

Fixture generate(const FixtureSpec& spec);

// Embeddings for the manifest paintings under another grid, drawn from the
// same oracle. Streams are keyed by (seed, painting, strategy) so M1 and M2
// records are independent draws.
EmbeddingSet generate_embeddings(const FixtureSpec& spec, const DatasetManifest& manifest,
                                 const FixtureOracle& oracle, const GridSpec& grid);

// Standard normal CDF.
double normal_cdf(double x);

struct BayesAuc {
  double value = 0.5;
  bool estimate = false;  // true for the Monte-Carlo multi-artist case
};

// Bayes-optimal AUC of separating `artist` from `rest` in one domain. With a
// single negative artist this is Phi(|mu_a - mu_b| / (sigma sqrt 2)); with
// several it is a seeded Monte-Carlo estimate for the likelihood-ratio
// classifier against an equal-weight mixture of the negatives.
BayesAuc bayes_auc(const FixtureOracle& oracle, std::string_view artist,
                   const std::vector<std::string>& rest, Domain domain,
                   std::uint64_t samples_per_class = 1'000'000, std::uint64_t seed = 0);

std::string format_oracle(const FixtureOracle& oracle);
FixtureOracle parse_oracle(std::string_view text);
void write_oracle(const FixtureOracle& oracle, const std::string& path);
FixtureOracle read_oracle(const std::string& path);

}  // namespace attrib_forge::fixtures

#endif  // ATTRIB_FORGE_FIXTURES_HPP_

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

#ifndef ATTRIB_FORGE_DATA_IO_HPP_
#define ATTRIB_FORGE_DATA_IO_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attrib_forge {

enum class Domain : std::uint8_t { kReal, kSynthetic };

std::string_view domain_name(Domain domain);
Domain parse_domain(std::string_view text);

struct PaintingEntry {
  std::string painting_id;
  std::string artist;
  Domain domain = Domain::kReal;
  std::uint32_t width_px = 0;
  std::uint32_t height_px = 0;
  // Generation order; present iff domain is synthetic.
  std::optional<std::uint32_t> synthetic_ordinal;

  bool operator==(const PaintingEntry&) const = default;
};

// Catalog of paintings. `artists` holds the unique artist labels in order of
// first appearance. `holdout_ids` carries explicit `#holdout <painting_id>`
// designations; artists without one use their first real entry.
struct DatasetManifest {
  std::vector<PaintingEntry> entries;
  std::vector<std::string> artists;
  std::set<std::string> holdout_ids;

  const PaintingEntry* find(std::string_view painting_id) const;
  bool operator==(const DatasetManifest&) const = default;
};

// Checks every manifest invariant and rebuilds nothing; throws DataError.
void validate(const DatasetManifest& manifest);

// Builds a manifest from entries, deriving `artists` and validating.
DatasetManifest make_manifest(std::vector<PaintingEntry> entries,
                              std::set<std::string> holdout_ids = {});

DatasetManifest parse_manifest(std::string_view text);
std::string format_manifest(const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::string& path);
void write_manifest(const DatasetManifest& manifest, const std::string& path);

struct EmbeddingRecord {
  std::string painting_id;
  std::uint32_t patch_index = 0;
  std::uint32_t x_offset = 0;
  std::uint32_t y_offset = 0;
  std::vector<float> values;

  bool operator==(const EmbeddingRecord&) const = default;
};

// Concatenated per-patch feature vectors. `source_dims` records how the
// vector was assembled and is never used to split it.
struct EmbeddingSet {
  std::uint32_t dim = 0;
  std::vector<std::uint32_t> source_dims;
  std::vector<EmbeddingRecord> records;

  bool operator==(const EmbeddingSet&) const = default;
};

void validate(const EmbeddingSet& set);

inline constexpr char kEmbeddingMagic[4] = {'A', 'E', 'M', 'B'};
inline constexpr std::uint16_t kEmbeddingVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 16;

std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set);
EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes);
void write_embeddings(const EmbeddingSet& set, const std::string& path);
EmbeddingSet read_embeddings(const std::string& path);

// Dense row-major float matrix.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;

  std::span<const float> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
  float at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  bool operator==(const FeatureMatrix&) const = default;
};

struct PatchRow {
  std::string painting_id;
  std::uint32_t patch_index = 0;
  std::string artist;
  Domain domain = Domain::kReal;
  std::optional<std::uint32_t> synthetic_ordinal;

  bool operator==(const PatchRow&) const = default;
};

// Embedding records annotated with manifest metadata, ordered by
// (painting_id, patch_index).
struct LabeledPatchTable {
  std::vector<PatchRow> rows;
  FeatureMatrix features;

  std::size_t size() const { return rows.size(); }
  bool operator==(const LabeledPatchTable&) const = default;
};

LabeledPatchTable join(const DatasetManifest& manifest,
                       const EmbeddingSet& embeddings);

// Rows whose painting_id is in `painting_ids`, original order kept.
LabeledPatchTable select_paintings(const LabeledPatchTable& table,
                                   const std::set<std::string>& painting_ids);

}  // namespace attrib_forge

#endif  // ATTRIB_FORGE_DATA_IO_HPP_

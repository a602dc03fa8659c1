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

#ifndef ATTRIB_FORGE_PATCH_GRID_HPP_
#define ATTRIB_FORGE_PATCH_GRID_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "attrib_forge/data_io.hpp"

namespace attrib_forge {

// M1 spans the image with the minimum patch count plus a size-proportional
// adjustment. M2 doubles the M1 count along each axis.
enum class Strategy : std::uint8_t { kM1, kM2 };

std::string_view strategy_name(Strategy strategy);  // "m1" / "m2"
Strategy parse_strategy(std::string_view text);

struct GridSpec {
  std::uint32_t patch_size = 224;
  Strategy strategy = Strategy::kM1;
  double overlap_factor = 0.5;

  bool operator==(const GridSpec&) const = default;
};

void validate(const GridSpec& spec);

struct PatchOffset {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  bool operator==(const PatchOffset&) const = default;
};

// Offsets in row-major order; a patch's index is its position in `offsets`.
struct PatchGrid {
  std::string painting_id;
  std::vector<PatchOffset> offsets;
  std::uint32_t patch_size = 0;

  bool operator==(const PatchGrid&) const = default;
};

// Number of patches along one axis of `length` pixels:
//   M1: ceil((length - P) / P) + 1 + floor(overlap_factor * length / P)
//   M2: 2 * M1
// Throws DataError when length < patch_size.
std::uint32_t axis_count(std::uint32_t length, const GridSpec& spec);

// Evenly spaced offsets with the first pinned at 0 and the last at
// length - P, rounded half up. A single patch is centered. When the axis has
// fewer distinct integer positions than axis_count asks for, every position
// is used once.
std::vector<std::uint32_t> axis_offsets(std::uint32_t length,
                                        const GridSpec& spec);

PatchGrid build_grid(std::uint32_t width, std::uint32_t height,
                     std::string painting_id, const GridSpec& spec);

// One grid per manifest entry in manifest order. All dimension failures are
// collected into a single DataError naming every offending painting.
std::vector<PatchGrid> grid_for_manifest(const DatasetManifest& manifest,
                                         const GridSpec& spec);

// `painting_id<TAB>patch_index<TAB>x<TAB>y` per patch.
std::string format_grid_dump(const std::vector<PatchGrid>& grids);

}  // namespace attrib_forge

#endif  // ATTRIB_FORGE_PATCH_GRID_HPP_

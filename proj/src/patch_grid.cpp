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

#include "attrib_forge/patch_grid.hpp"

#include <cmath>
#include <sstream>

#include "attrib_forge/error.hpp"

namespace attrib_forge {

std::string_view strategy_name(Strategy strategy) {
  return strategy == Strategy::kM1 ? "m1" : "m2";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "m1" || text == "M1") return Strategy::kM1;
  if (text == "m2" || text == "M2") return Strategy::kM2;
  throw DataError("unknown grid strategy '" + std::string(text) +
                  "' (expected m1 or m2)");
}

void validate(const GridSpec& spec) {
  if (spec.patch_size < 1) throw DataError("patch_size must be >= 1");
  if (!(spec.overlap_factor >= 0.0) || !std::isfinite(spec.overlap_factor)) {
    throw DataError("overlap_factor must be a finite value >= 0");
  }
}

std::uint32_t axis_count(std::uint32_t length, const GridSpec& spec) {
  validate(spec);
  const std::uint64_t p = spec.patch_size;
  if (length < p) {
    throw DataError("dimension too small: " + std::to_string(length) +
                    " px < patch size " + std::to_string(p));
  }
  const std::uint64_t span = length - p;
  const std::uint64_t n_min = (span + p - 1) / p + 1;
  const auto adjustment = static_cast<std::uint64_t>(
      std::floor(spec.overlap_factor * static_cast<double>(length) /
                 static_cast<double>(p)));
  std::uint64_t n = n_min + adjustment;
  if (spec.strategy == Strategy::kM2) n *= 2;
  if (n > 0xFFFFFFFFu) throw DataError("axis patch count overflows");
  return static_cast<std::uint32_t>(n);
}

std::vector<std::uint32_t> axis_offsets(std::uint32_t length,
                                        const GridSpec& spec) {
  const std::uint64_t n_requested = axis_count(length, spec);
  const std::uint64_t span = length - spec.patch_size;
  if (n_requested == 1) return {static_cast<std::uint32_t>(span / 2)};
  // Only span + 1 distinct integer positions exist.
  const std::uint64_t n = std::min(n_requested, span + 1);
  if (n == 1) return {0};
  std::vector<std::uint32_t> offsets(n);
  const std::uint64_t denom = n - 1;
  for (std::uint64_t i = 0; i < n; ++i) {
    // round_half_up(i * span / denom) in exact integer arithmetic.
    offsets[i] = static_cast<std::uint32_t>((2 * i * span + denom) / (2 * denom));
  }
  return offsets;
}

PatchGrid build_grid(std::uint32_t width, std::uint32_t height,
                     std::string painting_id, const GridSpec& spec) {
  auto xs = axis_offsets(width, spec);
  auto ys = axis_offsets(height, spec);
  PatchGrid grid;
  grid.painting_id = std::move(painting_id);
  grid.patch_size = spec.patch_size;
  grid.offsets.reserve(xs.size() * ys.size());
  for (auto y : ys) {
    for (auto x : xs) grid.offsets.push_back({x, y});
  }
  return grid;
}

std::vector<PatchGrid> grid_for_manifest(const DatasetManifest& manifest,
                                         const GridSpec& spec) {
  validate(spec);
  std::vector<PatchGrid> grids;
  grids.reserve(manifest.entries.size());
  std::string failures;
  for (const auto& e : manifest.entries) {
    try {
      grids.push_back(build_grid(e.width_px, e.height_px, e.painting_id, spec));
    } catch (const DataError& err) {
      if (!failures.empty()) failures += "; ";
      failures += e.painting_id + " (" + std::to_string(e.width_px) + "x" +
                  std::to_string(e.height_px) + "): " + err.what();
    }
  }
  if (!failures.empty()) {
    throw DataError("paintings smaller than the patch size: " + failures);
  }
  return grids;
}

std::string format_grid_dump(const std::vector<PatchGrid>& grids) {
  std::ostringstream out;
  for (const auto& g : grids) {
    for (std::size_t i = 0; i < g.offsets.size(); ++i) {
      out << g.painting_id << '\t' << i << '\t' << g.offsets[i].x << '\t'
          << g.offsets[i].y << '\n';
    }
  }
  return out.str();
}

}  // namespace attrib_forge

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

#include "attrib_forge/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "attrib_forge/binary_io.hpp"
#include "attrib_forge/error.hpp"

namespace attrib_forge {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<std::uint32_t> parse_u32(std::string_view text) {
  std::uint32_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
  throw FormatError("manifest line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::string_view domain_name(Domain domain) {
  return domain == Domain::kReal ? "real" : "synthetic";
}

Domain parse_domain(std::string_view text) {
  if (text == "real") return Domain::kReal;
  if (text == "synthetic") return Domain::kSynthetic;
  throw DataError("unknown domain '" + std::string(text) + "'");
}

const PaintingEntry* DatasetManifest::find(std::string_view painting_id) const {
  for (const auto& entry : entries) {
    if (entry.painting_id == painting_id) return &entry;
  }
  return nullptr;
}

void validate(const DatasetManifest& manifest) {
  if (manifest.entries.empty()) throw DataError("empty manifest");
  std::unordered_set<std::string> ids;
  std::unordered_set<std::string> artists(manifest.artists.begin(),
                                          manifest.artists.end());
  if (artists.size() != manifest.artists.size()) {
    throw DataError("duplicate artist in manifest artist list");
  }
  for (const auto& e : manifest.entries) {
    if (e.painting_id.empty()) throw DataError("empty painting_id");
    if (!ids.insert(e.painting_id).second) {
      throw DataError("duplicate painting_id '" + e.painting_id + "'");
    }
    if (!artists.contains(e.artist)) {
      throw DataError("painting '" + e.painting_id + "' has unlisted artist '" +
                      e.artist + "'");
    }
    if (e.width_px < 1 || e.height_px < 1) {
      throw DataError("painting '" + e.painting_id + "' has zero dimension");
    }
    if ((e.domain == Domain::kSynthetic) != e.synthetic_ordinal.has_value()) {
      throw DataError(e.domain == Domain::kSynthetic
                          ? "synthetic painting '" + e.painting_id +
                                "' is missing synthetic_ordinal"
                          : "real painting '" + e.painting_id +
                                "' must not carry a synthetic_ordinal");
    }
  }
  for (const auto& id : manifest.holdout_ids) {
    const auto* entry = manifest.find(id);
    if (entry == nullptr) {
      throw DataError("holdout designation for unknown painting '" + id + "'");
    }
    if (entry->domain != Domain::kReal) {
      throw DataError("holdout painting '" + id + "' is not real");
    }
  }
}

DatasetManifest make_manifest(std::vector<PaintingEntry> entries,
                              std::set<std::string> holdout_ids) {
  DatasetManifest manifest;
  manifest.entries = std::move(entries);
  manifest.holdout_ids = std::move(holdout_ids);
  for (const auto& e : manifest.entries) {
    if (std::find(manifest.artists.begin(), manifest.artists.end(), e.artist) ==
        manifest.artists.end()) {
      manifest.artists.push_back(e.artist);
    }
  }
  validate(manifest);
  return manifest;
}

DatasetManifest parse_manifest(std::string_view text) {
  std::vector<PaintingEntry> entries;
  std::set<std::string> holdouts;
  std::unordered_map<std::string, std::size_t> first_line;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kHoldout = "#holdout";
      if (line.starts_with(kHoldout)) {
        auto id = trim(line.substr(kHoldout.size()));
        if (id.empty()) line_error(line_no, "holdout directive without id");
        holdouts.emplace(id);
      }
      continue;
    }
    auto fields = split_tabs(line);
    if (fields.size() != 6) {
      line_error(line_no, "expected 6 tab-separated fields, got " +
                              std::to_string(fields.size()));
    }
    PaintingEntry e;
    e.painting_id = std::string(fields[0]);
    e.artist = std::string(fields[1]);
    if (e.painting_id.empty()) line_error(line_no, "empty painting_id");
    if (e.artist.empty()) line_error(line_no, "empty artist");
    try {
      e.domain = parse_domain(fields[2]);
    } catch (const DataError& err) {
      line_error(line_no, err.what());
    }
    auto w = parse_u32(fields[3]);
    auto h = parse_u32(fields[4]);
    if (!w || !h || *w == 0 || *h == 0) {
      line_error(line_no, "width and height must be positive integers");
    }
    e.width_px = *w;
    e.height_px = *h;
    if (fields[5] == "-") {
      if (e.domain == Domain::kSynthetic) {
        line_error(line_no, "synthetic painting '" + e.painting_id +
                                "' is missing synthetic_ordinal");
      }
    } else {
      auto ordinal = parse_u32(fields[5]);
      if (!ordinal) line_error(line_no, "bad ordinal '" + std::string(fields[5]) + "'");
      if (e.domain == Domain::kReal) {
        line_error(line_no, "real painting must use '-' as ordinal");
      }
      e.synthetic_ordinal = *ordinal;
    }
    auto [it, inserted] = first_line.emplace(e.painting_id, line_no);
    if (!inserted) {
      line_error(line_no, "duplicate painting_id '" + e.painting_id +
                              "' (first seen on line " +
                              std::to_string(it->second) + ")");
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw DataError("empty manifest");
  return make_manifest(std::move(entries), std::move(holdouts));
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::ostringstream out;
  out << "# painting_id\tartist\tdomain\twidth\theight\tordinal\n";
  for (const auto& id : manifest.holdout_ids) out << "#holdout " << id << '\n';
  for (const auto& e : manifest.entries) {
    out << e.painting_id << '\t' << e.artist << '\t' << domain_name(e.domain)
        << '\t' << e.width_px << '\t' << e.height_px << '\t';
    if (e.synthetic_ordinal) {
      out << *e.synthetic_ordinal;
    } else {
      out << '-';
    }
    out << '\n';
  }
  return out.str();
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str());
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  validate(manifest);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << format_manifest(manifest);
  if (!out) throw DataError("write failed for '" + path + "'");
}

void validate(const EmbeddingSet& set) {
  if (set.dim == 0) throw DataError("embedding dim must be positive");
  if (set.source_dims.empty()) throw DataError("embedding set has no sources");
  if (set.source_dims.size() > 0xFFFF) throw DataError("too many sources");
  std::uint64_t total = 0;
  for (auto d : set.source_dims) {
    if (d == 0) throw DataError("source dim must be positive");
    total += d;
  }
  if (total != set.dim) {
    throw DataError("source dims sum to " + std::to_string(total) +
                    " but dim is " + std::to_string(set.dim));
  }
  std::set<std::pair<std::string_view, std::uint32_t>> keys;
  for (const auto& r : set.records) {
    if (r.painting_id.size() > 0xFFFF) {
      throw DataError("painting_id longer than 65535 bytes");
    }
    if (r.values.size() != set.dim) {
      throw DataError("record (" + r.painting_id + ", " +
                      std::to_string(r.patch_index) + ") has " +
                      std::to_string(r.values.size()) + " values, expected " +
                      std::to_string(set.dim));
    }
    for (float v : r.values) {
      if (!std::isfinite(v)) {
        throw DataError("record (" + r.painting_id + ", " +
                        std::to_string(r.patch_index) +
                        ") has a non-finite component");
      }
    }
    if (!keys.emplace(r.painting_id, r.patch_index).second) {
      throw DataError("duplicate record (" + r.painting_id + ", " +
                      std::to_string(r.patch_index) + ")");
    }
  }
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set) {
  validate(set);
  if (set.records.size() > 0xFFFFFFFFu) throw DataError("too many records");
  binary::Writer w;
  w.put_bytes(std::string_view(kEmbeddingMagic, 4));
  w.put(kEmbeddingVersion);
  w.put(static_cast<std::uint32_t>(set.records.size()));
  w.put(set.dim);
  w.put(static_cast<std::uint16_t>(set.source_dims.size()));
  for (auto d : set.source_dims) w.put(d);
  for (const auto& r : set.records) {
    w.put(static_cast<std::uint16_t>(r.painting_id.size()));
    w.put_bytes(r.painting_id);
    w.put(r.patch_index);
    w.put(r.x_offset);
    w.put(r.y_offset);
    for (float v : r.values) w.put_f32(v);
  }
  return w.release();
}

EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes) {
  binary::Reader r(bytes);
  if (bytes.size() < 4 ||
      !std::equal(kEmbeddingMagic, kEmbeddingMagic + 4, bytes.begin())) {
    throw FormatError("bad magic: not an embedding container");
  }
  r.get_bytes(4);
  auto version = r.get<std::uint16_t>();
  if (version != kEmbeddingVersion) {
    throw FormatError("unsupported embedding container version " +
                      std::to_string(version));
  }
  EmbeddingSet set;
  auto count = r.get<std::uint32_t>();
  set.dim = r.get<std::uint32_t>();
  auto n_sources = r.get<std::uint16_t>();
  for (std::uint16_t i = 0; i < n_sources; ++i) {
    set.source_dims.push_back(r.get<std::uint32_t>());
  }
  std::uint64_t total = std::accumulate(set.source_dims.begin(),
                                        set.source_dims.end(), std::uint64_t{0});
  if (set.dim == 0 || total != set.dim) {
    throw FormatError("header dim " + std::to_string(set.dim) +
                      " does not match source dims sum " + std::to_string(total));
  }
  // Bound the reservation by what the body could possibly hold.
  set.records.reserve(std::min<std::size_t>(count, r.remaining() / 14 + 1));
  for (std::uint32_t i = 0; i < count; ++i) {
    try {
      EmbeddingRecord rec;
      auto id_len = r.get<std::uint16_t>();
      rec.painting_id = r.get_bytes(id_len);
      rec.patch_index = r.get<std::uint32_t>();
      rec.x_offset = r.get<std::uint32_t>();
      rec.y_offset = r.get<std::uint32_t>();
      rec.values.resize(set.dim);
      for (auto& v : rec.values) v = r.get_f32();
      set.records.push_back(std::move(rec));
    } catch (const FormatError&) {
      throw FormatError("truncated embedding container: header declares " +
                        std::to_string(count) + " records, body ends in record " +
                        std::to_string(i));
    }
  }
  if (!r.at_end()) {
    throw FormatError("embedding container has " + std::to_string(r.remaining()) +
                      " trailing bytes after " + std::to_string(count) +
                      " records");
  }
  try {
    validate(set);
  } catch (const DataError& err) {
    throw FormatError(std::string("invalid embedding container: ") + err.what());
  }
  return set;
}

void write_embeddings(const EmbeddingSet& set, const std::string& path) {
  auto bytes = encode_embeddings(set);
  binary::write_file(path, bytes);
}

EmbeddingSet read_embeddings(const std::string& path) {
  auto bytes = binary::read_file(path);
  return decode_embeddings(bytes);
}

LabeledPatchTable join(const DatasetManifest& manifest,
                       const EmbeddingSet& embeddings) {
  std::unordered_map<std::string_view, const PaintingEntry*> by_id;
  for (const auto& e : manifest.entries) by_id.emplace(e.painting_id, &e);

  std::vector<std::size_t> order(embeddings.records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (const auto& r : embeddings.records) {
    if (!by_id.contains(r.painting_id)) {
      throw DataError("orphan embedding record: painting_id '" + r.painting_id +
                      "' is not in the manifest");
    }
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = embeddings.records[a];
    const auto& rb = embeddings.records[b];
    if (ra.painting_id != rb.painting_id) return ra.painting_id < rb.painting_id;
    return ra.patch_index < rb.patch_index;
  });

  LabeledPatchTable table;
  table.rows.reserve(order.size());
  table.features.rows = order.size();
  table.features.cols = embeddings.dim;
  table.features.values.reserve(order.size() * embeddings.dim);
  for (auto i : order) {
    const auto& r = embeddings.records[i];
    const auto* entry = by_id.at(r.painting_id);
    table.rows.push_back(PatchRow{r.painting_id, r.patch_index, entry->artist,
                                  entry->domain, entry->synthetic_ordinal});
    table.features.values.insert(table.features.values.end(), r.values.begin(),
                                 r.values.end());
  }
  return table;
}

LabeledPatchTable select_paintings(const LabeledPatchTable& table,
                                   const std::set<std::string>& painting_ids) {
  LabeledPatchTable out;
  out.features.cols = table.features.cols;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (!painting_ids.contains(table.rows[i].painting_id)) continue;
    out.rows.push_back(table.rows[i]);
    auto row = table.features.row(i);
    out.features.values.insert(out.features.values.end(), row.begin(), row.end());
  }
  out.features.rows = out.rows.size();
  return out;
}

}  // namespace attrib_forge

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

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"

#include "attrib_forge/data_io.hpp"
#include "attrib_forge/error.hpp"
#include "test_support.hpp"

using namespace attrib_forge;
using attrib_forge::testing::TempDir;

namespace {

std::string real_line(const std::string& id, const std::string& artist) {
  return id + "\t" + artist + "\treal\t1024\t768\t-\n";
}

EmbeddingSet small_set(std::size_t records, std::uint32_t dim) {
  EmbeddingSet set;
  set.dim = dim;
  set.source_dims = {dim};
  for (std::size_t i = 0; i < records; ++i) {
    EmbeddingRecord r;
    r.painting_id = "p" + std::to_string(i / 2);
    r.patch_index = static_cast<std::uint32_t>(i % 2);
    r.x_offset = static_cast<std::uint32_t>(10 * i);
    r.y_offset = static_cast<std::uint32_t>(3 * i);
    for (std::uint32_t d = 0; d < dim; ++d) r.values.push_back(0.25f * static_cast<float>(i) - d);
    set.records.push_back(r);
  }
  return set;
}

}  // namespace

TEST_CASE("read_manifest: seven GD and thirteen GR paintings") {
  std::string text = "# painting_id\tartist\tdomain\twidth\theight\tordinal\n";
  for (int i = 0; i < 7; ++i) text += real_line("gd" + std::to_string(i), "GD");
  for (int i = 0; i < 13; ++i) text += real_line("gr" + std::to_string(i), "GR");
  TempDir tmp;
  attrib_forge::testing::spit(tmp.file("m.tsv"), text);
  const auto m = read_manifest(tmp.file("m.tsv"));
  CHECK(m.entries.size() == 20);
  CHECK(m.artists == std::vector<std::string>{"GD", "GR"});
  CHECK(m.entries[0].width_px == 1024);
  CHECK_FALSE(m.entries[0].synthetic_ordinal.has_value());
}

TEST_CASE("parse_manifest rejects empty and malformed input") {
  CHECK_THROWS_WITH_AS(parse_manifest(""), "empty manifest", DataError);
  CHECK_THROWS_WITH_AS(parse_manifest("# only a comment\n\n"), "empty manifest", DataError);

  SUBCASE("duplicate painting id names both lines") {
    const std::string text = real_line("p1", "GD") + real_line("p2", "GD") + real_line("p1", "GR");
    CHECK_THROWS_WITH_AS(parse_manifest(text),
                         doctest::Contains("line 3: duplicate painting_id 'p1' (first seen on line 1)"),
                         FormatError);
  }
  SUBCASE("synthetic entry without ordinal") {
    CHECK_THROWS_WITH_AS(parse_manifest("s1\tGD\tsynthetic\t512\t512\t-\n"),
                         doctest::Contains("missing synthetic_ordinal"), FormatError);
  }
  SUBCASE("wrong field count carries the line number") {
    const std::string text = "# header\n" + real_line("p1", "GD") + "p2\tGD\treal\t10\n";
    CHECK_THROWS_WITH_AS(parse_manifest(text), doctest::Contains("manifest line 3"), FormatError);
  }
  SUBCASE("zero width") {
    CHECK_THROWS_AS(parse_manifest("p1\tGD\treal\t0\t10\t-\n"), FormatError);
  }
  SUBCASE("unknown domain") {
    CHECK_THROWS_WITH_AS(parse_manifest("p1\tGD\tpainted\t10\t10\t-\n"),
                         doctest::Contains("unknown domain"), FormatError);
  }
  SUBCASE("real painting with an ordinal") {
    CHECK_THROWS_AS(parse_manifest("p1\tGD\treal\t10\t10\t3\n"), FormatError);
  }
}

TEST_CASE("manifest holdout directive and text round-trip") {
  const std::string text = "#holdout p2\r\n" + real_line("p1", "GD") + real_line("p2", "GD") +
                           "s0\tGD\tsynthetic\t512\t512\t0\n" + real_line("q1", "GR");
  const auto m = parse_manifest(text);
  CHECK(m.holdout_ids == std::set<std::string>{"p2"});
  CHECK(m.entries[2].synthetic_ordinal == 0u);
  CHECK(parse_manifest(format_manifest(m)) == m);

  CHECK_THROWS_WITH_AS(parse_manifest("#holdout nope\n" + real_line("p1", "GD")),
                       doctest::Contains("unknown painting 'nope'"), DataError);
}

TEST_CASE("write_embeddings: file size follows the container layout") {
  EmbeddingSet set;
  set.dim = 1536;
  set.source_dims = {1536};
  set.records.push_back({"painting", 0, 0, 0, std::vector<float>(1536, 0.5f)});
  TempDir tmp;
  write_embeddings(set, tmp.file("e.aemb"));
  // magic 4 + version 2 + count 4 + dim 4 + n_sources 2, then one u32 per
  // source; record: u16 id length + id bytes + 3 x u32 + dim x f32.
  const std::size_t header = 4 + 2 + 4 + 4 + 2;
  const std::size_t record = 2 + 8 + 3 * 4 + 1536 * 4;
  CHECK(header == kEmbeddingHeaderBytes);
  CHECK(std::filesystem::file_size(tmp.file("e.aemb")) == header + 4 + record);
}

TEST_CASE("write_embeddings rejects invalid sets before writing") {
  TempDir tmp;
  auto set = small_set(2, 3);
  set.records[1].values[2] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_WITH_AS(write_embeddings(set, tmp.file("bad.aemb")),
                       doctest::Contains("non-finite"), DataError);
  CHECK_FALSE(std::filesystem::exists(tmp.file("bad.aemb")));

  auto dup = small_set(2, 3);
  dup.records[1].patch_index = 0;
  CHECK_THROWS_WITH_AS(encode_embeddings(dup), doctest::Contains("duplicate record"), DataError);

  auto sources = small_set(1, 3);
  sources.source_dims = {1, 1};
  CHECK_THROWS_WITH_AS(encode_embeddings(sources), doctest::Contains("sum to 2"), DataError);

  auto short_vec = small_set(1, 3);
  short_vec.records[0].values.pop_back();
  CHECK_THROWS_AS(encode_embeddings(short_vec), DataError);
}

TEST_CASE("embedding container: round trip is exact and deterministic") {
  TempDir tmp;
  auto set = small_set(3, 4);
  set.source_dims = {1, 3};
  set.records[0].values[0] = -0.0f;
  set.records[1].values[1] = std::numeric_limits<float>::denorm_min();
  write_embeddings(set, tmp.file("a.aemb"));
  const auto back = read_embeddings(tmp.file("a.aemb"));
  CHECK(back == set);
  CHECK(std::signbit(back.records[0].values[0]));
  write_embeddings(back, tmp.file("b.aemb"));
  CHECK(attrib_forge::testing::slurp(tmp.file("a.aemb")) ==
        attrib_forge::testing::slurp(tmp.file("b.aemb")));
}

TEST_CASE("embedding container: random sets survive encode/decode bit-exactly") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint32_t> bits;
  for (int trial = 0; trial < 50; ++trial) {
    EmbeddingSet set;
    const std::uint32_t a = 1 + rng() % 4;
    const std::uint32_t b = 1 + rng() % 4;
    set.dim = a + b;
    set.source_dims = {a, b};
    const std::size_t n = rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      EmbeddingRecord r;
      r.painting_id = std::string(1 + rng() % 20, static_cast<char>('a' + rng() % 26)) + std::to_string(i);
      r.patch_index = bits(rng);
      r.x_offset = bits(rng);
      r.y_offset = bits(rng);
      while (r.values.size() < set.dim) {
        const float f = std::bit_cast<float>(bits(rng));
        if (std::isfinite(f)) r.values.push_back(f);
      }
      set.records.push_back(r);
    }
    const auto bytes = encode_embeddings(set);
    const auto back = decode_embeddings(bytes);
    REQUIRE(back.records.size() == set.records.size());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < set.dim; ++d) {
        CHECK(std::bit_cast<std::uint32_t>(back.records[i].values[d]) ==
              std::bit_cast<std::uint32_t>(set.records[i].values[d]));
      }
    }
    CHECK(encode_embeddings(back) == bytes);
  }
}

TEST_CASE("read_embeddings detects corrupt containers") {
  auto bytes = encode_embeddings(small_set(5, 2));

  SUBCASE("wrong magic") {
    bytes[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_embeddings(bytes), doctest::Contains("bad magic"), FormatError);
  }
  SUBCASE("header declares 5 records, body holds 4") {
    auto four = encode_embeddings(small_set(4, 2));
    four[6] = 5;  // record_count low byte
    CHECK_THROWS_WITH_AS(decode_embeddings(four), doctest::Contains("truncated"), FormatError);
  }
  SUBCASE("dim disagrees with source dims") {
    bytes[10] = 3;  // dim low byte; sources still sum to 2
    CHECK_THROWS_WITH_AS(decode_embeddings(bytes), doctest::Contains("does not match"), FormatError);
  }
  SUBCASE("trailing bytes") {
    bytes.push_back(0);
    CHECK_THROWS_WITH_AS(decode_embeddings(bytes), doctest::Contains("trailing"), FormatError);
  }
  SUBCASE("unsupported version") {
    bytes[4] = 2;
    CHECK_THROWS_WITH_AS(decode_embeddings(bytes), doctest::Contains("version"), FormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_embeddings("/nonexistent/x.aemb"), DataError);
  }
}

TEST_CASE("join annotates and orders rows") {
  const auto manifest = make_manifest({{"b", "GR", Domain::kReal, 500, 500, std::nullopt},
                                       {"a", "GD", Domain::kSynthetic, 500, 500, 3u}});
  EmbeddingSet set;
  set.dim = 1;
  set.source_dims = {1};
  // Shuffled input order.
  for (int p = 6; p >= 0; --p) {
    set.records.push_back({"b", static_cast<std::uint32_t>(p), 0, 0, {float(100 + p)}});
    set.records.push_back({"a", static_cast<std::uint32_t>(p), 0, 0, {float(p)}});
  }
  const auto table = join(manifest, set);
  REQUIRE(table.size() == 14);
  CHECK(table.features.rows == 14);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(table.rows[i].painting_id == "a");
    CHECK(table.rows[i].patch_index == i);
    CHECK(table.rows[i].artist == "GD");
    CHECK(table.rows[i].synthetic_ordinal == 3u);
    CHECK(table.features.at(i, 0) == float(i));
    CHECK(table.rows[7 + i].painting_id == "b");
    CHECK(table.rows[7 + i].domain == Domain::kReal);
  }
  CHECK(join(manifest, set) == table);

  set.records.push_back({"pX", 0, 0, 0, {1.0f}});
  CHECK_THROWS_WITH_AS(join(manifest, set), doctest::Contains("orphan"), DataError);
}

TEST_CASE("select_paintings keeps order and features") {
  const auto manifest = make_manifest({{"a", "GD", Domain::kReal, 9, 9, std::nullopt},
                                       {"b", "GR", Domain::kReal, 9, 9, std::nullopt}});
  auto set = small_set(4, 2);  // p0 x2, p1 x2
  set.records[0].painting_id = set.records[1].painting_id = "a";
  set.records[2].painting_id = set.records[3].painting_id = "b";
  const auto table = join(manifest, set);
  const auto only_b = select_paintings(table, {"b"});
  REQUIRE(only_b.size() == 2);
  CHECK(only_b.features.rows == 2);
  CHECK(only_b.features.at(1, 1) == table.features.at(3, 1));
}

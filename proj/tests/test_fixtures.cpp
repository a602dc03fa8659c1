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
#include <numeric>

#include "doctest.h"

#include "attrib_forge/data_io.hpp"
#include "attrib_forge/error.hpp"
#include "attrib_forge/fixtures.hpp"
#include "attrib_forge/gbdt.hpp"
#include "attrib_forge/metrics.hpp"
#include "test_support.hpp"

using namespace attrib_forge;
using namespace attrib_forge::fixtures;

namespace {

FixtureSpec two_artists(std::uint32_t n_real, std::uint32_t n_synth, std::uint64_t seed) {
  FixtureSpec spec;
  spec.artists = {{"A", n_real, n_synth}, {"B", n_real, n_synth}};
  spec.seed = seed;
  return spec;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Oracle with hand-placed means along the first axis.
FixtureOracle line_oracle(const std::vector<double>& positions) {
  FixtureOracle o;
  o.dim = 3;
  o.sigma = 1.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    o.artists.push_back(std::string(1, static_cast<char>('A' + i)));
    o.real_means.push_back({positions[i], 0.0, 0.0});
    o.synthetic_means.push_back({positions[i], 0.0, 0.0});
  }
  return o;
}

}  // namespace

TEST_CASE("generate: cardinality") {
  const auto fx = generate(two_artists(10, 0, 1));
  CHECK(fx.manifest.entries.size() == 20);
  CHECK(fx.embeddings.records.size() == 400);
  CHECK(fx.embeddings.dim == 16);
  CHECK(fx.manifest.artists == std::vector<std::string>{"A", "B"});
  CHECK_NOTHROW(join(fx.manifest, fx.embeddings));
}

TEST_CASE("generate: ids, ordinals and sizes") {
  auto spec = two_artists(3, 12, 2);
  const auto fx = generate(spec);
  std::uint32_t synth = 0;
  for (const auto& e : fx.manifest.entries) {
    CHECK(e.width_px >= spec.min_side_px);
    CHECK(e.width_px <= spec.max_side_px);
    if (e.domain == Domain::kSynthetic) {
      REQUIRE(e.synthetic_ordinal.has_value());
      CHECK(e.painting_id == e.artist + "_s" + (*e.synthetic_ordinal < 10 ? "0" : "") +
                                 std::to_string(*e.synthetic_ordinal));
      ++synth;
    }
  }
  CHECK(synth == 24);
}

TEST_CASE("generate: zero gap gives equal domain means") {
  auto spec = two_artists(5, 5, 3);
  spec.domain_gap = 0.0;
  const auto fx = generate(spec);
  for (const auto& a : fx.oracle.artists) {
    CHECK(fx.oracle.mean(a, Domain::kReal) == fx.oracle.mean(a, Domain::kSynthetic));
  }
  spec.domain_gap = 1.5;
  const auto shifted = generate(spec);
  for (const auto& a : shifted.oracle.artists) {
    CHECK(distance(shifted.oracle.mean(a, Domain::kReal), shifted.oracle.mean(a, Domain::kSynthetic)) ==
          doctest::Approx(1.5));
  }
}

TEST_CASE("generate: orthonormal artist means") {
  FixtureSpec spec;
  spec.artists = default_artists(7, 2);
  spec.separation = 3.0;
  spec.domain_gap = 0.5;
  const auto fx = generate(spec);
  for (std::size_t a = 0; a < 7; ++a) {
    CHECK(distance(fx.oracle.real_means[a], std::vector<double>(16, 0.0)) == doctest::Approx(3.0));
    for (std::size_t b = a + 1; b < 7; ++b) {
      CHECK(distance(fx.oracle.real_means[a], fx.oracle.real_means[b]) ==
            doctest::Approx(3.0 * std::sqrt(2.0)));
    }
  }
}

TEST_CASE("generate: seeded determinism") {
  const auto a = generate(two_artists(4, 4, 77));
  const auto b = generate(two_artists(4, 4, 77));
  CHECK(encode_embeddings(a.embeddings) == encode_embeddings(b.embeddings));
  CHECK(a.manifest == b.manifest);
  CHECK(a.oracle == b.oracle);
  const auto c = generate(two_artists(4, 4, 78));
  CHECK(encode_embeddings(a.embeddings) != encode_embeddings(c.embeddings));
}

TEST_CASE("generate: grid mode emits one record per patch") {
  auto spec = two_artists(2, 2, 5);
  spec.grid = GridSpec{};
  const auto fx = generate(spec);
  const auto grids = grid_for_manifest(fx.manifest, *spec.grid);
  std::size_t expected = 0;
  for (const auto& g : grids) expected += g.offsets.size();
  CHECK(fx.embeddings.records.size() == expected);
  CHECK(fx.embeddings.records[1].x_offset == grids[0].offsets[1].x);

  GridSpec m2;
  m2.strategy = Strategy::kM2;
  const auto set2 = generate_embeddings(spec, fx.manifest, fx.oracle, m2);
  std::size_t expected2 = 0;
  for (const auto& g : grid_for_manifest(fx.manifest, m2)) expected2 += g.offsets.size();
  CHECK(set2.records.size() == expected2);
  CHECK(set2.records.size() > fx.embeddings.records.size());
}

TEST_CASE("default artists mirror the seven-painter corpus") {
  const auto artists = default_artists(9, 100);
  REQUIRE(artists.size() == 9);
  CHECK(artists[0] == FixtureArtist{"GD", 7, 100});
  CHECK(artists[6] == FixtureArtist{"JH", 9, 100});
  CHECK(artists[7].name == "A8");
}

TEST_CASE("spec validation") {
  auto spec = two_artists(2, 2, 0);
  spec.dim = 1;
  CHECK_THROWS_AS(generate(spec), DataError);
  spec = two_artists(2, 2, 0);
  spec.sigma = 0.0;
  CHECK_THROWS_AS(generate(spec), DataError);
  spec = two_artists(2, 2, 0);
  spec.domain_gap = -1.0;
  CHECK_THROWS_AS(generate(spec), DataError);
  spec = two_artists(2, 2, 0);
  spec.artists.clear();
  CHECK_THROWS_AS(generate(spec), DataError);
}

TEST_CASE("bayes_auc closed form") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(bayes_auc(line_oracle({1.0, 1.0}), "A", {"B"}, Domain::kReal).value == 0.5);
  const auto two = bayes_auc(line_oracle({0.0, 2.0}), "A", {"B"}, Domain::kReal);
  CHECK_FALSE(two.estimate);
  CHECK(two.value == doctest::Approx(0.9214).epsilon(1e-4));
  CHECK(bayes_auc(line_oracle({0.0, 6.0}), "A", {"B"}, Domain::kReal).value ==
        doctest::Approx(1.0).epsilon(1e-4));
  // Closed-form values for distances 1, 2 and 4.
  CHECK(bayes_auc(line_oracle({0.0, 1.0}), "A", {"B"}, Domain::kReal).value ==
        doctest::Approx(0.7602).epsilon(1e-4));
  CHECK(bayes_auc(line_oracle({0.0, 4.0}), "A", {"B"}, Domain::kReal).value ==
        doctest::Approx(0.9977).epsilon(1e-4));
  CHECK_THROWS_AS(bayes_auc(line_oracle({0.0, 1.0}), "Z", {"B"}, Domain::kReal), DataError);
}

TEST_CASE("bayes_auc Monte-Carlo estimate") {
  // Two negatives sharing a mean form a single Gaussian, so the estimate must
  // agree with the closed form.
  const auto oracle = line_oracle({0.0, 2.0, 2.0});
  const auto est = bayes_auc(oracle, "A", {"B", "C"}, Domain::kReal, 200'000, 9);
  CHECK(est.estimate);
  CHECK(est.value == doctest::Approx(normal_cdf(std::sqrt(2.0))).epsilon(0.005));
  CHECK(bayes_auc(oracle, "A", {"B", "C"}, Domain::kReal, 200'000, 9).value == est.value);

  const auto spread = line_oracle({0.0, 3.0, -3.0});
  const auto mixed = bayes_auc(spread, "A", {"B", "C"}, Domain::kReal, 100'000, 1);
  CHECK(mixed.value > 0.5);
  CHECK(mixed.value < 1.0);
}

TEST_CASE("oracle sidecar round trip") {
  auto spec = two_artists(2, 2, 13);
  spec.domain_gap = 0.7;
  const auto fx = generate(spec);
  attrib_forge::testing::TempDir tmp;
  write_oracle(fx.oracle, tmp.file("oracle.txt"));
  CHECK(read_oracle(tmp.file("oracle.txt")) == fx.oracle);
  CHECK(parse_oracle(format_oracle(fx.oracle)) == fx.oracle);
  CHECK_THROWS_AS(parse_oracle("dim=2\nsigma=1\n"), DataError);
}

TEST_CASE("zero gap: synthetic-trained model transfers to real data") {
  // Train on synthetic paintings, then compare AUC on held-out synthetic
  // paintings against AUC on the real paintings of the same fixture.
  double gap_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FixtureSpec spec = two_artists(10, 20, 100 + seed);
    spec.dim = 4;
    spec.separation = 1.0;
    spec.domain_gap = 0.0;
    const auto fx = generate(spec);
    const auto table = join(fx.manifest, fx.embeddings);
    std::set<std::string> train_ids, valid_ids, synth_test_ids, real_ids;
    for (const auto& e : fx.manifest.entries) {
      if (e.domain == Domain::kReal) {
        real_ids.insert(e.painting_id);
      } else if (*e.synthetic_ordinal < 12) {
        train_ids.insert(e.painting_id);
      } else if (*e.synthetic_ordinal < 15) {
        valid_ids.insert(e.painting_id);
      } else {
        synth_test_ids.insert(e.painting_id);
      }
    }
    auto labels = [](const LabeledPatchTable& t) {
      std::vector<std::uint8_t> y;
      for (const auto& r : t.rows) y.push_back(r.artist == "A");
      return y;
    };
    const auto train = select_paintings(table, train_ids);
    const auto valid = select_paintings(table, valid_ids);
    const auto synth_test = select_paintings(table, synth_test_ids);
    const auto real_test = select_paintings(table, real_ids);
    const auto model = gbdt::fit(train.features, labels(train), valid.features, labels(valid),
                                 gbdt::TrainConfig{});
    const double same = roc_auc(gbdt::predict_proba(model, synth_test.features), labels(synth_test));
    const double cross = roc_auc(gbdt::predict_proba(model, real_test.features), labels(real_test));
    gap_sum += same - cross;
  }
  CHECK(std::abs(gap_sum / 5.0) <= 0.03);
}

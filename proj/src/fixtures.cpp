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

#include "attrib_forge/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "attrib_forge/error.hpp"
#include "attrib_forge/metrics.hpp"
#include "attrib_forge/seeding.hpp"

namespace attrib_forge::fixtures {
namespace {

using Vec = std::vector<double>;

constexpr std::uint64_t kMeansStream = 0x6D65616E73ull;
constexpr std::uint64_t kDimsStream = 0x64696D73ull;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vec random_unit(std::mt19937_64& rng, std::uint32_t dim,
                const std::vector<Vec>& orthogonal_to) {
  std::normal_distribution<double> normal(0.0, 1.0);
  while (true) {
    Vec v(dim);
    for (auto& x : v) x = normal(rng);
    // Modified Gram-Schmidt against the given orthonormal set.
    for (const auto& q : orthogonal_to) {
      const double proj = dot(v, q);
      for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * q[i];
    }
    const double norm = std::sqrt(dot(v, v));
    if (norm < 1e-9) continue;
    for (auto& x : v) x /= norm;
    return v;
  }
}

std::string padded(std::uint32_t value, std::uint32_t count) {
  std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
  auto s = std::to_string(value);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

std::uint64_t painting_stream(std::uint64_t seed, std::string_view painting_id,
                              std::uint64_t tag) {
  return mix_seed(mix_seed(seed, hash_name(painting_id)), tag);
}

void fill_records(EmbeddingSet& set, const PaintingEntry& entry, const Vec& mean,
                  double sigma, std::uint64_t stream,
                  const std::vector<PatchOffset>& offsets) {
  std::mt19937_64 rng(stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t p = 0; p < offsets.size(); ++p) {
    EmbeddingRecord rec;
    rec.painting_id = entry.painting_id;
    rec.patch_index = static_cast<std::uint32_t>(p);
    rec.x_offset = offsets[p].x;
    rec.y_offset = offsets[p].y;
    rec.values.resize(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
      rec.values[i] = static_cast<float>(mean[i] + sigma * normal(rng));
    }
    set.records.push_back(std::move(rec));
  }
}

std::vector<double> parse_doubles(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string token(text.substr(start, comma - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw FormatError("oracle: bad number '" + token + "'");
    }
    if (used != token.size()) throw FormatError("oracle: bad number '" + token + "'");
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

std::string join_doubles(const Vec& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt::format("{}", v[i]);
  }
  return out;
}

}  // namespace

void FixtureSpec::validate() const {
  if (artists.empty()) throw DataError("fixture needs at least one artist");
  std::set<std::string> names;
  for (const auto& a : artists) {
    if (a.name.empty()) throw DataError("fixture artist name is empty");
    if (a.name.find_first_of("\t\n\r ,#=") != std::string::npos) {
      throw DataError("fixture artist name '" + a.name +
                      "' contains a reserved character");
    }
    if (!names.insert(a.name).second) {
      throw DataError("duplicate fixture artist '" + a.name + "'");
    }
    if (a.n_real + a.n_synthetic == 0) {
      throw DataError("fixture artist '" + a.name + "' has no paintings");
    }
  }
  if (dim < 2) throw DataError("fixture dim must be >= 2");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DataError("sigma must be > 0");
  if (!(separation > 0.0) || !std::isfinite(separation)) {
    throw DataError("separation must be > 0");
  }
  if (!(domain_gap >= 0.0) || !std::isfinite(domain_gap)) {
    throw DataError("domain_gap must be >= 0");
  }
  if (patches_per_painting < 1) throw DataError("patches_per_painting must be >= 1");
  if (min_side_px < 1 || min_side_px > max_side_px) {
    throw DataError("painting side range must satisfy 1 <= min <= max");
  }
  if (grid) {
    attrib_forge::validate(*grid);
    if (min_side_px < grid->patch_size) {
      throw DataError("fixture paintings must be at least one patch wide");
    }
  }
}

std::vector<FixtureArtist> default_artists(std::size_t count, std::uint32_t n_synthetic) {
  static const std::vector<std::pair<std::string, std::uint32_t>> kCorpus = {
      {"GD", 7}, {"GR", 13}, {"TG", 23}, {"GM", 22}, {"JN", 11}, {"TB", 14}, {"JH", 9}};
  std::vector<FixtureArtist> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i < kCorpus.size()) {
      out.push_back({kCorpus[i].first, kCorpus[i].second, n_synthetic});
    } else {
      out.push_back({"A" + std::to_string(i + 1), 10, n_synthetic});
    }
  }
  return out;
}

const std::vector<double>& FixtureOracle::mean(std::string_view artist,
                                               Domain domain) const {
  auto it = std::find(artists.begin(), artists.end(), artist);
  if (it == artists.end()) {
    throw DataError("unknown artist '" + std::string(artist) + "' in fixture oracle");
  }
  const auto i = static_cast<std::size_t>(it - artists.begin());
  return domain == Domain::kReal ? real_means[i] : synthetic_means[i];
}

Fixture generate(const FixtureSpec& spec) {
  spec.validate();
  const std::size_t n_artists = spec.artists.size();
  Fixture fx;
  auto& oracle = fx.oracle;
  oracle.dim = spec.dim;
  oracle.sigma = spec.sigma;

  std::mt19937_64 rng(mix_seed(spec.seed, kMeansStream));
  std::vector<Vec> directions;  // u_a
  std::vector<Vec> shifts;      // v_a
  const bool full_basis = spec.dim >= 2 * n_artists;
  const bool artist_basis = spec.dim >= n_artists + 1;
  for (std::size_t a = 0; a < n_artists; ++a) {
    directions.push_back(random_unit(rng, spec.dim, artist_basis ? directions : std::vector<Vec>{}));
  }
  for (std::size_t a = 0; a < n_artists; ++a) {
    std::vector<Vec> against;
    if (full_basis) {
      against = directions;
      against.insert(against.end(), shifts.begin(), shifts.end());
    } else if (artist_basis) {
      against = directions;
    }
    shifts.push_back(random_unit(rng, spec.dim, against));
  }

  std::vector<PaintingEntry> entries;
  std::mt19937_64 dims_rng(mix_seed(spec.seed, kDimsStream));
  std::uniform_int_distribution<std::uint32_t> side(spec.min_side_px, spec.max_side_px);
  for (std::size_t a = 0; a < n_artists; ++a) {
    const auto& artist = spec.artists[a];
    oracle.artists.push_back(artist.name);
    Vec real(spec.dim);
    Vec synthetic(spec.dim);
    for (std::size_t i = 0; i < spec.dim; ++i) {
      real[i] = spec.separation * directions[a][i];
      synthetic[i] = real[i] + spec.domain_gap * shifts[a][i];
    }
    oracle.real_means.push_back(std::move(real));
    oracle.synthetic_means.push_back(std::move(synthetic));

    for (std::uint32_t r = 0; r < artist.n_real; ++r) {
      const auto w = side(dims_rng);
      const auto h = side(dims_rng);
      entries.push_back({artist.name + "_r" + padded(r, artist.n_real), artist.name,
                         Domain::kReal, w, h, std::nullopt});
    }
    for (std::uint32_t s = 0; s < artist.n_synthetic; ++s) {
      const auto w = side(dims_rng);
      const auto h = side(dims_rng);
      entries.push_back({artist.name + "_s" + padded(s, artist.n_synthetic), artist.name,
                         Domain::kSynthetic, w, h, s});
    }
  }
  fx.manifest = make_manifest(std::move(entries));

  if (spec.grid) {
    fx.embeddings = generate_embeddings(spec, fx.manifest, oracle, *spec.grid);
  } else {
    fx.embeddings.dim = spec.dim;
    fx.embeddings.source_dims = {spec.dim};
    const std::vector<PatchOffset> offsets(spec.patches_per_painting);
    for (const auto& e : fx.manifest.entries) {
      fill_records(fx.embeddings, e, oracle.mean(e.artist, e.domain), spec.sigma,
                   painting_stream(spec.seed, e.painting_id, 0), offsets);
    }
  }
  return fx;
}

EmbeddingSet generate_embeddings(const FixtureSpec& spec, const DatasetManifest& manifest,
                                 const FixtureOracle& oracle, const GridSpec& grid) {
  attrib_forge::validate(grid);
  const auto grids = grid_for_manifest(manifest, grid);
  EmbeddingSet set;
  set.dim = oracle.dim;
  set.source_dims = {oracle.dim};
  const std::uint64_t tag = grid.strategy == Strategy::kM1 ? 1 : 2;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    fill_records(set, e, oracle.mean(e.artist, e.domain), oracle.sigma,
                 painting_stream(spec.seed, e.painting_id, tag), grids[i].offsets);
  }
  return set;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

BayesAuc bayes_auc(const FixtureOracle& oracle, std::string_view artist,
                   const std::vector<std::string>& rest, Domain domain,
                   std::uint64_t samples_per_class, std::uint64_t seed) {
  const Vec& pos_mean = oracle.mean(artist, domain);
  if (rest.empty()) throw DataError("bayes_auc needs at least one negative artist");
  std::vector<const Vec*> neg_means;
  for (const auto& b : rest) {
    if (b == artist) throw DataError("artist '" + b + "' cannot be its own negative");
    neg_means.push_back(&oracle.mean(b, domain));
  }
  const double sigma = oracle.sigma;
  if (neg_means.size() == 1) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < pos_mean.size(); ++i) {
      const double d = pos_mean[i] - (*neg_means[0])[i];
      d2 += d * d;
    }
    return {normal_cdf(std::sqrt(d2) / (sigma * std::numbers::sqrt2)), false};
  }
  if (samples_per_class < 1) throw DataError("bayes_auc needs samples");

  // Log-likelihood ratio of the positive Gaussian against the negative
  // mixture; the shared normalizing constants cancel.
  auto score = [&](const Vec& x) {
    auto log_kernel = [&](const Vec& mu) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - mu[i];
        d2 += d * d;
      }
      return -d2 / (2.0 * sigma * sigma);
    };
    std::vector<double> neg(neg_means.size());
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < neg_means.size(); ++k) {
      neg[k] = log_kernel(*neg_means[k]);
      peak = std::max(peak, neg[k]);
    }
    double sum = 0.0;
    for (double v : neg) sum += std::exp(v - peak);
    return log_kernel(pos_mean) - (peak + std::log(sum / static_cast<double>(neg.size())));
  };

  std::mt19937_64 rng(mix_seed(seed, hash_name(artist)));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, neg_means.size() - 1);
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  scores.reserve(2 * samples_per_class);
  labels.reserve(2 * samples_per_class);
  Vec x(pos_mean.size());
  for (std::uint64_t s = 0; s < samples_per_class; ++s) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = pos_mean[i] + sigma * normal(rng);
    scores.push_back(score(x));
    labels.push_back(1);
    const Vec& mu = *neg_means[pick(rng)];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = mu[i] + sigma * normal(rng);
    scores.push_back(score(x));
    labels.push_back(0);
  }
  return {roc_auc(scores, labels), true};
}

std::string format_oracle(const FixtureOracle& oracle) {
  std::string out;
  out += fmt::format("dim={}\n", oracle.dim);
  out += fmt::format("sigma={}\n", oracle.sigma);
  std::string names;
  for (std::size_t i = 0; i < oracle.artists.size(); ++i) {
    if (i) names += ',';
    names += oracle.artists[i];
  }
  out += "artists=" + names + "\n";
  for (std::size_t i = 0; i < oracle.artists.size(); ++i) {
    out += "mean." + oracle.artists[i] + ".real=" + join_doubles(oracle.real_means[i]) + "\n";
    out += "mean." + oracle.artists[i] + ".synthetic=" +
           join_doubles(oracle.synthetic_means[i]) + "\n";
  }
  return out;
}

FixtureOracle parse_oracle(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("oracle: line without '=': " + line);
    if (!kv.emplace(line.substr(0, eq), line.substr(eq + 1)).second) {
      throw FormatError("oracle: duplicate key " + line.substr(0, eq));
    }
  }
  auto take = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("oracle: missing key '" + key + "'");
    return it->second;
  };
  FixtureOracle o;
  const auto dims = parse_doubles(take("dim"));
  if (dims.size() != 1 || dims[0] < 1 || dims[0] != std::floor(dims[0])) {
    throw FormatError("oracle: bad dim");
  }
  o.dim = static_cast<std::uint32_t>(dims[0]);
  const auto sigma = parse_doubles(take("sigma"));
  if (sigma.size() != 1 || !(sigma[0] > 0.0)) throw FormatError("oracle: bad sigma");
  o.sigma = sigma[0];
  std::string names = take("artists");
  std::size_t start = 0;
  while (start <= names.size()) {
    auto comma = names.find(',', start);
    if (comma == std::string::npos) comma = names.size();
    o.artists.push_back(names.substr(start, comma - start));
    start = comma + 1;
  }
  for (const auto& a : o.artists) {
    o.real_means.push_back(parse_doubles(take("mean." + a + ".real")));
    o.synthetic_means.push_back(parse_doubles(take("mean." + a + ".synthetic")));
    if (o.real_means.back().size() != o.dim || o.synthetic_means.back().size() != o.dim) {
      throw FormatError("oracle: mean of '" + a + "' has the wrong dimension");
    }
  }
  if (kv.size() != 3 + 2 * o.artists.size()) throw FormatError("oracle: unknown keys");
  return o;
}

void write_oracle(const FixtureOracle& oracle, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << format_oracle(oracle);
  if (!out) throw DataError("write failed for '" + path + "'");
}

FixtureOracle read_oracle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open oracle '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_oracle(buffer.str());
}

}  // namespace attrib_forge::fixtures

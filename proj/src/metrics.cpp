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

#include "attrib_forge/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "attrib_forge/error.hpp"

namespace attrib_forge {
namespace {

ClassMetrics class_metrics(std::uint64_t hit, std::uint64_t false_alarm,
                           std::uint64_t miss) {
  ClassMetrics m;
  const auto predicted = hit + false_alarm;
  const auto actual = hit + miss;
  m.precision = predicted == 0 ? 0.0 : static_cast<double>(hit) / predicted;
  m.recall = actual == 0 ? 0.0 : static_cast<double>(hit) / actual;
  const double sum = m.precision + m.recall;
  m.f1 = sum == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / sum;
  return m;
}

std::string fixed6(double v) {
  if (!std::isfinite(v)) return "NA";
  return fmt::format("{:.6f}", v);
}

std::string full(double v) {
  if (!std::isfinite(v)) return "NA";
  return fmt::format("{}", v);
}

double parse_double(std::string_view text) {
  if (text == "NA") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("bad number '" + std::string(text) + "' in eval file");
  }
  return v;
}

std::uint64_t parse_count(std::string_view text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("bad count '" + std::string(text) + "' in eval file");
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

constexpr std::string_view kEvalHeader =
    "artist,setting,roc_auc,accuracy,pos_precision,pos_recall,pos_f1,"
    "neg_precision,neg_recall,neg_f1,tp,fp,tn,fn,threshold,"
    "ext_painting_accuracy";

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("roc_auc: scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::uint64_t n_pos = 0;
  for (auto y : labels) n_pos += (y != 0);
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("roc_auc undefined: labels contain a single class");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of 1-based midranks of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    std::uint64_t pos_in_run = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      pos_in_run += (labels[order[j]] != 0);
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += midrank * static_cast<double>(pos_in_run);
    i = j;
  }
  const double p = static_cast<double>(n_pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(n_neg));
}

EvalResult classify_eval(std::span<const double> scores,
                         std::span<const std::uint8_t> labels, double threshold) {
  if (scores.empty()) throw DataError("classify_eval: empty input");
  if (scores.size() != labels.size()) {
    throw DataError("classify_eval: scores and labels differ in length");
  }
  if (!std::isfinite(threshold)) throw DataError("threshold must be finite");
  EvalResult r;
  r.threshold = threshold;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] != 0;
    if (predicted && actual) ++r.confusion.tp;
    if (predicted && !actual) ++r.confusion.fp;
    if (!predicted && !actual) ++r.confusion.tn;
    if (!predicted && actual) ++r.confusion.fn;
  }
  const auto& c = r.confusion;
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  r.positive = class_metrics(c.tp, c.fp, c.fn);
  r.negative = class_metrics(c.tn, c.fn, c.fp);
  const bool both = (c.tp + c.fn) > 0 && (c.tn + c.fp) > 0;
  r.roc_auc = both ? roc_auc(scores, labels) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double painting_accuracy(std::span<const double> scores,
                         std::span<const std::uint8_t> labels,
                         std::span<const std::string> groups, double threshold) {
  if (scores.size() != labels.size() || scores.size() != groups.size()) {
    throw DataError("painting_accuracy: input lengths differ");
  }
  if (scores.empty()) throw DataError("painting_accuracy: empty input");
  struct Acc {
    double sum = 0.0;
    std::size_t count = 0;
    std::uint8_t label = 0;
  };
  std::map<std::string_view, Acc> by_painting;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto [it, inserted] = by_painting.try_emplace(groups[i]);
    if (inserted) {
      it->second.label = labels[i];
    } else if (it->second.label != labels[i]) {
      throw DataError("painting '" + groups[i] + "' has patches with mixed labels");
    }
    it->second.sum += scores[i];
    ++it->second.count;
  }
  std::size_t correct = 0;
  for (const auto& [id, acc] : by_painting) {
    const bool predicted = acc.sum / static_cast<double>(acc.count) >= threshold;
    correct += (predicted == (acc.label != 0));
  }
  return static_cast<double>(correct) / static_cast<double>(by_painting.size());
}

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kRocAuc: return "roc_auc";
    case Metric::kPrecision: return "precision";
    case Metric::kRecall: return "recall";
    case Metric::kF1: return "f1";
    case Metric::kAccuracy: return "accuracy";
  }
  return "unknown";
}

double metric_value(const EvalResult& result, Metric metric) {
  switch (metric) {
    case Metric::kRocAuc: return result.roc_auc;
    case Metric::kPrecision: return result.positive.precision;
    case Metric::kRecall: return result.positive.recall;
    case Metric::kF1: return result.positive.f1;
    case Metric::kAccuracy: return result.accuracy;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

const EvalResult* ExperimentReport::cell(const std::string& artist,
                                         const std::string& setting) const {
  auto it = cells_.find({artist, setting});
  return it == cells_.end() ? nullptr : &it->second;
}

std::optional<double> ExperimentReport::value(const std::string& artist,
                                              const std::string& setting,
                                              Metric metric) const {
  const auto* r = cell(artist, setting);
  if (r == nullptr) return std::nullopt;
  return metric_value(*r, metric);
}

std::optional<Extreme> ExperimentReport::extreme(const std::string& setting,
                                                 Metric metric) const {
  std::optional<Extreme> out;
  for (const auto& artist : artists_) {
    auto v = value(artist, setting, metric);
    if (!v || !std::isfinite(*v)) continue;
    if (!out) {
      out = Extreme{artist, *v, artist, *v};
      continue;
    }
    if (*v > out->best) {
      out->best = *v;
      out->best_artist = artist;
    }
    if (*v < out->worst) {
      out->worst = *v;
      out->worst_artist = artist;
    }
  }
  return out;
}

ExperimentReport aggregate_report(const std::vector<ReportEntry>& entries) {
  if (entries.empty()) throw DataError("aggregate_report: no results");
  ExperimentReport report;
  for (const auto& e : entries) {
    if (std::find(report.artists_.begin(), report.artists_.end(), e.artist) ==
        report.artists_.end()) {
      report.artists_.push_back(e.artist);
    }
    if (std::find(report.settings_.begin(), report.settings_.end(), e.setting) ==
        report.settings_.end()) {
      report.settings_.push_back(e.setting);
    }
    if (!report.cells_.emplace(std::pair{e.artist, e.setting}, e.result).second) {
      throw DataError("conflicting results for artist '" + e.artist +
                      "' in setting '" + e.setting + "'");
    }
  }
  return report;
}

std::string heatmap_csv(const ExperimentReport& report, Metric metric) {
  std::string out = "artist";
  for (const auto& s : report.settings()) out += "," + s;
  out += '\n';
  for (const auto& a : report.artists()) {
    out += a;
    for (const auto& s : report.settings()) {
      auto v = report.value(a, s, metric);
      out += ",";
      out += v ? fixed6(*v) : "NA";
    }
    out += '\n';
  }
  return out;
}

std::string summary_csv(const ExperimentReport& report) {
  std::string out = "setting,metric,best_artist,best,worst_artist,worst\n";
  for (const auto& s : report.settings()) {
    for (auto m : kAllMetrics) {
      auto ex = report.extreme(s, m);
      if (ex) {
        out += fmt::format("{},{},{},{},{},{}\n", s, metric_name(m),
                           ex->best_artist, fixed6(ex->best), ex->worst_artist,
                           fixed6(ex->worst));
      } else {
        out += fmt::format("{},{},NA,NA,NA,NA\n", s, metric_name(m));
      }
    }
  }
  for (const auto& [setting, message] : report.failures) {
    std::string flat = message;
    std::replace(flat.begin(), flat.end(), ',', ';');
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    out += fmt::format("# failed,{},{}\n", setting, flat);
  }
  return out;
}

std::string format_eval_csv(const ReportEntry& entry) {
  if (entry.artist.find(',') != std::string::npos ||
      entry.setting.find(',') != std::string::npos) {
    throw DataError("artist and setting names must not contain commas");
  }
  const auto& r = entry.result;
  const auto& c = r.confusion;
  return fmt::format(
      "{}\n{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", kEvalHeader,
      entry.artist, entry.setting, full(r.roc_auc), full(r.accuracy),
      full(r.positive.precision), full(r.positive.recall), full(r.positive.f1),
      full(r.negative.precision), full(r.negative.recall), full(r.negative.f1),
      c.tp, c.fp, c.tn, c.fn, full(r.threshold),
      r.painting_accuracy ? full(*r.painting_accuracy) : "NA");
}

ReportEntry parse_eval_csv(std::string_view text) {
  auto nl = text.find('\n');
  if (nl == std::string_view::npos || text.substr(0, nl) != kEvalHeader) {
    throw FormatError("eval file has an unexpected header");
  }
  auto body = text.substr(nl + 1);
  if (auto end = body.find('\n'); end != std::string_view::npos) {
    if (!body.substr(end + 1).empty()) {
      throw FormatError("eval file must hold exactly one result row");
    }
    body = body.substr(0, end);
  }
  auto f = split_commas(body);
  if (f.size() != 16) {
    throw FormatError("eval row has " + std::to_string(f.size()) +
                      " fields, expected 16");
  }
  ReportEntry e;
  e.artist = std::string(f[0]);
  e.setting = std::string(f[1]);
  auto& r = e.result;
  r.roc_auc = parse_double(f[2]);
  r.accuracy = parse_double(f[3]);
  r.positive = {parse_double(f[4]), parse_double(f[5]), parse_double(f[6])};
  r.negative = {parse_double(f[7]), parse_double(f[8]), parse_double(f[9])};
  r.confusion = {parse_count(f[10]), parse_count(f[11]), parse_count(f[12]),
                 parse_count(f[13])};
  r.threshold = parse_double(f[14]);
  if (f[15] != "NA") r.painting_accuracy = parse_double(f[15]);
  return e;
}

}  // namespace attrib_forge

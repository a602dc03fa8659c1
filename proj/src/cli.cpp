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

#include "attrib_forge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "attrib_forge/data_io.hpp"
#include "attrib_forge/error.hpp"
#include "attrib_forge/fixtures.hpp"
#include "attrib_forge/gbdt.hpp"
#include "attrib_forge/harness.hpp"
#include "attrib_forge/metrics.hpp"
#include "attrib_forge/patch_grid.hpp"
#include "attrib_forge/run_config.hpp"

namespace attrib_forge {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string output_root(const RunConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  if (const char* env = std::getenv("ATTRIB_FORGE_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "runs";
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

fs::path new_run_dir(const std::string& root, const std::string& run_name) {
  if (!run_name.empty()) return fs::path(root) / run_name;
  const std::string stamp = timestamp();
  fs::path dir = fs::path(root) / stamp;
  for (int i = 1; fs::exists(dir); ++i) dir = fs::path(root) / (stamp + "-" + std::to_string(i));
  return dir;
}

struct LoadedData {
  DatasetManifest manifest;
  std::optional<EmbeddingSet> m1;
  std::optional<EmbeddingSet> m2;

  GridEmbeddings view() const {
    return {m1 ? &*m1 : nullptr, m2 ? &*m2 : nullptr};
  }
};

LoadedData load_data(const RunConfig& cfg) {
  if (cfg.manifest.empty()) throw DataError("--manifest is required");
  LoadedData data;
  data.manifest = read_manifest(cfg.manifest);
  if (!cfg.embeddings_m1.empty()) data.m1 = read_embeddings(cfg.embeddings_m1);
  if (!cfg.embeddings_m2.empty()) data.m2 = read_embeddings(cfg.embeddings_m2);
  if (!data.m1 && !data.m2) throw DataError("--embeddings is required");
  return data;
}

std::string timings_csv(const SuiteResult& suite) {
  std::string out = "setting,seconds\n";
  for (const auto& [setting, seconds] : suite.seconds) {
    out += fmt::format("{},{:.3f}\n", setting_name(setting), seconds);
  }
  return out;
}

void finish_run(const fs::path& dir, const SuiteResult& suite, const RunConfig& cfg,
                std::ostream& out, std::ostream& err) {
  for (const auto& run : suite.runs) write_experiment(run, dir.string());
  write_report(suite.report, dir.string());
  write_text(dir / "config_echo.json", format_run_config(cfg));
  write_text(dir / "timings.csv", timings_csv(suite));
  for (const auto& [setting, message] : suite.report.failures) {
    err << "setting " << setting << " failed: " << message << '\n';
  }
  out << dir.string() << '\n';
}

int cmd_grid(const RunConfig& cfg, const std::string& strategy, const std::string& output,
             std::ostream& out) {
  if (cfg.manifest.empty()) throw DataError("--manifest is required");
  const auto manifest = read_manifest(cfg.manifest);
  GridSpec spec;
  spec.patch_size = cfg.patch_size;
  spec.overlap_factor = cfg.overlap_factor;
  spec.strategy = parse_strategy(strategy);
  const auto dump = format_grid_dump(grid_for_manifest(manifest, spec));
  if (output.empty()) {
    out << dump;
  } else {
    write_text(output, dump);
  }
  return kExitOk;
}

int cmd_fixture(const RunConfig& cfg, std::ostream& out) {
  const auto spec = fixture_spec(cfg);
  const auto fx = fixtures::generate(spec);
  GridSpec m2 = *spec.grid;
  m2.strategy = Strategy::kM2;
  const auto m2_set = fixtures::generate_embeddings(spec, fx.manifest, fx.oracle, m2);
  const fs::path dir = output_root(cfg);
  fs::create_directories(dir);
  write_manifest(fx.manifest, (dir / "manifest.tsv").string());
  write_embeddings(fx.embeddings, (dir / "embeddings_m1.aemb").string());
  write_embeddings(m2_set, (dir / "embeddings_m2.aemb").string());
  fixtures::write_oracle(fx.oracle, (dir / "oracle.txt").string());
  out << dir.string() << '\n';
  return kExitOk;
}

int cmd_experiment(const RunConfig& cfg, const std::string& run_name, std::ostream& out,
                   std::ostream& err) {
  const auto setting = parse_setting(cfg.setting);
  const auto exp_cfg = experiment_config(cfg, setting);
  const auto data = load_data(cfg);
  SuiteResult suite;
  const auto start = std::chrono::steady_clock::now();
  suite.runs.push_back(run_experiment(data.manifest, data.view(), exp_cfg));
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  suite.seconds.emplace_back(setting, elapsed.count());
  suite.report = aggregate_report(report_entries(suite.runs.front()));
  const auto dir = new_run_dir(output_root(cfg), run_name);
  fs::create_directories(dir);
  finish_run(dir, suite, cfg, out, err);
  return kExitOk;
}

int cmd_suite(const RunConfig& cfg, const std::string& run_name, std::ostream& out,
              std::ostream& err) {
  const auto settings = parse_settings(cfg.settings);
  const auto base = experiment_config(cfg, Setting::kRealOnly);
  const auto data = load_data(cfg);
  const auto suite = run_suite(data.manifest, data.view(), settings, base);
  const auto dir = new_run_dir(output_root(cfg), run_name);
  fs::create_directories(dir);
  finish_run(dir, suite, cfg, out, err);
  return suite.runs.empty() ? kExitDataError : kExitOk;
}

int cmd_train(const RunConfig& cfg, const std::string& artist, const std::string& model_path,
              std::ostream& out) {
  const auto exp_cfg = experiment_config(cfg, parse_setting(cfg.setting));
  const auto data = load_data(cfg);
  const auto tables = build_tables(data.manifest, data.view(), exp_cfg);
  const auto model = train_artist(tables, artist, exp_cfg.train);
  const std::string path =
      model_path.empty() ? (fs::path(output_root(cfg)) / "model.agbm").string() : model_path;
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  gbdt::save_model(model, path);
  out << path << '\n';
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& artist, const std::string& model_path,
                 const std::string& output, std::ostream& out) {
  if (model_path.empty()) throw DataError("--model is required");
  const auto exp_cfg = experiment_config(cfg, parse_setting(cfg.setting));
  const auto data = load_data(cfg);
  const auto tables = build_tables(data.manifest, data.view(), exp_cfg);
  const auto model = gbdt::load_model(model_path);
  const auto eval = evaluate_artist(tables, artist, model, exp_cfg.threshold);
  const auto text = format_eval_csv({artist, cfg.setting, eval});
  if (output.empty()) {
    out << text;
  } else {
    write_text(output, text);
  }
  return kExitOk;
}

int cmd_report(const RunConfig& cfg, const std::vector<std::string>& run_dirs,
               std::ostream& out) {
  std::vector<ReportEntry> entries;
  for (const auto& run : run_dirs) {
    if (!fs::is_directory(run)) throw DataError("run directory '" + run + "' not found");
    std::vector<fs::path> setting_dirs;
    for (const auto& d : fs::directory_iterator(run)) {
      if (d.is_directory()) setting_dirs.push_back(d.path());
    }
    // Canonical setting order first, anything else after, by name.
    auto rank = [](const fs::path& p) {
      for (std::size_t i = 0; i < kAllSettings.size(); ++i) {
        if (p.filename() == setting_name(kAllSettings[i])) return i;
      }
      return kAllSettings.size();
    };
    std::sort(setting_dirs.begin(), setting_dirs.end(), [&](const fs::path& a, const fs::path& b) {
      return std::pair(rank(a), a.filename()) < std::pair(rank(b), b.filename());
    });
    std::size_t found = 0;
    for (const auto& sd : setting_dirs) {
      std::vector<fs::path> files;
      for (const auto& ad : fs::directory_iterator(sd)) {
        if (ad.is_directory() && fs::exists(ad.path() / "eval.csv")) {
          files.push_back(ad.path() / "eval.csv");
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        entries.push_back(parse_eval_csv(read_text(f)));
        ++found;
      }
    }
    if (found == 0) throw DataError("run directory '" + run + "' holds no eval.csv files");
  }
  const auto report = aggregate_report(entries);
  const std::string dir = output_root(cfg);
  write_report(report, dir);
  out << dir << '\n';
  return kExitOk;
}

std::string keys_footer() {
  std::string text = "\nConfig keys (JSON path / flag):\n";
  for (const auto& k : config_keys()) {
    text += fmt::format("  {:<34} {:<24} {}\n", k.key, k.flag, k.help);
  }
  text += "\nExit codes: 0 success, 2 usage or data error, 3 internal invariant violation.\n";
  return text;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"attrib_forge: patch-grid authorship attribution experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(keys_footer());

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> options;
  for (const auto& k : config_keys()) {
    options[k.key] = app.add_option(k.flag, raw[k.key], k.help + " [" + k.key + "]");
  }

  std::string strategy = "m1";
  std::string grid_output;
  auto* grid = app.add_subcommand("grid", "write the patch grid dump for a manifest");
  grid->add_option("--strategy", strategy, "m1 or m2");
  grid->add_option("--output", grid_output, "dump file (default stdout)");

  auto* fixture = app.add_subcommand("fixture", "generate Gaussian fixture data and oracle");

  std::string artist;
  std::string model_path;
  auto* train = app.add_subcommand("train", "train one artist's model for a setting");
  train->add_option("--artist", artist, "target artist")->required();
  train->add_option("--model", model_path, "model output path");

  std::string eval_output;
  auto* evaluate = app.add_subcommand("evaluate", "score a setting's test patches with a model");
  evaluate->add_option("--artist", artist, "target artist")->required();
  evaluate->add_option("--model", model_path, "model file")->required();
  evaluate->add_option("--output", eval_output, "eval CSV path (default stdout)");

  std::string run_name;
  auto* experiment = app.add_subcommand("experiment", "run one setting for every artist");
  experiment->add_option("--run-name", run_name, "run directory name (default UTC timestamp)");
  auto* suite = app.add_subcommand("suite", "run several settings and aggregate the report");
  suite->add_option("--run-name", run_name, "run directory name (default UTC timestamp)");

  std::vector<std::string> run_dirs;
  auto* report = app.add_subcommand("report", "merge run directories into heatmap CSVs");
  report->add_option("runs", run_dirs, "run directories")->required();

  for (auto* sub : {grid, fixture, train, evaluate, experiment, suite, report}) {
    sub->fallthrough();
    sub->footer(keys_footer());
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = read_run_config(config_path);
    for (const auto& k : config_keys()) {
      if (options[k.key]->count() > 0) set_config_value(cfg, k.key, raw[k.key]);
    }
    if (grid->parsed()) return cmd_grid(cfg, strategy, grid_output, out);
    if (fixture->parsed()) return cmd_fixture(cfg, out);
    if (train->parsed()) return cmd_train(cfg, artist, model_path, out);
    if (evaluate->parsed()) return cmd_evaluate(cfg, artist, model_path, eval_output, out);
    if (experiment->parsed()) return cmd_experiment(cfg, run_name, out, err);
    if (suite->parsed()) return cmd_suite(cfg, run_name, out, err);
    if (report->parsed()) return cmd_report(cfg, run_dirs, out);
    err << "error: no command\n";
    return kExitDataError;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
}

}  // namespace attrib_forge

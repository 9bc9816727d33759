// Copyright 2026 The Multiverse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: synth, validate, run, profile, curve, report.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "multiverse/config.hpp"
#include "multiverse/error.hpp"
#include "multiverse/hash.hpp"
#include "multiverse/report.hpp"
#include "multiverse/runner.hpp"

namespace mv = multiverse;

namespace {

struct Globals {
  std::string config;
  std::string out = "out";
  std::size_t workers = 0;  // 0 = take from config
  std::optional<std::uint64_t> master_seed;
};

// A manifest carries the config it was produced from; accept either.
mv::RunConfig load_config(const Globals& g) {
  if (g.config.empty()) throw mv::Error(mv::Errc::config_invalid, "--config is required");
  std::ifstream in(g.config, std::ios::binary);
  if (!in) throw mv::Error(mv::Errc::io, "cannot open " + g.config);
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(g.config).parent_path().string();
  const auto base = dir.empty() ? std::string(".") : dir;

  mv::RunConfig c;
  const auto doc = nlohmann::json::parse(ss.str(), nullptr, false);
  if (!doc.is_discarded() && doc.is_object() && doc.contains("config_source")) {
    c = mv::RunConfig::parse(doc["config_source"].get<std::string>(), base);
    c.master_seed = doc.at("master_seed").get<std::uint64_t>();
  } else {
    c = mv::RunConfig::parse(ss.str(), base);
  }
  if (g.master_seed) c.master_seed = *g.master_seed;
  return c;
}

int cmd_synth(const Globals& g) {
  const auto c = load_config(g);
  if (!c.synth) throw mv::Error(mv::Errc::config_invalid, "config has no synth section");
  const auto d = mv::materialize_dataset(c);
  std::filesystem::create_directories(g.out);
  const std::filesystem::path root(g.out);
  mv::write_dataset(d, (root / "dataset.csv").string(), (root / "events.csv").string());
  mv::emit_datasheet(d, (root / "datasheet.txt").string());
  std::cout << "subjects=" << d.size() << " hash=" << mv::to_hex(mv::dataset_hash(d)) << '\n';
  return 0;
}

int cmd_validate(const Globals& g) {
  const auto c = load_config(g);
  const auto report = mv::validate_universe(c.universe);
  std::cout << "raw=" << report.raw_paths << " admissible=" << report.admissible_paths << '\n';
  for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
  for (const auto& e : report.empty_rationales) std::cout << "warning: no rationale for " << e << '\n';
  return 0;
}

int cmd_run(const Globals& g) {
  const auto c = load_config(g);
  const std::size_t workers = g.workers ? g.workers : c.workers;
  const auto t0 = std::chrono::steady_clock::now();
  const auto run = mv::execute(c, workers);
  mv::write_outputs(run, g.out);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto view = mv::make_view(run);
  std::cout << mv::render_summary(mv::summarize(view), view);
  std::cout << "manifest hash: "
            << mv::manifest_hash(mv::build_manifest(run)) << '\n';
  std::cout << "wall clock: " << secs << " s on " << workers << " worker(s)\n";
  return 0;
}

int cmd_profile(const Globals& g, const std::string& subject) {
  const auto view = mv::load_view(g.out);
  const auto i = view.matrix.subject_index(subject);
  std::vector<double> row;
  for (auto j : view.matrix.admissible_columns()) {
    row.push_back(view.matrix.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  const auto p = mv::profile_row(subject, row, view.config.binning, view.config.abstain);
  std::cout << p.to_json().dump(2) << '\n';
  return 0;
}

int cmd_curve(const Globals& g, const std::string& subject, const std::string& format,
              const std::string& sort_name) {
  const auto view = mv::load_view(g.out);
  const auto data = mv::curve_data(view, subject);
  const auto sort = sort_name == "path_canonical" ? mv::CurveSort::path_canonical
                                                  : mv::CurveSort::score_asc;
  const auto dir = std::filesystem::path(g.out) / "curves";
  std::filesystem::create_directories(dir);
  const auto path = dir / (subject + "." + format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mv::Error(mv::Errc::io, "cannot write " + path.string());
  if (format == "svg") out << mv::render_curve_svg(data, sort);
  else mv::write_curve_csv(out, data, sort);
  std::cout << path.string() << '\n';
  return 0;
}

int cmd_report(const Globals& g) {
  const auto view = mv::load_view(g.out);
  std::cout << mv::render_summary(mv::summarize(view), view);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiverse analysis of risk-prediction pipelines"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Run configuration (JSON) or a manifest to replay");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--workers", g.workers, "Worker threads (default: config value)")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--master-seed", seed, "Override the config master seed");

  auto* synth = app.add_subcommand("synth", "Generate the synthetic dataset of a config");
  auto* validate = app.add_subcommand("validate", "Check a config and count its paths");
  auto* run = app.add_subcommand("run", "Execute every admissible path");
  auto* profile = app.add_subcommand("profile", "Print one subject's inconsistency profile");
  auto* curve = app.add_subcommand("curve", "Emit one subject's specification curve");
  auto* report = app.add_subcommand("report", "Global summary of a finished run");
  for (auto* sub : {synth, validate, run, profile, curve, report}) sub->fallthrough();

  std::string subject, format = "svg", sort = "score_asc";
  profile->add_option("--subject", subject, "Holdout subject id")->required();
  curve->add_option("--subject", subject, "Holdout subject id")->required();
  curve->add_option("--format", format, "svg or csv")->check(CLI::IsMember({"svg", "csv"}));
  curve->add_option("--sort", sort, "score_asc or path_canonical")
      ->check(CLI::IsMember({"score_asc", "path_canonical"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (seed_opt->count()) g.master_seed = seed;

  try {
    if (*synth) return cmd_synth(g);
    if (*validate) return cmd_validate(g);
    if (*run) return cmd_run(g);
    if (*profile) return cmd_profile(g, subject);
    if (*curve) return cmd_curve(g, subject, format, sort);
    if (*report) return cmd_report(g);
  } catch (const mv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "multiverse/csv.hpp"
#include "multiverse/error.hpp"
#include "multiverse/hash.hpp"
#include "multiverse/report.hpp"

namespace multiverse {

namespace {

std::string budget_label(double k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "lift@%g", k);
  return buf;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::uint64_t vector_hash(const Eigen::VectorXd& v) {
  std::uint64_t h = fnv1a64("");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    h = fnv1a64(format_double(v(i)), h);
    h = fnv1a64(",", h);
  }
  return h;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + p.string());
  out << text;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

nlohmann::json build_manifest(const RunResult& run) {
  nlohmann::json m;
  m["tool_version"] = kToolVersion;
  m["config_hash"] = to_hex(run.config.hash());
  m["config_source"] = run.config.source;
  m["dataset_hash"] = to_hex(dataset_hash(run.dataset));
  m["master_seed"] = run.config.master_seed;
  m["holdout"] = {{"fraction", run.config.holdout_fraction},
                  {"train_subjects", run.split.train.size()},
                  {"holdout_subjects", run.split.holdout.size()}};
  m["universe"] = {{"raw_paths", run.universe.raw_paths},
                   {"admissible_paths", run.universe.admissible_paths},
                   {"warnings", run.universe.warnings},
                   {"empty_rationales", run.universe.empty_rationales}};
  m["baseline_path"] = to_hex(run.baseline_path);
  m["rashomon"] = run.config.rashomon.to_json();
  m["estimators"] = {
      {"auc", "rank-sum, ties credited one half"},
      {"ece", "10 equal-width bins, weighted by bin mass"},
      {"lift", "top ceil(k N) by score, cutoff ties by ascending subject_id"},
      {"fairness_threshold", run.config.metrics.threshold},
      {"abstain", {{"range", run.config.abstain.range}, {"flip", run.config.abstain.flip}}}};
  m["caveats"] = {
      "abstention thresholds are tool defaults, not empirically derived values",
      "the set of paths explored is finite; observed inconsistency is a lower bound"};

  nlohmann::json paths = nlohmann::json::array();
  for (const auto& r : run.results) {
    nlohmann::json p;
    p["path_id"] = to_hex(r.path.path_id);
    p["seed"] = to_hex(r.seed);
    p["choices"] = r.path.choices_json(run.config.universe);
    p["status"] = r.ok ? "ok" : "failed";
    if (r.ok) {
      p["metrics_hash"] = to_hex(fnv1a64(canonical_json(r.metrics.to_json())));
      p["scores_hash"] = to_hex(vector_hash(r.scores));
      const auto col = run.matrix.path_index(r.path.path_id);
      p["admissible"] = col && run.matrix.admissible[*col];
    } else {
      p["reason"] = r.failure;
    }
    paths.push_back(std::move(p));
  }
  m["paths"] = std::move(paths);
  return m;
}

std::string manifest_hash(const nlohmann::json& manifest) {
  return to_hex(fnv1a64(canonical_json(manifest)));
}

std::string render_model_card(const RunResult& run, const PathResult& r) {
  const auto& u = run.config.universe;
  const auto& p = run.dataset.provenance;
  std::ostringstream out;
  out << "model card: path " << to_hex(r.path.path_id) << '\n';
  out << "\nintended use\n"
      << "  Audit artifact. Scores illustrate one admissible forking path of the\n"
      << "  multiverse; they are not meant to inform decisions about individuals.\n";
  out << "\ndata provenance\n"
      << "  source: " << p.source << '\n'
      << "  collection period: " << p.collection_period << '\n'
      << "  known biases: " << p.known_biases << '\n'
      << "  dataset hash: " << to_hex(dataset_hash(run.dataset)) << '\n'
      << "  training rows: " << r.train_rows << ", holdout rows: " << r.scores.size() << '\n';
  out << "\nchoices\n";
  for (std::size_t k = 0; k < u.dimensions.size(); ++k) {
    const auto& opt = u.dimensions[k].options[r.path.options[k]];
    out << "  " << u.dimensions[k].name() << ": " << opt.name;
    if (!opt.reasonableness.rationale.empty()) {
      out << " (" << to_string(opt.reasonableness.provenance) << ": "
          << opt.reasonableness.rationale << ")";
    }
    out << '\n';
  }
  out << "\nmetrics (holdout)\n"
      << "  auc: " << fixed(r.metrics.auc) << '\n'
      << "  brier: " << fixed(r.metrics.brier) << '\n'
      << "  ece: " << fixed(r.metrics.ece) << '\n';
  for (const auto& l : r.metrics.lift) {
    out << "  " << budget_label(l.budget) << ": " << fixed(l.lift) << " (top " << l.top_n
        << ", cutoff ties " << l.ties_at_cutoff << ")\n";
  }
  const auto& f = r.metrics.fairness;
  out << "\nfairness (threshold " << fixed(f.threshold, 2) << ")\n";
  for (const auto& g : f.groups) {
    out << "  " << g.group << ": n=" << g.n << " base_rate=" << fixed(g.base_rate)
        << " tpr=" << fixed(g.tpr) << " fpr=" << fixed(g.fpr)
        << " mean_score_y1=" << fixed(g.mean_score_y1) << " mean_score_y0=" << fixed(g.mean_score_y0)
        << " ece=" << fixed(g.ece) << '\n';
  }
  out << "  gaps: tpr=" << fixed(f.gaps.tpr) << " fpr=" << fixed(f.gaps.fpr)
      << " balance_positive=" << fixed(f.gaps.balance_positive)
      << " balance_negative=" << fixed(f.gaps.balance_negative) << " ece=" << fixed(f.gaps.ece)
      << '\n';
  const auto finding = impossibility_check(f, run.config.fairness_tolerance, r.metrics.auc);
  out << "  impossibility check: " << to_string(finding.kind) << ", " << finding.message << '\n';
  if (!r.warnings.empty()) {
    out << "\nwarnings\n";
    for (const auto& w : r.warnings) out << "  " << w << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

void write_paths_csv(std::ostream& out, const RunResult& run) {
  const auto& u = run.config.universe;
  csv::Row header{"path_id", "order"};
  for (const auto& d : u.dimensions) header.emplace_back(d.name());
  for (const char* h : {"status", "reason", "admissible", "auc", "brier", "ece"}) header.emplace_back(h);
  for (double k : run.config.metrics.lift_budgets) header.push_back(budget_label(k));
  for (const char* h : {"base_rate_gap", "tpr_gap", "fpr_gap", "balance_positive_gap",
                        "balance_negative_gap", "ece_gap", "roc_crosses_baseline", "train_rows",
                        "seed"}) {
    header.emplace_back(h);
  }
  csv::write_row(out, header);
  for (const auto& r : run.results) {
    csv::Row row{to_hex(r.path.path_id), std::to_string(r.order)};
    for (std::size_t k = 0; k < u.dimensions.size(); ++k) row.emplace_back(r.path.choice(u, k));
    row.emplace_back(r.ok ? "ok" : "failed");
    row.push_back(r.failure);
    if (!r.ok) {
      row.emplace_back("false");
      row.resize(header.size() - 1);
      row.push_back(to_hex(r.seed));
      csv::write_row(out, row);
      continue;
    }
    const auto col = run.matrix.path_index(r.path.path_id);
    row.emplace_back(col && run.matrix.admissible[*col] ? "true" : "false");
    const auto& m = r.metrics;
    row.push_back(format_double(m.auc));
    row.push_back(format_double(m.brier));
    row.push_back(format_double(m.ece));
    for (const auto& l : m.lift) row.push_back(format_double(l.lift));
    const auto& g = m.fairness.gaps;
    for (double v : {g.base_rate, g.tpr, g.fpr, g.balance_positive, g.balance_negative, g.ece}) {
      row.push_back(format_double(v));
    }
    row.emplace_back(!m.baseline_crossing ? "" : (m.baseline_crossing->crossed ? "true" : "false"));
    row.push_back(std::to_string(r.train_rows));
    row.push_back(to_hex(r.seed));
    csv::write_row(out, row);
  }
}

void write_subjects_csv(std::ostream& out, const RunResult& run) {
  csv::Row header{"subject_id", "paths", "min", "max", "range", "mean", "sd"};
  for (const auto& s : run.config.binning) {
    header.push_back(s.name + "_modal");
    header.push_back(s.name + "_entropy");
    header.push_back(s.name + "_flip_rate");
  }
  header.emplace_back("abstain");
  csv::write_row(out, header);
  for (const auto& p : run.profiles) {
    csv::Row row{p.subject_id, std::to_string(p.paths), format_double(p.min), format_double(p.max),
                 format_double(p.range), format_double(p.mean), format_double(p.sd)};
    for (const auto& s : p.schemes) {
      row.push_back(s.modal_label);
      row.push_back(format_double(s.entropy));
      row.push_back(format_double(s.flip_rate));
    }
    row.emplace_back(p.abstain ? "true" : "false");
    csv::write_row(out, row);
  }
}

void write_matrix_csv(std::ostream& out, const ScoreMatrix& m) {
  csv::Row header{"subject_id"};
  for (auto id : m.paths) header.push_back(to_hex(id));
  csv::write_row(out, header);
  for (std::size_t i = 0; i < m.subject_count(); ++i) {
    csv::Row row{m.subjects[i]};
    for (std::size_t j = 0; j < m.path_count(); ++j) {
      row.push_back(format_double(m.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    csv::write_row(out, row);
  }
}

void write_outputs(const RunResult& run, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  fs::create_directories(root / "curves");
  fs::create_directories(root / "cards");

  write_dataset(run.dataset, (root / "dataset.csv").string(), (root / "events.csv").string());
  emit_datasheet(run.dataset, (root / "datasheet.txt").string());

  const auto manifest = build_manifest(run);
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
  write_file(root / "manifest.hash", manifest_hash(manifest) + "\n");

  std::ostringstream paths, subjects, matrix;
  write_paths_csv(paths, run);
  write_subjects_csv(subjects, run);
  write_matrix_csv(matrix, run.matrix);
  write_file(root / "paths.csv", paths.str());
  write_file(root / "subjects.csv", subjects.str());
  write_file(root / "matrix.csv", matrix.str());

  for (auto j : run.matrix.admissible_columns()) {
    const auto* r = run.result_for(run.matrix.paths[j]);
    write_file(root / "cards" / (to_hex(r->path.path_id) + ".txt"), render_model_card(run, *r));
  }

  const RunView view = make_view(run);
  auto curve_subjects = run.config.curve_subjects;
  if (curve_subjects.empty()) curve_subjects = default_curve_subjects(run.profiles);
  for (const auto& id : curve_subjects) {
    const auto data = curve_data(view, id);
    std::ostringstream csv_text;
    write_curve_csv(csv_text, data);
    write_file(root / "curves" / (id + ".csv"), csv_text.str());
    write_file(root / "curves" / (id + ".svg"), render_curve_svg(data));
  }
}

// ---------------------------------------------------------------------------

RunView make_view(const RunResult& run) {
  RunView v;
  v.config = run.config;
  v.master_seed = run.config.master_seed;
  v.matrix = run.matrix;
  v.baseline_path = run.baseline_path;
  for (const auto& r : run.results) {
    if (!r.ok) {
      ++v.failed_paths;
      continue;
    }
    v.auc.push_back(r.metrics.auc);
    std::vector<std::string> c;
    for (std::size_t k = 0; k < run.config.universe.dimensions.size(); ++k) {
      c.emplace_back(r.path.choice(run.config.universe, k));
    }
    v.choices.push_back(std::move(c));
  }
  return v;
}

RunView load_view(const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(root / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io, std::string("manifest.json unreadable: ") + e.what());
  }
  RunView v;
  v.config = RunConfig::parse(manifest.at("config_source").get<std::string>(), out_dir);
  v.master_seed = manifest.at("master_seed").get<std::uint64_t>();
  v.config.master_seed = v.master_seed;
  v.baseline_path = from_hex(manifest.at("baseline_path").get<std::string>());

  std::ifstream matrix_in(root / "matrix.csv", std::ios::binary);
  if (!matrix_in) throw Error(Errc::io, "cannot read matrix.csv");
  const auto rows = csv::read(matrix_in);
  if (rows.empty()) throw Error(Errc::io, "matrix.csv is empty");
  for (std::size_t j = 1; j < rows[0].size(); ++j) v.matrix.paths.push_back(from_hex(rows[0][j]));
  v.matrix.S.resize(static_cast<Eigen::Index>(rows.size() - 1),
                    static_cast<Eigen::Index>(v.matrix.paths.size()));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    v.matrix.subjects.push_back(rows[i][0]);
    for (std::size_t j = 1; j < rows[i].size(); ++j) {
      v.matrix.S(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) =
          std::stod(rows[i][j]);
    }
  }

  std::ifstream paths_in(root / "paths.csv", std::ios::binary);
  if (!paths_in) throw Error(Errc::io, "cannot read paths.csv");
  const auto prow = csv::read(paths_in);
  const std::size_t dims = v.config.universe.dimensions.size();
  const auto& header = prow.at(0);
  const auto col_of = [&](std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(Errc::io, "paths.csv lacks column " + std::string(name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_status = col_of("status"), c_adm = col_of("admissible"), c_auc = col_of("auc");
  v.matrix.admissible.assign(v.matrix.paths.size(), false);
  v.auc.assign(v.matrix.paths.size(), 0.0);
  v.choices.assign(v.matrix.paths.size(), {});
  for (std::size_t i = 1; i < prow.size(); ++i) {
    const auto& r = prow[i];
    if (r[c_status] != "ok") {
      ++v.failed_paths;
      v.matrix.failures.push_back({from_hex(r[0]), r[c_status + 1]});
      continue;
    }
    const auto col = v.matrix.path_index(from_hex(r[0]));
    if (!col) throw Error(Errc::io, "paths.csv and matrix.csv disagree on " + r[0]);
    v.matrix.admissible[*col] = r[c_adm] == "true";
    v.auc[*col] = std::stod(r[c_auc]);
    v.choices[*col].assign(r.begin() + 2, r.begin() + 2 + static_cast<std::ptrdiff_t>(dims));
  }
  return v;
}

GlobalSummary summarize(const RunView& view) {
  GlobalSummary s;
  s.paths_failed = view.failed_paths;
  s.paths_total = view.matrix.path_count() + view.failed_paths;
  s.paths_admissible = view.matrix.admissible_columns().size();
  s.subjects = view.matrix.subject_count();
  const auto profiles = subject_profile(view.matrix, view.config.binning, view.config.abstain);
  for (const auto& p : profiles) {
    s.abstentions += p.abstain;
    s.max_range = std::max(s.max_range, p.range);
    s.mean_range += p.range;
  }
  if (!profiles.empty()) s.mean_range /= static_cast<double>(profiles.size());
  try {
    s.multiplicity = multiplicity_metrics(view.matrix, view.baseline_path, view.config.metrics.threshold);
  } catch (const Error& e) {
    s.multiplicity_error = e.what();
  }
  return s;
}

std::string render_summary(const GlobalSummary& s, const RunView& view) {
  std::ostringstream out;
  out << "paths: " << s.paths_total << " (" << s.paths_failed << " failed, " << s.paths_admissible
      << " admissible under " << view.config.rashomon.metric << " rule)\n";
  out << "subjects: " << s.subjects << '\n';
  out << "score range: max " << fixed(s.max_range) << ", mean " << fixed(s.mean_range) << '\n';
  out << "abstentions: " << s.abstentions << " (range > " << fixed(view.config.abstain.range, 2)
      << " or flip rate > " << fixed(view.config.abstain.flip, 2) << "; tool defaults)\n";
  out << "baseline path: " << to_hex(view.baseline_path) << '\n';
  if (s.multiplicity) {
    out << "ambiguity: " << fixed(s.multiplicity->ambiguity, 4) << '\n';
    out << "discrepancy: " << fixed(s.multiplicity->discrepancy, 4) << '\n';
  } else {
    out << "multiplicity: unavailable (" << s.multiplicity_error << ")\n";
  }
  out << "note: only a finite set of paths was explored; observed inconsistency is a lower bound\n";
  return out.str();
}

}  // namespace multiverse

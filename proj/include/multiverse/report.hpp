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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "multiverse/config.hpp"
#include "multiverse/inconsistency.hpp"
#include "multiverse/runner.hpp"

namespace multiverse {

// ---------------------------------------------------------------------------
// Manifest and model cards

/// Canonical manifest document. Wall-clock time and worker count are not
/// part of it: they cannot affect any score.
nlohmann::json build_manifest(const RunResult& run);
/// Hex FNV-1a of the canonical manifest serialization.
std::string manifest_hash(const nlohmann::json& manifest);

std::string render_model_card(const RunResult& run, const PathResult& path);

void write_paths_csv(std::ostream& out, const RunResult& run);
void write_subjects_csv(std::ostream& out, const RunResult& run);
void write_matrix_csv(std::ostream& out, const ScoreMatrix& m);

/// Writes every artifact of a run under out_dir (created if needed).
void write_outputs(const RunResult& run, const std::string& out_dir);

// ---------------------------------------------------------------------------
// What the read-side commands need, from a live run or an output directory.

struct RunView {
  RunConfig config;
  std::uint64_t master_seed = 0;
  ScoreMatrix matrix;                            // admissible = Rashomon decision
  std::vector<double> auc;                       // per matrix column
  std::vector<std::vector<std::string>> choices; // per matrix column, dimension order
  std::uint64_t baseline_path = 0;
  std::size_t failed_paths = 0;
};

RunView make_view(const RunResult& run);
/// Reads manifest.json, paths.csv and matrix.csv. Throws Error(io).
RunView load_view(const std::string& out_dir);

struct GlobalSummary {
  std::size_t paths_total = 0;
  std::size_t paths_failed = 0;
  std::size_t paths_admissible = 0;
  std::size_t subjects = 0;
  std::size_t abstentions = 0;
  std::optional<Multiplicity> multiplicity;
  std::string multiplicity_error;
  double max_range = 0.0;
  double mean_range = 0.0;
};

GlobalSummary summarize(const RunView& view);
std::string render_summary(const GlobalSummary& s, const RunView& view);

// ---------------------------------------------------------------------------
// Specification curves

enum class CurveSort { score_asc, path_canonical };

struct CurvePoint {
  std::uint64_t path_id = 0;
  std::vector<std::string> choices;
  double score = 0.0;
  bool admissible = false;
  double auc = 0.0;
};

struct CurveData {
  std::string subject_id;
  std::vector<std::string> dimensions;
  std::vector<std::vector<std::string>> options;  // per dimension
  std::vector<CurvePoint> points;                 // canonical order
  std::optional<double> baseline_score;
  BinningScheme bands;
};

/// Throws Error(unknown_subject).
CurveData curve_data(const RunView& view, std::string_view subject_id);

std::vector<std::size_t> curve_order(const CurveData& c, CurveSort sort);
void write_curve_csv(std::ostream& out, const CurveData& c, CurveSort sort = CurveSort::score_asc);
/// 900x600 two-panel chart. Line 2 is a generator comment carrying the
/// tool version.
std::string render_curve_svg(const CurveData& c, CurveSort sort = CurveSort::score_asc);

/// Subjects that get curves when the config names none: the widest and the
/// narrowest score range.
std::vector<std::string> default_curve_subjects(const std::vector<InconsistencyProfile>& p);

}  // namespace multiverse

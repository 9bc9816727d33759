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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "multiverse/metrics.hpp"

namespace multiverse {

struct PathFailure {
  std::uint64_t path_id = 0;
  std::string reason;
};

/// Scores of holdout subjects (rows) under completed paths (columns).
/// Failed paths have no column; they are listed in `failures`.
struct ScoreMatrix {
  std::vector<std::string> subjects;
  std::vector<std::uint64_t> paths;
  Eigen::MatrixXd S;
  std::vector<bool> admissible;  // one per column
  std::vector<PathFailure> failures;

  std::size_t subject_count() const { return subjects.size(); }
  std::size_t path_count() const { return paths.size(); }
  std::vector<std::size_t> admissible_columns() const;
  /// Throws Error(unknown_subject).
  std::size_t subject_index(std::string_view id) const;
  std::optional<std::size_t> path_index(std::uint64_t path_id) const;
};

/// Output of one path as handed to the merge step.
struct PathScores {
  std::size_t order = 0;  // canonical enumeration index
  std::uint64_t path_id = 0;
  std::optional<Eigen::VectorXd> scores;
  std::string failure;
};

/// Orders columns by canonical index whatever order `results` arrive in.
/// Throws Error(all_paths_failed) when no path produced scores.
ScoreMatrix build_score_matrix(const std::vector<std::string>& subjects,
                               std::vector<PathScores> results);

// ---------------------------------------------------------------------------

enum class RashomonMode { absolute, relative };

struct RashomonRule {
  std::string metric = "auc";
  RashomonMode mode = RashomonMode::absolute;
  /// Threshold (absolute) or epsilon (relative).
  double value = 0.70;

  static RashomonRule from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Marks columns whose metric passes the rule; metrics[j] belongs to
/// column j. For brier/ece lower is better and the inequalities flip.
/// Throws Error(empty_rashomon_set).
ScoreMatrix rashomon_filter(const ScoreMatrix& m, const std::vector<PathMetrics>& metrics,
                            const RashomonRule& rule);

// ---------------------------------------------------------------------------

struct BinningScheme {
  std::string name;
  std::vector<double> cuts;
  std::vector<std::string> labels;

  /// Throws Error(invalid_spec).
  void validate() const;
  std::size_t bin_count() const { return labels.size(); }
  /// Half-open bins [cut_k, cut_{k+1}); the top bin is closed.
  std::size_t bin_index(double score) const;
  /// Ordinal position normalized to [0,1].
  double position(double score) const;

  static BinningScheme equal_width(std::string name, std::vector<std::string> labels);
  static BinningScheme from_json(const nlohmann::json& j);
};

std::string bin_scores(double score, const BinningScheme& scheme);

struct BinDisagreement {
  std::string label_a;
  std::string label_b;
  double position_a = 0.0;
  double position_b = 0.0;
  /// |position_a - position_b| exceeds one normalized bin width of the finer
  /// scheme.
  bool disagree = false;
};

BinDisagreement bin_disagreement(double score, const BinningScheme& a, const BinningScheme& b);

// ---------------------------------------------------------------------------

struct AbstainRule {
  double range = 0.30;
  double flip = 0.25;
};

struct SchemeProfile {
  std::string scheme;
  std::vector<double> distribution;  // share of paths per bin
  double entropy = 0.0;              // normalized by log(#bins)
  std::size_t modal_bin = 0;         // ties go to the lowest bin
  std::string modal_label;
  double flip_rate = 0.0;
};

struct InconsistencyProfile {
  std::string subject_id;
  std::size_t paths = 0;
  double min = 0.0;
  double max = 0.0;
  double range = 0.0;
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
  std::vector<SchemeProfile> schemes;
  bool abstain = false;

  nlohmann::json to_json() const;
};

InconsistencyProfile profile_row(std::string subject_id, const std::vector<double>& scores,
                                 const std::vector<BinningScheme>& schemes,
                                 const AbstainRule& rule = {});

/// One profile per subject over the admissible columns.
std::vector<InconsistencyProfile> subject_profile(const ScoreMatrix& m,
                                                  const std::vector<BinningScheme>& schemes,
                                                  const AbstainRule& rule = {});

// ---------------------------------------------------------------------------

struct Multiplicity {
  double ambiguity = 0.0;
  double discrepancy = 0.0;
  /// Per admissible column, the share of subjects flipped against the baseline.
  std::vector<double> flip_share;
};

/// Decisions are score >= threshold. Throws Error(baseline_not_admissible).
Multiplicity multiplicity_metrics(const ScoreMatrix& m, std::uint64_t baseline_path,
                                  double threshold = kDefaultThreshold);

}  // namespace multiverse

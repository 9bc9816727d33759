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

#include "multiverse/data.hpp"
#include "multiverse/frame.hpp"
#include "multiverse/predicate.hpp"

namespace multiverse {

// ---------------------------------------------------------------------------
// Outcome derivation

struct OutcomeDefinition {
  EventKindSet failure_events = {EventKind::conviction};
  DegreeSet degrees = DegreeSet::all(3);
  JurisdictionSet jurisdictions = JurisdictionSet::all(2);
  std::int64_t window_days = 0;

  void validate() const;
  /// Accepts "window_days" or "window_years" (floored to days).
  static OutcomeDefinition from_json(const nlohmann::json& j);
};

/// y_i = 1 iff subject i has a matching event with
/// anchor_day < day <= anchor_day + window_days.
Eigen::VectorXd derive_labels(const Dataset& d, const OutcomeDefinition& def);

/// Labels plus the raw feature columns of every subject.
LabeledFrame derive_outcome(const Dataset& d, const OutcomeDefinition& def);

// ---------------------------------------------------------------------------
// Imputation. Statistics are fitted on training rows and then frozen.

enum class ImputationMethod { complete_case, mean_mode, indicator };

ImputationMethod parse_imputation(std::string_view name);

inline constexpr std::size_t kDefaultMinRows = 50;

class Imputer {
 public:
  static Imputer fit(const LabeledFrame& train, ImputationMethod method,
                     std::vector<std::string>* warnings = nullptr);

  /// Training application drops incomplete rows under complete_case
  /// (Error(all_rows_dropped) below min_rows); any other application fills
  /// from the frozen statistics.
  LabeledFrame apply(const LabeledFrame& m, bool training,
                     std::size_t min_rows = kDefaultMinRows) const;

  ImputationMethod method() const { return method_; }
  const std::vector<double>& numeric_fill() const { return numeric_fill_; }
  const std::vector<int>& level_fill() const { return level_fill_; }

 private:
  ImputationMethod method_ = ImputationMethod::mean_mode;
  std::vector<double> numeric_fill_;
  std::vector<int> level_fill_;
  std::vector<bool> indicator_;
};

/// fit + training application in one call.
LabeledFrame impute(const LabeledFrame& m, ImputationMethod method,
                    std::size_t min_rows = kDefaultMinRows);

// ---------------------------------------------------------------------------
// Rare-level grouping

inline constexpr const char* kOtherLevel = "OTHER";

class RareGrouper {
 public:
  static RareGrouper fit(const LabeledFrame& train, double threshold,
                         std::vector<std::string>* warnings = nullptr);
  LabeledFrame apply(const LabeledFrame& m) const;

 private:
  struct Mapping {
    std::vector<int> remap;
    std::vector<std::string> levels;
  };
  std::vector<std::optional<Mapping>> columns_;
};

LabeledFrame group_rare(const LabeledFrame& m, double threshold,
                        std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Encoding. Categoricals are one-hot with the most frequent training level
// dropped as reference.

class Encoder {
 public:
  static Encoder fit(const LabeledFrame& train);
  /// Unseen levels map to OTHER when it has a column, else the reference
  /// level; either way a warning is recorded.
  LabeledMatrix apply(const LabeledFrame& m, std::vector<std::string>* warnings = nullptr) const;
  const Encoding& encoding() const { return encoding_; }

 private:
  Encoding encoding_;
};

// ---------------------------------------------------------------------------
// Resampling (training split only)

enum class ResampleMethod { none, oversample_minority, undersample_majority };

ResampleMethod parse_resample(std::string_view name);

/// Raises the positive share to at least target_rate; positives are the
/// minority class. Throws Error(empty_minority) without positives.
LabeledMatrix resample(const LabeledMatrix& m, ResampleMethod method, double target_rate,
                       std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Throws Error(empty_result) when nobody satisfies the predicate.
Dataset restrict_subpopulation(const Dataset& d, const SubjectPredicate& predicate);

// ---------------------------------------------------------------------------
// Variable selection

enum class SelectionMethod { none, forward_stepwise, bootstrap_stability, l1_path };

SelectionMethod parse_selection(std::string_view name);

struct SelectionSpec {
  SelectionMethod method = SelectionMethod::none;
  /// Information-criterion penalty per parameter for forward stepwise.
  double penalty = 2.0;
  int replicates = 100;
  double inclusion_threshold = 0.8;
  double lambda = 0.01;

  void validate() const;
  static SelectionSpec from_json(const nlohmann::json& j);
};

struct Selection {
  std::vector<int> columns;
  bool intercept_only = false;
  /// bootstrap_stability only: per-column share of replicates selecting it.
  std::vector<double> frequency;
};

/// Greedy forward selection minimising deviance + penalty * #parameters;
/// ties go to the lowest column index.
std::vector<int> forward_stepwise(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  double penalty = 2.0);

/// Throws Error(degenerate_design) when every selected column is constant.
Selection select_variables(const LabeledMatrix& m, const SelectionSpec& spec,
                           std::uint64_t seed);

}  // namespace multiverse

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "multiverse/error.hpp"

namespace multiverse {

namespace detail {

template <typename Derived>
std::vector<Eigen::Index> order_by_score(const Eigen::DenseBase<Derived>& s) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(s.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return s(a) < s(b); });
  return idx;
}

}  // namespace detail

/// Mann-Whitney AUC: (#concordant + 0.5 #tied) / (#pos #neg).
/// Tied groups get mid-ranks; the rank sum is kept in integer half-units so
/// the result is the exact pairwise statistic.
template <typename DS, typename DY>
double auc(const Eigen::DenseBase<DS>& scores, const Eigen::DenseBase<DY>& labels) {
  const Eigen::Index n = scores.size();
  if (labels.size() != n) throw Error(Errc::schema_mismatch, "scores/labels length differ");
  const auto idx = detail::order_by_score(scores);
  std::int64_t n_pos = 0;
  std::int64_t twice_rank_sum = 0;  // sum over positives of 2 * mid-rank
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j < n && scores(idx[static_cast<std::size_t>(j)]) == scores(idx[static_cast<std::size_t>(i)])) ++j;
    // ranks i+1 .. j, mid-rank (i + 1 + j) / 2
    const std::int64_t twice_mid = static_cast<std::int64_t>(i + 1 + j);
    for (Eigen::Index k = i; k < j; ++k) {
      if (labels(idx[static_cast<std::size_t>(k)]) > 0.5) {
        ++n_pos;
        twice_rank_sum += twice_mid;
      }
    }
    i = j;
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(Errc::single_class, "AUC needs both classes");
  // 2U = 2R - n1(n1+1); AUC = U / (n1 n0)
  const std::int64_t twice_u = twice_rank_sum - n_pos * (n_pos + 1);
  return 0.5 * static_cast<double>(twice_u) / static_cast<double>(n_pos * n_neg);
}

template <typename DS, typename DY>
double brier(const Eigen::DenseBase<DS>& scores, const Eigen::DenseBase<DY>& labels) {
  if (scores.size() == 0) throw Error(Errc::empty_result, "brier on empty input");
  return (scores.derived().template cast<double>() - labels.derived().template cast<double>())
      .matrix()
      .squaredNorm() / static_cast<double>(scores.size());
}

/// Expected calibration error over equal-width bins, weighted by bin mass.
/// A score lands in bin min(floor(bins * s), bins - 1).
template <typename DS, typename DY>
double ece(const Eigen::DenseBase<DS>& scores, const Eigen::DenseBase<DY>& labels, int bins = 10) {
  const Eigen::Index n = scores.size();
  if (n == 0) return 0.0;
  std::vector<double> sum_s(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> sum_y(static_cast<std::size_t>(bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = scores(i);
    const auto b = static_cast<std::size_t>(
        std::clamp(static_cast<int>(std::floor(s * bins)), 0, bins - 1));
    sum_s[b] += s;
    sum_y[b] += labels(i);
    ++count[b];
  }
  double e = 0.0;
  for (std::size_t b = 0; b < count.size(); ++b) {
    if (count[b] == 0) continue;
    e += std::abs(sum_s[b] - sum_y[b]) / static_cast<double>(n);
  }
  return e;
}

struct LiftResult {
  double budget = 0.0;
  double lift = 0.0;
  std::size_t top_n = 0;
  std::size_t positives_in_top = 0;
  /// Rows tied with the cutoff score that fell outside the top n.
  std::size_t ties_at_cutoff = 0;
};

/// Lift at budget fraction k: precision among the top ceil(k N) scores over
/// the base rate. Ties at the cutoff go to ascending subject id (row order
/// when ids are omitted).
LiftResult lift_at(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels, double k,
                   const std::vector<std::string>* ids = nullptr);

// ---------------------------------------------------------------------------
// Group fairness

inline constexpr double kDefaultThreshold = 0.5;

struct GroupMetrics {
  std::string group;
  std::size_t n = 0;
  std::size_t positives = 0;
  double base_rate = 0.0;
  double tpr = std::nan("");  // undefined without positives
  double fpr = std::nan("");  // undefined without negatives
  double mean_score_y1 = std::nan("");  // balance for the positive class
  double mean_score_y0 = std::nan("");  // balance for the negative class
  double ece = 0.0;
};

struct FairnessGaps {
  double base_rate = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double balance_positive = 0.0;
  double balance_negative = 0.0;
  double ece = 0.0;
};

struct FairnessReport {
  double threshold = kDefaultThreshold;
  std::vector<GroupMetrics> groups;  // sorted by group label
  FairnessGaps gaps;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

/// Groups smaller than min_group_size are excluded with a warning.
FairnessReport fairness_report(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                               const std::vector<std::string>& groups,
                               double threshold = kDefaultThreshold,
                               std::size_t min_group_size = 30);

enum class ImpossibilityKind { all_satisfied, not_applicable, tradeoff_observed, no_tradeoff_detected };

std::string_view to_string(ImpossibilityKind kind);

struct ImpossibilityFinding {
  ImpossibilityKind kind = ImpossibilityKind::not_applicable;
  double calibration_error = 0.0;  // worst within-group ece
  double balance_positive_gap = 0.0;
  double balance_negative_gap = 0.0;
  double base_rate_gap = 0.0;
  /// Names of the criteria exceeding the tolerance.
  std::vector<std::string> violated;
  std::string message;
};

/// Checks calibration within groups and balance for both classes against a
/// tolerance. auc is the discrimination of the same scores; the trade-off
/// is only expected when it is below 1.
ImpossibilityFinding impossibility_check(const FairnessReport& report, double tolerance,
                                         double auc_value);

// ---------------------------------------------------------------------------

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Empirical ROC points from threshold +inf down to the lowest score.
std::vector<RocPoint> roc_curve(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

struct RocCrossing {
  bool crossed = false;
  double fpr_low = 0.0;
  double fpr_high = 0.0;
};

/// Compares the step ROC curves of a and b on the union of their FPR
/// breakpoints; flags a sign change of TPR_a - TPR_b (zeros skipped).
RocCrossing roc_crossing(const Eigen::VectorXd& scores_a, const Eigen::VectorXd& scores_b,
                         const Eigen::VectorXd& labels);

// ---------------------------------------------------------------------------

struct PathMetrics {
  double auc = 0.0;
  double brier = 0.0;
  double ece = 0.0;
  std::vector<LiftResult> lift;
  FairnessReport fairness;
  /// Against the baseline path; unset for the baseline itself.
  std::optional<RocCrossing> baseline_crossing;

  /// "auc", "brier", "ece" or "lift@<budget>". Throws Error(unknown_reference).
  double value(std::string_view metric) const;
  static bool higher_is_better(std::string_view metric);
  nlohmann::json to_json() const;
};

struct MetricsOptions {
  std::vector<double> lift_budgets = {0.1};
  double threshold = kDefaultThreshold;
  std::size_t min_group_size = 30;
};

PathMetrics compute_path_metrics(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                                 const std::vector<std::string>& ids,
                                 const std::vector<std::string>& groups,
                                 const MetricsOptions& options = {});

}  // namespace multiverse

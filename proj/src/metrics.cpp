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

#include "multiverse/metrics.hpp"

#include <map>
#include <sstream>

#include "multiverse/hash.hpp"

namespace multiverse {

LiftResult lift_at(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels, double k,
                   const std::vector<std::string>* ids) {
  if (!(k > 0.0 && k <= 1.0)) throw Error(Errc::rate_out_of_range, "lift budget must lie in (0,1]");
  const auto n = static_cast<std::size_t>(scores.size());
  const double total_pos = labels.sum();
  if (total_pos <= 0.0) throw Error(Errc::no_positives, "lift needs at least one positive");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores(static_cast<Eigen::Index>(a));
    const double sb = scores(static_cast<Eigen::Index>(b));
    if (sa != sb) return sa > sb;
    if (ids) return (*ids)[a] < (*ids)[b];
    return a < b;
  });

  LiftResult r;
  r.budget = k;
  r.top_n = std::min(n, static_cast<std::size_t>(std::ceil(k * static_cast<double>(n) - 1e-12)));
  if (r.top_n == 0) r.top_n = 1;
  for (std::size_t i = 0; i < r.top_n; ++i) {
    if (labels(static_cast<Eigen::Index>(idx[i])) > 0.5) ++r.positives_in_top;
  }
  const double cutoff = scores(static_cast<Eigen::Index>(idx[r.top_n - 1]));
  for (std::size_t i = r.top_n; i < n && scores(static_cast<Eigen::Index>(idx[i])) == cutoff; ++i) {
    ++r.ties_at_cutoff;
  }
  const double precision = static_cast<double>(r.positives_in_top) / static_cast<double>(r.top_n);
  r.lift = precision / (total_pos / static_cast<double>(n));
  return r;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json number_or_null(double v) {
  return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
}

double spread(const std::vector<GroupMetrics>& g, double GroupMetrics::*field) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& m : g) {
    const double v = m.*field;
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi >= lo ? hi - lo : 0.0;
}

}  // namespace

nlohmann::json FairnessReport::to_json() const {
  nlohmann::json j;
  j["threshold"] = threshold;
  j["groups"] = nlohmann::json::array();
  for (const auto& g : groups) {
    j["groups"].push_back({{"group", g.group},
                           {"n", g.n},
                           {"base_rate", g.base_rate},
                           {"tpr", number_or_null(g.tpr)},
                           {"fpr", number_or_null(g.fpr)},
                           {"mean_score_y1", number_or_null(g.mean_score_y1)},
                           {"mean_score_y0", number_or_null(g.mean_score_y0)},
                           {"ece", g.ece}});
  }
  j["gaps"] = {{"base_rate", gaps.base_rate},
               {"tpr", gaps.tpr},
               {"fpr", gaps.fpr},
               {"balance_positive", gaps.balance_positive},
               {"balance_negative", gaps.balance_negative},
               {"ece", gaps.ece}};
  j["warnings"] = warnings;
  return j;
}

FairnessReport fairness_report(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                               const std::vector<std::string>& groups, double threshold,
                               std::size_t min_group_size) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(Errc::rate_out_of_range, "threshold must lie in (0,1)");
  }
  if (groups.size() != static_cast<std::size_t>(scores.size())) {
    throw Error(Errc::schema_mismatch, "groups/scores length differ");
  }
  std::map<std::string, std::vector<Eigen::Index>> rows;
  for (std::size_t i = 0; i < groups.size(); ++i) rows[groups[i]].push_back(static_cast<Eigen::Index>(i));

  FairnessReport r;
  r.threshold = threshold;
  for (const auto& [label, idx] : rows) {
    if (idx.size() < min_group_size) {
      r.warnings.push_back("group " + label + " has " + std::to_string(idx.size()) +
                           " rows (< " + std::to_string(min_group_size) + "); excluded");
      continue;
    }
    GroupMetrics g;
    g.group = label;
    g.n = idx.size();
    Eigen::VectorXd s(static_cast<Eigen::Index>(idx.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
    std::size_t tp = 0, fp = 0;
    double sum1 = 0.0, sum0 = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      s(static_cast<Eigen::Index>(k)) = scores(idx[k]);
      y(static_cast<Eigen::Index>(k)) = labels(idx[k]);
      const bool flagged = scores(idx[k]) >= threshold;
      if (labels(idx[k]) > 0.5) {
        ++g.positives;
        sum1 += scores(idx[k]);
        tp += flagged;
      } else {
        sum0 += scores(idx[k]);
        fp += flagged;
      }
    }
    const std::size_t negatives = g.n - g.positives;
    g.base_rate = static_cast<double>(g.positives) / static_cast<double>(g.n);
    if (g.positives) {
      g.tpr = static_cast<double>(tp) / static_cast<double>(g.positives);
      g.mean_score_y1 = sum1 / static_cast<double>(g.positives);
    }
    if (negatives) {
      g.fpr = static_cast<double>(fp) / static_cast<double>(negatives);
      g.mean_score_y0 = sum0 / static_cast<double>(negatives);
    }
    g.ece = ece(s, y);
    r.groups.push_back(std::move(g));
  }
  r.gaps.base_rate = spread(r.groups, &GroupMetrics::base_rate);
  r.gaps.tpr = spread(r.groups, &GroupMetrics::tpr);
  r.gaps.fpr = spread(r.groups, &GroupMetrics::fpr);
  r.gaps.balance_positive = spread(r.groups, &GroupMetrics::mean_score_y1);
  r.gaps.balance_negative = spread(r.groups, &GroupMetrics::mean_score_y0);
  r.gaps.ece = spread(r.groups, &GroupMetrics::ece);
  return r;
}

std::string_view to_string(ImpossibilityKind kind) {
  switch (kind) {
    case ImpossibilityKind::all_satisfied: return "all-satisfied";
    case ImpossibilityKind::not_applicable: return "not-applicable";
    case ImpossibilityKind::tradeoff_observed: return "tradeoff-observed";
    case ImpossibilityKind::no_tradeoff_detected: return "no-tradeoff-detected";
  }
  return "unknown";
}

ImpossibilityFinding impossibility_check(const FairnessReport& report, double tolerance,
                                         double auc_value) {
  ImpossibilityFinding f;
  for (const auto& g : report.groups) f.calibration_error = std::max(f.calibration_error, g.ece);
  f.balance_positive_gap = report.gaps.balance_positive;
  f.balance_negative_gap = report.gaps.balance_negative;
  f.base_rate_gap = report.gaps.base_rate;

  std::ostringstream msg;
  if (f.calibration_error > tolerance) f.violated.emplace_back("calibration");
  if (f.balance_positive_gap > tolerance) f.violated.emplace_back("balance_positive");
  if (f.balance_negative_gap > tolerance) f.violated.emplace_back("balance_negative");

  if (f.violated.empty()) {
    f.kind = ImpossibilityKind::all_satisfied;
    msg << "calibration and both balance conditions hold within " << tolerance;
  } else if (report.groups.size() < 2 || f.base_rate_gap <= tolerance) {
    f.kind = ImpossibilityKind::not_applicable;
    msg << "base-rate gap " << f.base_rate_gap << " within tolerance";
  } else if (f.calibration_error <= tolerance && auc_value < 1.0) {
    f.kind = ImpossibilityKind::tradeoff_observed;
    msg << "calibrated within groups (error " << f.calibration_error
        << ") but balance gaps are " << f.balance_positive_gap << " (positive class) and "
        << f.balance_negative_gap << " (negative class)";
  } else {
    f.kind = ImpossibilityKind::no_tradeoff_detected;
    msg << "calibration error " << f.calibration_error << " exceeds tolerance";
  }
  f.message = msg.str();
  return f;
}

// ---------------------------------------------------------------------------

std::vector<RocPoint> roc_curve(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  const double pos = labels.sum();
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos <= 0.0 || neg <= 0.0) throw Error(Errc::single_class, "ROC needs both classes");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });

  std::vector<RocPoint> pts{{0.0, 0.0}};
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores(idx[j]) == scores(idx[i])) {
      if (labels(idx[j]) > 0.5) tp += 1.0;
      else fp += 1.0;
      ++j;
    }
    pts.push_back({fp / neg, tp / pos});
    i = j;
  }
  return pts;
}

namespace {

// Step ROC: the best TPR reachable with FPR <= x.
double tpr_at(const std::vector<RocPoint>& pts, double x) {
  double best = 0.0;
  for (const auto& p : pts) {
    if (p.fpr <= x) best = std::max(best, p.tpr);
  }
  return best;
}

}  // namespace

RocCrossing roc_crossing(const Eigen::VectorXd& scores_a, const Eigen::VectorXd& scores_b,
                         const Eigen::VectorXd& labels) {
  const auto a = roc_curve(scores_a, labels);
  const auto b = roc_curve(scores_b, labels);
  std::vector<double> grid;
  for (const auto& p : a) grid.push_back(p.fpr);
  for (const auto& p : b) grid.push_back(p.fpr);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  RocCrossing r;
  int last_sign = 0;
  double last_x = 0.0;
  for (double x : grid) {
    const double d = tpr_at(a, x) - tpr_at(b, x);
    const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) {
      r.crossed = true;
      r.fpr_low = last_x;
      r.fpr_high = x;
      return r;
    }
    last_sign = sign;
    last_x = x;
  }
  return r;
}

// ---------------------------------------------------------------------------

bool PathMetrics::higher_is_better(std::string_view metric) {
  return !(metric == "brier" || metric == "ece");
}

double PathMetrics::value(std::string_view metric) const {
  if (metric == "auc") return auc;
  if (metric == "brier") return brier;
  if (metric == "ece") return ece;
  if (metric.substr(0, 5) == "lift@") {
    const double k = std::stod(std::string(metric.substr(5)));
    for (const auto& l : lift) {
      if (std::abs(l.budget - k) < 1e-12) return l.lift;
    }
  }
  throw Error(Errc::unknown_reference, "metric not computed: " + std::string(metric));
}

nlohmann::json PathMetrics::to_json() const {
  nlohmann::json j;
  j["auc"] = auc;
  j["brier"] = brier;
  j["ece"] = ece;
  j["lift"] = nlohmann::json::array();
  for (const auto& l : lift) {
    j["lift"].push_back({{"budget", l.budget},
                         {"lift", l.lift},
                         {"top_n", l.top_n},
                         {"positives_in_top", l.positives_in_top},
                         {"ties_at_cutoff", l.ties_at_cutoff}});
  }
  j["fairness"] = fairness.to_json();
  if (baseline_crossing) {
    j["baseline_crossing"] = {{"crossed", baseline_crossing->crossed},
                              {"fpr_low", baseline_crossing->fpr_low},
                              {"fpr_high", baseline_crossing->fpr_high}};
  }
  return j;
}

PathMetrics compute_path_metrics(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                                 const std::vector<std::string>& ids,
                                 const std::vector<std::string>& groups,
                                 const MetricsOptions& options) {
  PathMetrics m;
  m.auc = auc(scores, labels);
  m.brier = brier(scores, labels);
  m.ece = ece(scores, labels);
  for (double k : options.lift_budgets) m.lift.push_back(lift_at(scores, labels, k, &ids));
  m.fairness = fairness_report(scores, labels, groups, options.threshold, options.min_group_size);
  return m;
}

}  // namespace multiverse

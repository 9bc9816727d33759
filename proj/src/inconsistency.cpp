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

#include "multiverse/inconsistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multiverse/error.hpp"
#include "multiverse/hash.hpp"

namespace multiverse {

std::vector<std::size_t> ScoreMatrix::admissible_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < admissible.size(); ++j) {
    if (admissible[j]) out.push_back(j);
  }
  return out;
}

std::size_t ScoreMatrix::subject_index(std::string_view id) const {
  const auto it = std::find(subjects.begin(), subjects.end(), id);
  if (it == subjects.end()) throw Error(Errc::unknown_subject, "no holdout subject " + std::string(id));
  return static_cast<std::size_t>(it - subjects.begin());
}

std::optional<std::size_t> ScoreMatrix::path_index(std::uint64_t path_id) const {
  const auto it = std::find(paths.begin(), paths.end(), path_id);
  if (it == paths.end()) return std::nullopt;
  return static_cast<std::size_t>(it - paths.begin());
}

ScoreMatrix build_score_matrix(const std::vector<std::string>& subjects,
                               std::vector<PathScores> results) {
  std::sort(results.begin(), results.end(),
            [](const PathScores& a, const PathScores& b) { return a.order < b.order; });
  ScoreMatrix m;
  m.subjects = subjects;
  std::size_t ok = 0;
  for (const auto& r : results) ok += r.scores.has_value();
  if (ok == 0) throw Error(Errc::all_paths_failed, "no path produced scores");

  m.S.resize(static_cast<Eigen::Index>(subjects.size()), static_cast<Eigen::Index>(ok));
  Eigen::Index col = 0;
  for (auto& r : results) {
    if (!r.scores) {
      m.failures.push_back({r.path_id, r.failure});
      continue;
    }
    if (r.scores->size() != static_cast<Eigen::Index>(subjects.size())) {
      throw Error(Errc::schema_mismatch, "score column length differs from subject count");
    }
    m.S.col(col++) = *r.scores;
    m.paths.push_back(r.path_id);
    m.admissible.push_back(true);
  }
  return m;
}

// ---------------------------------------------------------------------------

RashomonRule RashomonRule::from_json(const nlohmann::json& j) {
  RashomonRule r;
  r.metric = j.value("metric", r.metric);
  const auto mode = j.value("mode", std::string("absolute"));
  if (mode == "absolute") r.mode = RashomonMode::absolute;
  else if (mode == "relative") r.mode = RashomonMode::relative;
  else throw Error(Errc::config_invalid, "rashomon mode must be absolute or relative");
  r.value = j.value("value", r.value);
  return r;
}

nlohmann::json RashomonRule::to_json() const {
  return {{"metric", metric},
          {"mode", mode == RashomonMode::absolute ? "absolute" : "relative"},
          {"value", value}};
}

ScoreMatrix rashomon_filter(const ScoreMatrix& m, const std::vector<PathMetrics>& metrics,
                            const RashomonRule& rule) {
  if (metrics.size() != m.path_count()) {
    throw Error(Errc::schema_mismatch, "one PathMetrics per column required");
  }
  const bool higher = PathMetrics::higher_is_better(rule.metric);
  // Orient so that larger is always better.
  std::vector<double> v(metrics.size());
  for (std::size_t j = 0; j < metrics.size(); ++j) {
    v[j] = higher ? metrics[j].value(rule.metric) : -metrics[j].value(rule.metric);
  }
  double cut = higher ? rule.value : -rule.value;
  if (rule.mode == RashomonMode::relative) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (m.admissible[j]) best = std::max(best, v[j]);
    }
    cut = best - rule.value;
  }
  ScoreMatrix out = m;
  bool any = false;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out.admissible[j] = m.admissible[j] && v[j] >= cut;
    any = any || out.admissible[j];
  }
  if (!any) throw Error(Errc::empty_rashomon_set, "no path passes the " + rule.metric + " rule");
  return out;
}

// ---------------------------------------------------------------------------

void BinningScheme::validate() const {
  if (labels.size() != cuts.size() + 1) {
    throw Error(Errc::invalid_spec, "binning " + name + ": need one more label than cuts");
  }
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    if (!(cuts[k] > 0.0 && cuts[k] < 1.0)) {
      throw Error(Errc::invalid_spec, "binning " + name + ": cuts must lie in (0,1)");
    }
    if (k > 0 && !(cuts[k] > cuts[k - 1])) {
      throw Error(Errc::invalid_spec, "binning " + name + ": cuts must be strictly ascending");
    }
  }
}

std::size_t BinningScheme::bin_index(double score) const {
  return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), score) - cuts.begin());
}

double BinningScheme::position(double score) const {
  if (bin_count() < 2) return 0.0;
  return static_cast<double>(bin_index(score)) / static_cast<double>(bin_count() - 1);
}

BinningScheme BinningScheme::equal_width(std::string name, std::vector<std::string> labels) {
  BinningScheme s{std::move(name), {}, std::move(labels)};
  const auto k = s.labels.size();
  for (std::size_t i = 1; i < k; ++i) s.cuts.push_back(static_cast<double>(i) / static_cast<double>(k));
  s.validate();
  return s;
}

BinningScheme BinningScheme::from_json(const nlohmann::json& j) {
  BinningScheme s;
  s.name = j.at("name").get<std::string>();
  s.labels = j.at("labels").get<std::vector<std::string>>();
  if (j.contains("cuts")) {
    s.cuts = j["cuts"].get<std::vector<double>>();
    s.validate();
    return s;
  }
  return equal_width(s.name, s.labels);
}

std::string bin_scores(double score, const BinningScheme& scheme) {
  return scheme.labels[scheme.bin_index(score)];
}

BinDisagreement bin_disagreement(double score, const BinningScheme& a, const BinningScheme& b) {
  BinDisagreement d;
  d.label_a = bin_scores(score, a);
  d.label_b = bin_scores(score, b);
  d.position_a = a.position(score);
  d.position_b = b.position(score);
  const double width = 1.0 / static_cast<double>(std::max(a.bin_count(), b.bin_count()));
  d.disagree = std::abs(d.position_a - d.position_b) > width + 1e-12;
  return d;
}

// ---------------------------------------------------------------------------

nlohmann::json InconsistencyProfile::to_json() const {
  nlohmann::json j = {{"subject_id", subject_id}, {"paths", paths}, {"min", min},
                      {"max", max},               {"range", range}, {"mean", mean},
                      {"sd", sd},                 {"abstain", abstain}};
  j["schemes"] = nlohmann::json::array();
  for (const auto& s : schemes) {
    j["schemes"].push_back({{"scheme", s.scheme},
                            {"distribution", s.distribution},
                            {"entropy", s.entropy},
                            {"modal_bin", s.modal_bin},
                            {"modal_label", s.modal_label},
                            {"flip_rate", s.flip_rate}});
  }
  return j;
}

InconsistencyProfile profile_row(std::string subject_id, const std::vector<double>& scores,
                                 const std::vector<BinningScheme>& schemes,
                                 const AbstainRule& rule) {
  InconsistencyProfile p;
  p.subject_id = std::move(subject_id);
  p.paths = scores.size();
  if (scores.empty()) return p;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  p.min = *lo;
  p.max = *hi;
  p.range = p.max - p.min;
  const double n = static_cast<double>(scores.size());
  // Shifted by the first score so a constant row gives exactly zero spread.
  const double x0 = scores.front();
  double shift = 0.0;
  for (double s : scores) shift += s - x0;
  shift /= n;
  p.mean = x0 + shift;
  double ss = 0.0;
  for (double s : scores) ss += (s - x0 - shift) * (s - x0 - shift);
  p.sd = std::sqrt(ss / n);

  bool flip_abstain = false;
  for (const auto& scheme : schemes) {
    SchemeProfile sp;
    sp.scheme = scheme.name;
    std::vector<std::size_t> counts(scheme.bin_count(), 0);
    for (double s : scores) ++counts[scheme.bin_index(s)];
    sp.modal_bin = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    sp.modal_label = scheme.labels[sp.modal_bin];
    for (auto c : counts) {
      const double share = static_cast<double>(c) / n;
      sp.distribution.push_back(share);
      if (c > 0) sp.entropy -= share * std::log(share);
    }
    sp.entropy = counts.size() > 1 ? sp.entropy / std::log(static_cast<double>(counts.size())) : 0.0;
    sp.entropy = std::clamp(sp.entropy, 0.0, 1.0);
    sp.flip_rate = 1.0 - static_cast<double>(counts[sp.modal_bin]) / n;
    flip_abstain = flip_abstain || sp.flip_rate > rule.flip;
    p.schemes.push_back(std::move(sp));
  }
  p.abstain = p.range > rule.range || flip_abstain;
  return p;
}

std::vector<InconsistencyProfile> subject_profile(const ScoreMatrix& m,
                                                  const std::vector<BinningScheme>& schemes,
                                                  const AbstainRule& rule) {
  const auto cols = m.admissible_columns();
  if (cols.empty()) throw Error(Errc::empty_rashomon_set, "no admissible path to profile");
  std::vector<InconsistencyProfile> out;
  out.reserve(m.subject_count());
  std::vector<double> row(cols.size());
  for (std::size_t i = 0; i < m.subject_count(); ++i) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      row[k] = m.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k]));
    }
    out.push_back(profile_row(m.subjects[i], row, schemes, rule));
  }
  return out;
}

// ---------------------------------------------------------------------------

Multiplicity multiplicity_metrics(const ScoreMatrix& m, std::uint64_t baseline_path,
                                  double threshold) {
  const auto base = m.path_index(baseline_path);
  if (!base || !m.admissible[*base]) {
    throw Error(Errc::baseline_not_admissible,
                "baseline path " + to_hex(baseline_path) + " is not admissible");
  }
  const auto cols = m.admissible_columns();
  const auto n = static_cast<Eigen::Index>(m.subject_count());
  std::vector<bool> flipped_any(static_cast<std::size_t>(n), false);
  Multiplicity r;
  for (auto j : cols) {
    std::size_t flips = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool d0 = m.S(i, static_cast<Eigen::Index>(*base)) >= threshold;
      const bool d = m.S(i, static_cast<Eigen::Index>(j)) >= threshold;
      if (d != d0) {
        ++flips;
        flipped_any[static_cast<std::size_t>(i)] = true;
      }
    }
    const double share = n ? static_cast<double>(flips) / static_cast<double>(n) : 0.0;
    r.flip_share.push_back(share);
    r.discrepancy = std::max(r.discrepancy, share);
  }
  if (n) {
    r.ambiguity = static_cast<double>(std::count(flipped_any.begin(), flipped_any.end(), true)) /
                  static_cast<double>(n);
  }
  return r;
}

}  // namespace multiverse

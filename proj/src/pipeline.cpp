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

#include "multiverse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "multiverse/error.hpp"
#include "multiverse/models.hpp"
#include "multiverse/random.hpp"
#include "multiverse/synthgen.hpp"

namespace multiverse {

// ---------------------------------------------------------------------------
// frame.hpp helpers

bool LabeledFrame::has_missing() const {
  for (const auto& c : columns) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c.missing(i)) return true;
    }
  }
  return false;
}

LabeledFrame LabeledFrame::take(const std::vector<std::size_t>& idx) const {
  LabeledFrame out;
  out.rows.reserve(idx.size());
  out.groups.reserve(idx.size());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.rows.push_back(rows[idx[k]]);
    out.groups.push_back(groups[idx[k]]);
    out.y(static_cast<Eigen::Index>(k)) = y(static_cast<Eigen::Index>(idx[k]));
  }
  for (const auto& c : columns) {
    Column nc{c.name, c.kind, c.levels, {}, {}};
    if (c.kind == FeatureKind::numeric) {
      nc.numeric.reserve(idx.size());
      for (auto i : idx) nc.numeric.push_back(c.numeric[i]);
    } else {
      nc.codes.reserve(idx.size());
      for (auto i : idx) nc.codes.push_back(c.codes[i]);
    }
    out.columns.push_back(std::move(nc));
  }
  return out;
}

LabeledMatrix LabeledMatrix::take_rows(const std::vector<std::size_t>& idx) const {
  LabeledMatrix out;
  out.column_names = column_names;
  out.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(idx[k]);
    out.X.row(static_cast<Eigen::Index>(k)) = X.row(r);
    out.y(static_cast<Eigen::Index>(k)) = y(r);
    out.rows.push_back(rows[idx[k]]);
    out.groups.push_back(groups[idx[k]]);
  }
  return out;
}

LabeledMatrix LabeledMatrix::take_columns(const std::vector<int>& cols) const {
  LabeledMatrix out;
  out.rows = rows;
  out.groups = groups;
  out.y = y;
  out.X.resize(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.X.col(static_cast<Eigen::Index>(k)) = X.col(cols[k]);
    out.column_names.push_back(column_names[static_cast<std::size_t>(cols[k])]);
  }
  return out;
}

// ---------------------------------------------------------------------------

void OutcomeDefinition::validate() const {
  if (window_days < 0) throw Error(Errc::invalid_spec, "window_days must be >= 0");
  if (failure_events.empty()) throw Error(Errc::invalid_spec, "no failure event kinds");
}

OutcomeDefinition OutcomeDefinition::from_json(const nlohmann::json& j) {
  OutcomeDefinition def;
  if (j.contains("failure_events")) {
    def.failure_events = {};
    for (const auto& e : j["failure_events"]) {
      const auto k = parse_event_kind(e.get<std::string>());
      if (!k) throw Error(Errc::config_invalid, "unknown event kind " + e.dump());
      def.failure_events.insert(*k);
    }
  }
  if (j.contains("degrees")) {
    def.degrees = {};
    for (const auto& e : j["degrees"]) {
      const auto k = parse_degree(e.get<std::string>());
      if (!k) throw Error(Errc::config_invalid, "unknown degree " + e.dump());
      def.degrees.insert(*k);
    }
  }
  if (j.contains("jurisdictions")) {
    def.jurisdictions = {};
    for (const auto& e : j["jurisdictions"]) {
      const auto k = parse_jurisdiction(e.get<std::string>());
      if (!k) throw Error(Errc::config_invalid, "unknown jurisdiction " + e.dump());
      def.jurisdictions.insert(*k);
    }
  }
  if (j.contains("window_years")) {
    def.window_days = years_to_days(j["window_years"].get<double>());
  } else {
    def.window_days = j.at("window_days").get<std::int64_t>();
  }
  def.validate();
  return def;
}

Eigen::VectorXd derive_labels(const Dataset& d, const OutcomeDefinition& def) {
  def.validate();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& s = d.subjects[i];
    for (const auto& e : s.events) {
      if (def.failure_events.contains(e.kind) && def.degrees.contains(e.degree) &&
          def.jurisdictions.contains(e.jurisdiction) && e.day > s.anchor_day &&
          e.day <= s.anchor_day + def.window_days) {
        y(static_cast<Eigen::Index>(i)) = 1.0;
        break;
      }
    }
  }
  return y;
}

LabeledFrame derive_outcome(const Dataset& d, const OutcomeDefinition& def) {
  LabeledFrame f;
  f.y = derive_labels(d, def);
  f.rows.reserve(d.size());
  f.groups.reserve(d.size());
  for (const auto& s : d.subjects) {
    f.rows.push_back(s.subject_id);
    f.groups.push_back(s.group);
  }
  for (std::size_t j = 0; j < d.schema.size(); ++j) {
    const auto& spec = d.schema[j];
    Column c{spec.name, spec.kind, spec.levels, {}, {}};
    for (const auto& s : d.subjects) {
      const auto& v = s.features[j];
      if (spec.kind == FeatureKind::numeric) {
        const auto* x = std::get_if<double>(&v);
        c.numeric.push_back(x ? std::optional<double>(*x) : std::nullopt);
      } else {
        const auto* level = std::get_if<std::string>(&v);
        if (!level) {
          c.codes.push_back(std::nullopt);
        } else {
          const auto it = std::find(spec.levels.begin(), spec.levels.end(), *level);
          c.codes.push_back(static_cast<int>(it - spec.levels.begin()));
        }
      }
    }
    f.columns.push_back(std::move(c));
  }
  return f;
}

// ---------------------------------------------------------------------------

ImputationMethod parse_imputation(std::string_view name) {
  if (name == "complete_case") return ImputationMethod::complete_case;
  if (name == "mean_mode") return ImputationMethod::mean_mode;
  if (name == "indicator") return ImputationMethod::indicator;
  throw Error(Errc::config_invalid, "unknown imputation method " + std::string(name));
}

namespace {

int modal_level(const Column& c) {
  std::vector<std::size_t> counts(c.levels.size(), 0);
  for (const auto& code : c.codes) {
    if (code) ++counts[static_cast<std::size_t>(*code)];
  }
  // max_element returns the first maximum: ties go to the lowest code.
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace

Imputer Imputer::fit(const LabeledFrame& train, ImputationMethod method,
                     std::vector<std::string>* warnings) {
  Imputer imp;
  imp.method_ = method;
  for (const auto& c : train.columns) {
    bool any_missing = false;
    if (c.kind == FeatureKind::numeric) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& v : c.numeric) {
        if (v) {
          sum += *v;
          ++n;
        } else {
          any_missing = true;
        }
      }
      if (n == 0 && warnings) warnings->push_back("feature " + c.name + " fully missing; filling 0");
      imp.numeric_fill_.push_back(n ? sum / static_cast<double>(n) : 0.0);
      imp.level_fill_.push_back(-1);
    } else {
      for (const auto& v : c.codes) any_missing = any_missing || !v.has_value();
      imp.numeric_fill_.push_back(0.0);
      imp.level_fill_.push_back(modal_level(c));
    }
    imp.indicator_.push_back(method == ImputationMethod::indicator && any_missing);
  }
  return imp;
}

LabeledFrame Imputer::apply(const LabeledFrame& m, bool training, std::size_t min_rows) const {
  if (m.columns.size() != numeric_fill_.size()) {
    throw Error(Errc::schema_mismatch, "imputer fitted on a different column set");
  }
  if (training && method_ == ImputationMethod::complete_case) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < m.size(); ++i) {
      bool complete = true;
      for (const auto& c : m.columns) complete = complete && !c.missing(i);
      if (complete) keep.push_back(i);
    }
    if (keep.size() < min_rows) {
      throw Error(Errc::all_rows_dropped,
                  "complete-case analysis leaves " + std::to_string(keep.size()) + " rows");
    }
    return m.take(keep);
  }

  LabeledFrame out;
  out.rows = m.rows;
  out.groups = m.groups;
  out.y = m.y;
  std::vector<Column> indicators;
  for (std::size_t j = 0; j < m.columns.size(); ++j) {
    const auto& c = m.columns[j];
    Column filled = c;
    Column flag{c.name + "__missing", FeatureKind::numeric, {}, {}, {}};
    for (std::size_t i = 0; i < c.size(); ++i) {
      const bool miss = c.missing(i);
      if (miss) {
        if (c.kind == FeatureKind::numeric) filled.numeric[i] = numeric_fill_[j];
        else filled.codes[i] = level_fill_[j];
      }
      flag.numeric.push_back(miss ? 1.0 : 0.0);
    }
    out.columns.push_back(std::move(filled));
    if (indicator_[j]) indicators.push_back(std::move(flag));
  }
  for (auto& c : indicators) out.columns.push_back(std::move(c));
  return out;
}

LabeledFrame impute(const LabeledFrame& m, ImputationMethod method, std::size_t min_rows) {
  return Imputer::fit(m, method).apply(m, true, min_rows);
}

// ---------------------------------------------------------------------------

RareGrouper RareGrouper::fit(const LabeledFrame& train, double threshold,
                             std::vector<std::string>* warnings) {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw Error(Errc::rate_out_of_range, "rare-grouping threshold must lie in [0,1)");
  }
  RareGrouper g;
  for (const auto& c : train.columns) {
    if (c.kind != FeatureKind::categorical || threshold == 0.0) {
      g.columns_.emplace_back(std::nullopt);
      continue;
    }
    std::vector<std::size_t> counts(c.levels.size(), 0);
    std::size_t total = 0;
    for (const auto& code : c.codes) {
      if (code) {
        ++counts[static_cast<std::size_t>(*code)];
        ++total;
      }
    }
    Mapping map;
    map.remap.assign(c.levels.size(), -1);
    bool any_rare = false;
    for (std::size_t l = 0; l < c.levels.size(); ++l) {
      const double freq = total ? static_cast<double>(counts[l]) / static_cast<double>(total) : 0.0;
      if (freq >= threshold && c.levels[l] != kOtherLevel) {
        map.remap[l] = static_cast<int>(map.levels.size());
        map.levels.push_back(c.levels[l]);
      } else {
        any_rare = true;
      }
    }
    if (any_rare) {
      const int other = static_cast<int>(map.levels.size());
      map.levels.emplace_back(kOtherLevel);
      for (auto& r : map.remap) {
        if (r < 0) r = other;
      }
      if (map.levels.size() == 1 && warnings) {
        warnings->push_back("every level of " + c.name + " is rare; single OTHER level");
      }
    }
    g.columns_.emplace_back(std::move(map));
  }
  return g;
}

LabeledFrame RareGrouper::apply(const LabeledFrame& m) const {
  if (m.columns.size() < columns_.size()) {
    throw Error(Errc::schema_mismatch, "grouper fitted on a different column set");
  }
  LabeledFrame out = m;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (!columns_[j]) continue;
    auto& c = out.columns[j];
    c.levels = columns_[j]->levels;
    for (auto& code : c.codes) {
      if (code) code = columns_[j]->remap[static_cast<std::size_t>(*code)];
    }
  }
  return out;
}

LabeledFrame group_rare(const LabeledFrame& m, double threshold,
                        std::vector<std::string>* warnings) {
  return RareGrouper::fit(m, threshold, warnings).apply(m);
}

// ---------------------------------------------------------------------------

Encoder Encoder::fit(const LabeledFrame& train) {
  Encoder e;
  int next = 0;
  for (const auto& c : train.columns) {
    ColumnEncoding ce;
    ce.name = c.name;
    ce.kind = c.kind;
    if (c.kind == FeatureKind::numeric) {
      ce.numeric_column = next++;
      e.encoding_.column_names.push_back(c.name);
    } else {
      ce.levels = c.levels;
      std::vector<std::size_t> counts(c.levels.size(), 0);
      for (const auto& code : c.codes) {
        if (code) ++counts[static_cast<std::size_t>(*code)];
      }
      ce.reference_level =
          static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      ce.level_column.assign(c.levels.size(), -1);
      for (std::size_t l = 0; l < c.levels.size(); ++l) {
        if (static_cast<int>(l) == ce.reference_level || counts[l] == 0) continue;
        ce.level_column[l] = next++;
        e.encoding_.column_names.push_back(c.name + "=" + c.levels[l]);
      }
    }
    e.encoding_.columns.push_back(std::move(ce));
  }
  return e;
}

LabeledMatrix Encoder::apply(const LabeledFrame& m, std::vector<std::string>* warnings) const {
  if (m.columns.size() != encoding_.columns.size()) {
    throw Error(Errc::schema_mismatch, "encoder fitted on a different column set");
  }
  LabeledMatrix out;
  out.rows = m.rows;
  out.groups = m.groups;
  out.y = m.y;
  out.column_names = encoding_.column_names;
  out.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.size()),
                                static_cast<Eigen::Index>(encoding_.column_names.size()));
  for (std::size_t j = 0; j < m.columns.size(); ++j) {
    const auto& c = m.columns[j];
    const auto& ce = encoding_.columns[j];
    if (c.kind != ce.kind) throw Error(Errc::schema_mismatch, "column kind changed: " + c.name);
    if (ce.kind == FeatureKind::numeric) {
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (!c.numeric[i]) throw Error(Errc::schema_mismatch, "missing cell after imputation");
        out.X(static_cast<Eigen::Index>(i), ce.numeric_column) = *c.numeric[i];
      }
      continue;
    }
    if (c.levels != ce.levels) throw Error(Errc::schema_mismatch, "level set changed: " + c.name);
    const auto other = std::find(ce.levels.begin(), ce.levels.end(), kOtherLevel);
    const int other_column =
        other == ce.levels.end() ? -1 : ce.level_column[static_cast<std::size_t>(other - ce.levels.begin())];
    const bool other_is_reference =
        other != ce.levels.end() && (other - ce.levels.begin()) == ce.reference_level;
    std::size_t unseen = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c.codes[i]) throw Error(Errc::schema_mismatch, "missing cell after imputation");
      const auto level = static_cast<std::size_t>(*c.codes[i]);
      int col = ce.level_column[level];
      if (col < 0 && static_cast<int>(level) != ce.reference_level) {
        ++unseen;
        col = other_is_reference ? -1 : other_column;
      }
      if (col >= 0) out.X(static_cast<Eigen::Index>(i), col) = 1.0;
    }
    if (unseen && warnings) {
      warnings->push_back(std::to_string(unseen) + " rows with levels of " + c.name +
                          " unseen in training mapped to " +
                          (other_column >= 0 || other_is_reference ? "OTHER" : "the reference level"));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ResampleMethod parse_resample(std::string_view name) {
  if (name == "none") return ResampleMethod::none;
  if (name == "oversample_minority") return ResampleMethod::oversample_minority;
  if (name == "undersample_majority") return ResampleMethod::undersample_majority;
  throw Error(Errc::config_invalid, "unknown resampling method " + std::string(name));
}

LabeledMatrix resample(const LabeledMatrix& m, ResampleMethod method, double target_rate,
                       std::uint64_t seed) {
  if (method == ResampleMethod::none) return m;
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    throw Error(Errc::rate_out_of_range, "resampling target must lie in (0,1)");
  }
  std::vector<std::size_t> pos, neg;
  for (Eigen::Index i = 0; i < m.y.size(); ++i) {
    (m.y(i) > 0.5 ? pos : neg).push_back(static_cast<std::size_t>(i));
  }
  if (pos.empty()) throw Error(Errc::empty_minority, "no positive rows to resample");
  if (m.base_rate() >= target_rate) return m;

  Rng rng(seed);
  const double n0 = static_cast<double>(neg.size());
  const double n1 = static_cast<double>(pos.size());
  std::vector<std::size_t> idx;
  if (method == ResampleMethod::oversample_minority) {
    const auto want = static_cast<std::size_t>(std::ceil(target_rate * n0 / (1.0 - target_rate) - 1e-9));
    idx.resize(m.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t k = pos.size(); k < want; ++k) {
      idx.push_back(pos[static_cast<std::size_t>(rng.below(pos.size()))]);
    }
  } else {
    const auto keep = static_cast<std::size_t>(std::floor(n1 * (1.0 - target_rate) / target_rate + 1e-9));
    // Partial Fisher-Yates, then restore the original row order.
    for (std::size_t k = 0; k < keep && k < neg.size(); ++k) {
      const auto j = k + static_cast<std::size_t>(rng.below(neg.size() - k));
      std::swap(neg[k], neg[j]);
    }
    neg.resize(std::min(keep, neg.size()));
    idx = pos;
    idx.insert(idx.end(), neg.begin(), neg.end());
    std::sort(idx.begin(), idx.end());
  }
  return m.take_rows(idx);
}

// ---------------------------------------------------------------------------

Dataset restrict_subpopulation(const Dataset& d, const SubjectPredicate& predicate) {
  predicate.check(d.schema);
  if (predicate.is_trivial()) return d;
  Dataset out = filter_subjects(d, [&](const SubjectRecord& s) { return predicate(d.schema, s); });
  if (out.subjects.empty()) throw Error(Errc::empty_result, "no subject satisfies the predicate");
  return out;
}

// ---------------------------------------------------------------------------

SelectionMethod parse_selection(std::string_view name) {
  if (name == "none") return SelectionMethod::none;
  if (name == "forward_stepwise") return SelectionMethod::forward_stepwise;
  if (name == "bootstrap_stability") return SelectionMethod::bootstrap_stability;
  if (name == "l1_path") return SelectionMethod::l1_path;
  throw Error(Errc::config_invalid, "unknown selection method " + std::string(name));
}

void SelectionSpec::validate() const {
  if (method == SelectionMethod::bootstrap_stability) {
    if (replicates < 10) throw Error(Errc::invalid_spec, "bootstrap needs >= 10 replicates");
    if (!(inclusion_threshold > 0.0 && inclusion_threshold <= 1.0)) {
      throw Error(Errc::invalid_spec, "inclusion threshold must lie in (0,1]");
    }
  }
  if (!(penalty >= 0.0)) throw Error(Errc::invalid_spec, "negative stepwise penalty");
  if (!(lambda >= 0.0)) throw Error(Errc::invalid_spec, "negative L1 penalty");
}

SelectionSpec SelectionSpec::from_json(const nlohmann::json& j) {
  SelectionSpec s;
  s.method = parse_selection(j.value("method", std::string("none")));
  s.penalty = j.value("penalty", s.penalty);
  s.replicates = j.value("replicates", s.replicates);
  s.inclusion_threshold = j.value("inclusion_threshold", s.inclusion_threshold);
  s.lambda = j.value("lambda", s.lambda);
  s.validate();
  return s;
}

namespace {

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& X, const std::vector<int>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = X.col(cols[k]);
  return out;
}

bool is_constant(const Eigen::MatrixXd& X, int col) {
  if (X.rows() == 0) return true;
  const auto c = X.col(col);
  return c.maxCoeff() == c.minCoeff();
}

}  // namespace

std::vector<int> forward_stepwise(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  double penalty) {
  std::vector<int> selected;
  std::vector<bool> used(static_cast<std::size_t>(X.cols()), false);
  for (int j = 0; j < X.cols(); ++j) used[static_cast<std::size_t>(j)] = is_constant(X, j);

  const auto score = [&](const std::vector<int>& cols) {
    const Eigen::MatrixXd sub = gather_columns(X, cols);
    const auto fit = fit_logistic(sub, y);
    return logistic_deviance(sub, y, fit) + penalty * static_cast<double>(cols.size() + 1);
  };

  double current = score(selected);
  for (;;) {
    double best = current;
    int best_col = -1;
    for (int j = 0; j < X.cols(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      auto trial = selected;
      trial.push_back(j);
      const double s = score(trial);
      if (s < best) {  // strict: ties keep the lower index found first
        best = s;
        best_col = j;
      }
    }
    if (best_col < 0) break;
    selected.push_back(best_col);
    used[static_cast<std::size_t>(best_col)] = true;
    current = best;
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

Selection select_variables(const LabeledMatrix& m, const SelectionSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int p = static_cast<int>(m.X.cols());
  Selection out;
  switch (spec.method) {
    case SelectionMethod::none:
      out.columns.resize(static_cast<std::size_t>(p));
      std::iota(out.columns.begin(), out.columns.end(), 0);
      break;
    case SelectionMethod::forward_stepwise:
      out.columns = forward_stepwise(m.X, m.y, spec.penalty);
      break;
    case SelectionMethod::bootstrap_stability: {
      std::vector<int> counts(static_cast<std::size_t>(p), 0);
      const auto n = static_cast<std::size_t>(m.X.rows());
      for (int b = 0; b < spec.replicates; ++b) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        Eigen::MatrixXd Xb(m.X.rows(), m.X.cols());
        Eigen::VectorXd yb(m.y.size());
        for (std::size_t i = 0; i < n; ++i) {
          const auto r = static_cast<Eigen::Index>(rng.below(n));
          Xb.row(static_cast<Eigen::Index>(i)) = m.X.row(r);
          yb(static_cast<Eigen::Index>(i)) = m.y(r);
        }
        for (int c : forward_stepwise(Xb, yb, spec.penalty)) ++counts[static_cast<std::size_t>(c)];
      }
      for (int j = 0; j < p; ++j) {
        const double freq = static_cast<double>(counts[static_cast<std::size_t>(j)]) /
                            static_cast<double>(spec.replicates);
        out.frequency.push_back(freq);
        if (static_cast<double>(counts[static_cast<std::size_t>(j)]) >=
            spec.inclusion_threshold * static_cast<double>(spec.replicates) - 1e-9) {
          out.columns.push_back(j);
        }
      }
      break;
    }
    case SelectionMethod::l1_path: {
      const auto fit = fit_l1_logistic(m.X, m.y, spec.lambda);
      for (int j = 0; j < p; ++j) {
        if (fit.coefficients(j) != 0.0) out.columns.push_back(j);
      }
      break;
    }
  }
  if (out.columns.empty()) {
    out.intercept_only = true;
    return out;
  }
  if (std::all_of(out.columns.begin(), out.columns.end(),
                  [&](int c) { return is_constant(m.X, c); })) {
    throw Error(Errc::degenerate_design, "every selected column is constant");
  }
  return out;
}

}  // namespace multiverse

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

#include "multiverse/runner.hpp"

#include <algorithm>

#include "multiverse/error.hpp"
#include "multiverse/hash.hpp"
#include "multiverse/random.hpp"

namespace multiverse {

PathStages resolve_stages(const RunConfig& config, const PathConfig& path) {
  PathStages s;
  s.model.min_rows = config.min_rows;
  s.threshold = config.metrics.threshold;
  bool have_outcome = false;
  const auto& u = config.universe;
  try {
    for (std::size_t k = 0; k < u.dimensions.size(); ++k) {
      const auto& p = u.dimensions[k].options[path.options[k]].parameters;
      switch (u.dimensions[k].stage) {
        case Stage::outcome_definition:
          s.outcome = OutcomeDefinition::from_json(p);
          have_outcome = true;
          break;
        case Stage::imputation:
          s.imputation = parse_imputation(p.value("method", std::string("mean_mode")));
          break;
        case Stage::rare_grouping:
          s.rare_threshold = p.value("threshold", 0.0);
          break;
        case Stage::resampling:
          s.resampling = parse_resample(p.value("method", std::string("none")));
          s.target_rate = p.value("target_rate", s.target_rate);
          break;
        case Stage::subpopulation:
          if (p.contains("predicate")) s.subpopulation = SubjectPredicate::from_json(p["predicate"]);
          break;
        case Stage::variable_selection:
          s.selection = SelectionSpec::from_json(p);
          break;
        case Stage::model_family: {
          auto spec = p;
          if (!spec.contains("min_rows")) spec["min_rows"] = config.min_rows;
          s.model = ModelSpec::from_json(spec);
          break;
        }
        case Stage::model_seed:
          s.model_seed = p.value("seed", std::uint64_t{0});
          break;
        case Stage::binning:
          s.threshold = p.value("threshold", s.threshold);
          break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_invalid, e.what());
  }
  if (!have_outcome) throw Error(Errc::config_invalid, "universe needs an outcome_definition dimension");
  return s;
}

PathResult run_path(const RunConfig& config, const HoldoutSplit& split, const PathConfig& path,
                    std::size_t order) {
  PathResult r;
  r.path = path;
  r.order = order;
  r.seed = path_seed(config.master_seed, path.path_id);
  try {
    const PathStages st = resolve_stages(config, path);

    const Dataset train_data = restrict_subpopulation(split.train, st.subpopulation);
    const LabeledFrame train_raw = derive_outcome(train_data, st.outcome);
    const LabeledFrame hold_raw = derive_outcome(split.holdout, st.outcome);

    const auto imputer = Imputer::fit(train_raw, st.imputation, &r.warnings);
    const LabeledFrame train_imp = imputer.apply(train_raw, true, config.min_rows);
    const LabeledFrame hold_imp = imputer.apply(hold_raw, false);

    const auto grouper = RareGrouper::fit(train_imp, st.rare_threshold, &r.warnings);
    const LabeledFrame train_grp = grouper.apply(train_imp);
    const LabeledFrame hold_grp = grouper.apply(hold_imp);

    const auto encoder = Encoder::fit(train_grp);
    LabeledMatrix train = encoder.apply(train_grp, &r.warnings);
    LabeledMatrix hold = encoder.apply(hold_grp, &r.warnings);

    train = resample(train, st.resampling, st.target_rate, derive_seed(r.seed, 1));

    const Selection sel = select_variables(train, st.selection, derive_seed(r.seed, 2));
    train = train.take_columns(sel.columns);
    hold = hold.take_columns(sel.columns);
    if (sel.intercept_only) r.warnings.emplace_back("selection kept no column; intercept-only model");

    const auto model_seed = derive_seed(derive_seed(r.seed, 3), st.model_seed);
    FittedModel fit = fit_model(train, st.model, model_seed);
    fit.path_id = path.path_id;
    r.train_rows = train.size();
    r.model_columns = fit.columns;
    for (auto& w : fit.warnings) r.warnings.push_back(w);
    r.model = fit.to_json();

    r.scores = predict_proba(fit, hold.X);
    r.labels = hold.y;
    MetricsOptions mo = config.metrics;
    mo.threshold = st.threshold;
    r.metrics = compute_path_metrics(r.scores, r.labels, hold.rows, hold.groups, mo);
    for (const auto& w : r.metrics.fairness.warnings) r.warnings.push_back(w);
    r.ok = true;
  } catch (const Error& e) {
    r.ok = false;
    r.failure = e.what();
    r.scores.resize(0);
    r.labels.resize(0);
  }
  return r;
}

std::size_t RunResult::ok_count() const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const PathResult& r) { return r.ok; }));
}

const PathResult* RunResult::result_for(std::uint64_t path_id) const {
  for (const auto& r : results) {
    if (r.path.path_id == path_id) return &r;
  }
  return nullptr;
}

RunResult execute(const RunConfig& config, std::size_t workers) {
  RunResult run;
  run.config = config;
  run.universe = validate_universe(config.universe);
  const auto paths = enumerate_paths(config.universe);
  run.dataset = materialize_dataset(config);
  run.split = split_inconsistency_holdout(run.dataset, config.holdout_fraction, config.master_seed,
                                          config.stratify_by);

  // Fail fast on parameter errors that would sink every path alike.
  for (const auto& p : paths) resolve_stages(config, p);

  run.results.resize(paths.size());
  parallel_for(paths.size(), workers, [&](std::size_t i) {
    run.results[i] = run_path(config, run.split, paths[i], i);
  });

  std::vector<std::string> subjects;
  for (const auto& s : run.split.holdout.subjects) subjects.push_back(s.subject_id);
  std::vector<PathScores> columns;
  for (const auto& r : run.results) {
    columns.push_back({r.order, r.path.path_id,
                       r.ok ? std::optional<Eigen::VectorXd>(r.scores) : std::nullopt, r.failure});
  }
  const ScoreMatrix all = build_score_matrix(subjects, std::move(columns));

  PathConfig baseline;
  baseline.options = config.baseline_options();
  baseline.path_id = fnv1a64(PathConfig::canonical_choices(config.universe, baseline.options));
  run.baseline_path = baseline.path_id;
  const PathResult* base = run.result_for(baseline.path_id);

  for (auto& r : run.results) {
    if (!r.ok || !base || !base->ok || &r == base) continue;
    if (r.labels == base->labels) {
      r.metrics.baseline_crossing = roc_crossing(r.scores, base->scores, r.labels);
    }
  }
  for (const auto& r : run.results) {
    if (r.ok) run.metrics.push_back(r.metrics);
  }

  run.matrix = rashomon_filter(all, run.metrics, config.rashomon);
  run.profiles = subject_profile(run.matrix, config.binning, config.abstain);
  try {
    run.multiplicity = multiplicity_metrics(run.matrix, run.baseline_path, config.metrics.threshold);
  } catch (const Error& e) {
    run.multiplicity_error = e.what();
  }
  return run;
}

}  // namespace multiverse

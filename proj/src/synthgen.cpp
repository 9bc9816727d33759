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

#include "multiverse/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multiverse/error.hpp"
#include "multiverse/random.hpp"

namespace multiverse {

std::int64_t years_to_days(double years) {
  return static_cast<std::int64_t>(std::floor(years * kDaysPerYear + 1e-9));
}

double PiecewiseHazard::cumulative(double t) const {
  double total = 0.0;
  double start = 0.0;
  for (std::size_t k = 0; k < rates_per_day.size(); ++k) {
    const bool last = k + 1 == rates_per_day.size();
    const double end = last ? std::numeric_limits<double>::infinity()
                            : static_cast<double>(knots_days[k]);
    if (t <= start) break;
    total += rates_per_day[k] * (std::min(t, end) - start);
    start = end;
  }
  return total;
}

std::optional<double> PiecewiseHazard::inverse_cumulative(double target) const {
  if (target <= 0.0) return 0.0;
  double accumulated = 0.0;
  double start = 0.0;
  for (std::size_t k = 0; k < rates_per_day.size(); ++k) {
    const bool last = k + 1 == rates_per_day.size();
    const double rate = rates_per_day[k];
    if (last) {
      if (rate <= 0.0) return std::nullopt;
      return start + (target - accumulated) / rate;
    }
    const double end = static_cast<double>(knots_days[k]);
    const double segment = rate * (end - start);
    if (accumulated + segment >= target && rate > 0.0) {
      return start + (target - accumulated) / rate;
    }
    accumulated += segment;
    start = end;
  }
  return std::nullopt;
}

double PiecewiseHazard::survival(double t) const { return std::exp(-cumulative(t)); }

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void check_distribution(const std::vector<std::pair<std::string, double>>& probs,
                        const std::string& what) {
  if (probs.empty()) throw Error(Errc::invalid_spec, what + " has no entries");
  double total = 0.0;
  for (const auto& [name, p] : probs) {
    if (!is_probability(p)) {
      throw Error(Errc::invalid_spec, what + " probability out of [0,1] for " + name);
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(Errc::invalid_spec, what + " probabilities do not sum to 1");
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

std::size_t draw_level(Rng& rng, const std::vector<std::pair<std::string, double>>& probs) {
  std::vector<double> w;
  w.reserve(probs.size());
  for (const auto& [_, p] : probs) w.push_back(p);
  return rng.categorical(w);
}

struct DrawnCovariates {
  std::string group;
  std::vector<FeatureValue> features;
  double linear_predictor = 0.0;
};

// Per-subject draws of group and features; shared by generate_population and
// sample_linear_predictors so both see identical covariates for a seed.
DrawnCovariates draw_covariates(const PopulationSpec& spec, Rng& rng) {
  DrawnCovariates out;
  out.group = spec.group_mix[draw_level(rng, spec.group_mix)].first;
  if (auto it = spec.group_intercepts.find(out.group); it != spec.group_intercepts.end()) {
    out.linear_predictor += it->second;
  }
  for (const auto& f : spec.features) {
    if (const auto* num = std::get_if<NumericGenerator>(&f.generator)) {
      const double x = rng.normal(num->mean, num->sd);
      out.features.emplace_back(x);
      if (auto it = spec.numeric_weights.find(f.name); it != spec.numeric_weights.end()) {
        out.linear_predictor += it->second * x;
      }
    } else {
      const auto& cat = std::get<CategoricalGenerator>(f.generator);
      const auto& level = cat.levels[draw_level(rng, cat.levels)].first;
      out.features.emplace_back(level);
      if (auto it = spec.level_weights.find(f.name); it != spec.level_weights.end()) {
        if (auto lw = it->second.find(level); lw != it->second.end()) {
          out.linear_predictor += lw->second;
        }
      }
    }
  }
  return out;
}

}  // namespace

void PopulationSpec::validate() const {
  if (n < 1) throw Error(Errc::invalid_spec, "population size must be >= 1");
  check_distribution(group_mix, "group_mix");
  for (const auto& f : features) {
    if (const auto* num = std::get_if<NumericGenerator>(&f.generator)) {
      if (!(num->sd >= 0.0)) throw Error(Errc::invalid_spec, "negative sd for " + f.name);
    } else {
      check_distribution(std::get<CategoricalGenerator>(f.generator).levels,
                         "levels of " + f.name);
    }
  }
  (void)schema();  // duplicate feature names
  for (const auto& [name, _] : numeric_weights) {
    const auto it = std::find_if(features.begin(), features.end(),
                                 [&](const auto& f) { return f.name == name; });
    if (it == features.end() || !std::holds_alternative<NumericGenerator>(it->generator)) {
      throw Error(Errc::invalid_spec, "numeric weight for unknown feature " + name);
    }
  }
  if (hazard.rates_per_day.empty() ||
      hazard.knots_days.size() + 1 < hazard.rates_per_day.size()) {
    throw Error(Errc::invalid_spec, "hazard needs one knot per rate (last may be open)");
  }
  for (double r : hazard.rates_per_day) {
    if (!(r >= 0.0)) throw Error(Errc::invalid_spec, "negative hazard rate");
  }
  for (std::size_t k = 1; k < hazard.knots_days.size(); ++k) {
    if (hazard.knots_days[k] <= hazard.knots_days[k - 1]) {
      throw Error(Errc::invalid_spec, "hazard knots must increase");
    }
  }
  for (double p : {conviction_given_arrest, felony_share, out_of_state_share,
                   prior_felony_share}) {
    if (!is_probability(p)) throw Error(Errc::invalid_spec, "share out of [0,1]");
  }
  if (prior_events_mean < 0.0) throw Error(Errc::invalid_spec, "negative prior mean");
  if (anchor_min_day < 1 || anchor_max_day < anchor_min_day) {
    throw Error(Errc::invalid_spec, "anchor day range invalid");
  }
  if (follow_up_days < 0) throw Error(Errc::invalid_spec, "negative follow-up");
}

FeatureSchema PopulationSpec::schema() const {
  std::vector<FeatureSpec> specs;
  for (const auto& f : features) {
    FeatureSpec s;
    s.name = f.name;
    if (const auto* cat = std::get_if<CategoricalGenerator>(&f.generator)) {
      s.kind = FeatureKind::categorical;
      for (const auto& [level, _] : cat->levels) s.levels.push_back(level);
    }
    specs.push_back(std::move(s));
  }
  return FeatureSchema(std::move(specs));
}

PopulationSpec PopulationSpec::from_json(const nlohmann::json& j) {
  PopulationSpec spec;
  spec.n = j.at("n").get<std::size_t>();
  for (const auto& f : j.at("features")) {
    FeatureGenerator g;
    g.name = f.at("name").get<std::string>();
    if (f.value("kind", std::string("numeric")) == "numeric") {
      g.generator = NumericGenerator{f.value("mean", 0.0), f.value("sd", 1.0)};
    } else {
      CategoricalGenerator cat;
      for (const auto& [level, p] : f.at("levels").items()) {
        cat.levels.emplace_back(level, p.get<double>());
      }
      g.generator = std::move(cat);
    }
    spec.features.push_back(std::move(g));
  }
  for (const auto& [group, p] : j.at("group_mix").items()) {
    spec.group_mix.emplace_back(group, p.get<double>());
  }
  if (j.contains("numeric_weights")) {
    spec.numeric_weights = j["numeric_weights"].get<std::map<std::string, double>>();
  }
  if (j.contains("level_weights")) {
    spec.level_weights =
        j["level_weights"].get<std::map<std::string, std::map<std::string, double>>>();
  }
  if (j.contains("group_intercepts")) {
    spec.group_intercepts = j["group_intercepts"].get<std::map<std::string, double>>();
  }
  const auto& hz = j.at("hazard");
  if (hz.contains("targets")) {
    std::vector<RateTarget> targets;
    for (const auto& t : hz["targets"]) {
      const std::int64_t days = t.contains("window_years")
                                    ? years_to_days(t["window_years"].get<double>())
                                    : t.at("window_days").get<std::int64_t>();
      targets.push_back({days, t.at("rate").get<double>()});
    }
    if (hz.value("marginal", true)) {
      const auto lp = sample_linear_predictors(spec, hz.value("calibration_n", std::size_t{100000}),
                                               hz.value("calibration_seed", std::uint64_t{1}));
      spec.hazard = calibrate_hazard(targets, lp);
    } else {
      spec.hazard = calibrate_hazard(targets);
    }
  } else {
    spec.hazard.knots_days = hz.at("knots_days").get<std::vector<std::int64_t>>();
    if (hz.contains("rates_per_year")) {
      for (double r : hz["rates_per_year"].get<std::vector<double>>()) {
        spec.hazard.rates_per_day.push_back(r / kDaysPerYear);
      }
    } else {
      spec.hazard.rates_per_day = hz.at("rates_per_day").get<std::vector<double>>();
    }
  }
  spec.conviction_given_arrest = j.value("conviction_given_arrest", spec.conviction_given_arrest);
  spec.felony_share = j.value("felony_share", spec.felony_share);
  spec.out_of_state_share = j.value("out_of_state_share", spec.out_of_state_share);
  spec.prior_events_mean = j.value("prior_events_mean", spec.prior_events_mean);
  spec.prior_felony_share = j.value("prior_felony_share", spec.prior_felony_share);
  spec.anchor_min_day = j.value("anchor_min_day", spec.anchor_min_day);
  spec.anchor_max_day = j.value("anchor_max_day", spec.anchor_max_day);
  spec.follow_up_days = j.value("follow_up_days", spec.follow_up_days);
  spec.validate();
  return spec;
}

std::vector<double> sample_linear_predictors(const PopulationSpec& spec, std::size_t n,
                                             std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    out.push_back(draw_covariates(spec, rng).linear_predictor);
  }
  return out;
}

Population generate_population(const PopulationSpec& spec, std::uint64_t seed) {
  spec.validate();
  Population pop;
  pop.data.schema = spec.schema();
  pop.data.provenance = {"synthetic population (piecewise-exponential latent hazard)",
                         "simulated; day offsets from an arbitrary epoch",
                         "none injected at generation; see run configuration injectors"};
  pop.data.subjects.reserve(spec.n);
  const int width = static_cast<int>(std::to_string(spec.n).size());

  for (std::size_t i = 0; i < spec.n; ++i) {
    Rng rng(derive_seed(seed, i));
    auto cov = draw_covariates(spec, rng);

    SubjectRecord s;
    std::string id = std::to_string(i + 1);
    s.subject_id = "S" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
    s.group = std::move(cov.group);
    s.features = std::move(cov.features);
    s.anchor_day = spec.anchor_min_day +
                   static_cast<std::int64_t>(rng.below(
                       static_cast<std::uint64_t>(spec.anchor_max_day - spec.anchor_min_day + 1)));

    const auto priors = rng.poisson(spec.prior_events_mean);
    for (std::uint64_t k = 0; k < priors; ++k) {
      const auto day = static_cast<std::int64_t>(
          rng.below(static_cast<std::uint64_t>(s.anchor_day)));
      const Degree degree = rng.bernoulli(spec.prior_felony_share) ? Degree::felony
                                                                   : Degree::misdemeanor;
      s.events.push_back({EventKind::conviction, degree, day, Jurisdiction::in_state});
    }
    std::sort(s.events.begin(), s.events.end(),
              [](const EventRecord& a, const EventRecord& b) { return a.day < b.day; });

    const double multiplier = std::exp(cov.linear_predictor);
    const double target = rng.exponential() / multiplier;
    const auto t = spec.hazard.inverse_cumulative(target);
    const Degree degree = rng.bernoulli(spec.felony_share) ? Degree::felony
                                                           : Degree::misdemeanor;
    const Jurisdiction juris = rng.bernoulli(spec.out_of_state_share)
                                   ? Jurisdiction::out_of_state
                                   : Jurisdiction::in_state;
    const bool convicted = rng.bernoulli(spec.conviction_given_arrest);

    std::optional<double> failure;
    if (t && *t <= static_cast<double>(spec.follow_up_days)) {
      failure = *t;
      // Day index d covers continuous time (d-1, d], so y(window) = [t <= window].
      const auto offset = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(*t)));
      const std::int64_t day = s.anchor_day + offset;
      s.events.push_back({EventKind::arrest, degree, day, juris});
      if (convicted) s.events.push_back({EventKind::conviction, degree, day, juris});
    }
    pop.truth.linear_predictor.push_back(cov.linear_predictor);
    pop.truth.failure_time.push_back(failure);
    pop.truth.convicted.push_back(failure.has_value() && convicted);
    pop.data.subjects.push_back(std::move(s));
  }
  return pop;
}

namespace {

void check_targets(std::span<const RateTarget> targets) {
  if (targets.empty()) throw Error(Errc::non_monotone_targets, "no calibration targets");
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto& t = targets[k];
    if (!(t.cumulative_rate > 0.0 && t.cumulative_rate < 1.0) || t.window_days <= 0) {
      throw Error(Errc::non_monotone_targets, "target rates must lie in (0,1)");
    }
    if (k > 0 && (t.window_days <= targets[k - 1].window_days ||
                  t.cumulative_rate <= targets[k - 1].cumulative_rate)) {
      throw Error(Errc::non_monotone_targets,
                  "targets must increase strictly in window and rate");
    }
  }
}

}  // namespace

PiecewiseHazard calibrate_hazard(std::span<const RateTarget> targets) {
  check_targets(targets);
  PiecewiseHazard h;
  double prev_survival = 1.0;
  std::int64_t prev_day = 0;
  for (const auto& t : targets) {
    const double survival = 1.0 - t.cumulative_rate;
    h.knots_days.push_back(t.window_days);
    h.rates_per_day.push_back(std::log(prev_survival / survival) /
                              static_cast<double>(t.window_days - prev_day));
    prev_survival = survival;
    prev_day = t.window_days;
  }
  return h;
}

PiecewiseHazard calibrate_hazard(std::span<const RateTarget> targets,
                                 std::span<const double> linear_predictors) {
  check_targets(targets);
  if (linear_predictors.empty()) return calibrate_hazard(targets);
  std::vector<double> multipliers;
  multipliers.reserve(linear_predictors.size());
  for (double lp : linear_predictors) multipliers.push_back(std::exp(lp));

  const auto mean_survival = [&](double cumulative) {
    double total = 0.0;
    for (double m : multipliers) total += std::exp(-m * cumulative);
    return total / static_cast<double>(multipliers.size());
  };

  PiecewiseHazard h;
  double prev_cumulative = 0.0;
  std::int64_t prev_day = 0;
  for (const auto& t : targets) {
    const double survival = 1.0 - t.cumulative_rate;
    // mean_survival is strictly decreasing in the cumulative baseline hazard.
    double lo = prev_cumulative;
    double hi = std::max(1.0, 2.0 * prev_cumulative);
    while (mean_survival(hi) > survival) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mean_survival(mid) > survival ? lo : hi) = mid;
    }
    const double cumulative = 0.5 * (lo + hi);
    h.knots_days.push_back(t.window_days);
    h.rates_per_day.push_back((cumulative - prev_cumulative) /
                              static_cast<double>(t.window_days - prev_day));
    prev_cumulative = cumulative;
    prev_day = t.window_days;
  }
  return h;
}

// ---------------------------------------------------------------------------

BiasInjectorSpec bias_injector_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "label_noise") {
    LabelNoise s;
    if (j.contains("flip_rate_by_group")) {
      s.flip_rate_by_group = j["flip_rate_by_group"].get<std::map<std::string, double>>();
    }
    s.default_flip_rate = j.value("flip_rate", 0.0);
    s.horizon_days = j.value("horizon_days", s.horizon_days);
    if (j.contains("feature")) s.feature = j["feature"].get<std::string>();
    s.confusion_rate = j.value("confusion_rate", 0.0);
    return s;
  }
  if (kind == "selection_bias") {
    SelectionBias s;
    s.intercept = j.value("intercept", 0.0);
    if (j.contains("base_inclusion")) {
      const double p = j["base_inclusion"].get<double>();
      if (!is_probability(p)) throw Error(Errc::rate_out_of_range, "base_inclusion");
      s.intercept = p >= 1.0 ? std::numeric_limits<double>::infinity() : logit(p);
    }
    if (j.contains("numeric_weights")) {
      s.numeric_weights = j["numeric_weights"].get<std::map<std::string, double>>();
    }
    if (j.contains("group_offsets")) {
      s.group_offsets = j["group_offsets"].get<std::map<std::string, double>>();
    }
    return s;
  }
  if (kind == "coverage_filter") {
    return CoverageFilter{SubjectPredicate::from_json(j.at("keep"))};
  }
  if (kind == "measurement_noise") {
    MeasurementNoise s;
    s.sd_by_feature = j.at("sd_by_feature").get<std::map<std::string, double>>();
    if (j.contains("group_sd_multiplier")) {
      s.group_sd_multiplier = j["group_sd_multiplier"].get<std::map<std::string, double>>();
    }
    return s;
  }
  if (kind == "missingness") {
    Missingness s;
    s.feature = j.at("feature").get<std::string>();
    const auto mech = j.value("mechanism", std::string("MCAR"));
    if (mech == "MCAR") s.mechanism = MissingMechanism::mcar;
    else if (mech == "MAR") s.mechanism = MissingMechanism::mar;
    else if (mech == "MNAR") s.mechanism = MissingMechanism::mnar;
    else throw Error(Errc::config_invalid, "unknown missingness mechanism " + mech);
    s.rate = j.at("rate").get<double>();
    if (j.contains("condition_on")) s.condition_on = j["condition_on"].get<std::string>();
    s.strength = j.value("strength", 1.0);
    return s;
  }
  throw Error(Errc::config_invalid, "unknown injector kind " + kind);
}

std::string describe(const BiasInjectorSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LabelNoise>) {
          return s.feature ? "label noise on levels of " + *s.feature
                           : std::string("label noise on outcome events");
        } else if constexpr (std::is_same_v<T, SelectionBias>) {
          return "selection bias (feature/group dependent inclusion)";
        } else if constexpr (std::is_same_v<T, CoverageFilter>) {
          return "coverage filter " + s.keep.to_json().dump();
        } else if constexpr (std::is_same_v<T, MeasurementNoise>) {
          return "measurement noise on numeric features";
        } else {
          return "missingness on " + s.feature;
        }
      },
      spec);
}

namespace {

struct ColumnMoments {
  double mean = 0.0;
  double sd = 1.0;
};

ColumnMoments moments(const Dataset& d, std::size_t j) {
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& s : d.subjects) {
    if (const auto* x = std::get_if<double>(&s.features[j])) {
      sum += *x;
      sq += *x * *x;
      ++n;
    }
  }
  if (n == 0) return {};
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
  return {mean, var > 0.0 ? std::sqrt(var) : 1.0};
}

double rate_for(const LabelNoise& s, const std::string& group) {
  const auto it = s.flip_rate_by_group.find(group);
  return it == s.flip_rate_by_group.end() ? s.default_flip_rate : it->second;
}

bool is_outcome_event(const EventRecord& e, const SubjectRecord& s, std::int64_t horizon) {
  return (e.kind == EventKind::arrest || e.kind == EventKind::conviction) &&
         e.day > s.anchor_day && e.day <= s.anchor_day + horizon;
}

}  // namespace

Dataset inject_bias(const Dataset& d, const BiasInjectorSpec& spec, std::uint64_t seed) {
  return std::visit(
      [&](const auto& s) -> Dataset {
        using T = std::decay_t<decltype(s)>;
        Dataset out = d;

        if constexpr (std::is_same_v<T, LabelNoise>) {
          if (!is_probability(s.default_flip_rate) || !is_probability(s.confusion_rate)) {
            throw Error(Errc::rate_out_of_range, "label noise rate outside [0,1]");
          }
          for (const auto& [g, r] : s.flip_rate_by_group) {
            if (!is_probability(r)) {
              throw Error(Errc::rate_out_of_range, "flip rate for group " + g);
            }
          }
          if (s.feature) {
            const auto j = d.schema.require(*s.feature);
            const auto& levels = d.schema[j].levels;
            if (d.schema[j].kind != FeatureKind::categorical) {
              throw Error(Errc::invalid_spec, "level confusion needs a categorical feature");
            }
            for (std::size_t i = 0; i < out.subjects.size(); ++i) {
              Rng rng(derive_seed(seed, i));
              auto* level = std::get_if<std::string>(&out.subjects[i].features[j]);
              if (!level || levels.size() < 2 || !rng.bernoulli(s.confusion_rate)) continue;
              const auto current = static_cast<std::size_t>(
                  std::find(levels.begin(), levels.end(), *level) - levels.begin());
              auto pick = static_cast<std::size_t>(rng.below(levels.size() - 1));
              if (pick >= current) ++pick;
              *level = levels[pick];
            }
            return out;
          }
          for (std::size_t i = 0; i < out.subjects.size(); ++i) {
            auto& subj = out.subjects[i];
            Rng rng(derive_seed(seed, i));
            const double rate = rate_for(s, subj.group);
            if (rate <= 0.0 || !rng.bernoulli(rate)) continue;
            const bool present =
                std::any_of(subj.events.begin(), subj.events.end(), [&](const EventRecord& e) {
                  return is_outcome_event(e, subj, s.horizon_days);
                });
            if (present) {
              std::erase_if(subj.events, [&](const EventRecord& e) {
                return is_outcome_event(e, subj, s.horizon_days);
              });
            } else {
              const std::int64_t day =
                  subj.anchor_day + 1 +
                  static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(
                      std::max<std::int64_t>(1, s.horizon_days))));
              subj.events.push_back({EventKind::arrest, Degree::felony, day,
                                     Jurisdiction::in_state});
              subj.events.push_back({EventKind::conviction, Degree::felony, day,
                                     Jurisdiction::in_state});
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, SelectionBias>) {
          std::vector<std::pair<std::size_t, double>> weights;
          for (const auto& [name, w] : s.numeric_weights) {
            weights.emplace_back(d.schema.require(name), w);
          }
          out.subjects.clear();
          for (std::size_t i = 0; i < d.subjects.size(); ++i) {
            const auto& subj = d.subjects[i];
            Rng rng(derive_seed(seed, i));
            double eta = s.intercept;
            for (const auto& [j, w] : weights) {
              if (const auto* x = std::get_if<double>(&subj.features[j])) eta += w * *x;
            }
            if (auto it = s.group_offsets.find(subj.group); it != s.group_offsets.end()) {
              eta += it->second;
            }
            const double inclusion = std::isinf(eta) ? (eta > 0 ? 1.0 : 0.0) : sigmoid(eta);
            if (inclusion >= 1.0 || rng.bernoulli(inclusion)) out.subjects.push_back(subj);
          }
          return out;
        } else if constexpr (std::is_same_v<T, CoverageFilter>) {
          s.keep.check(d.schema);
          return filter_subjects(d, [&](const SubjectRecord& r) { return s.keep(d.schema, r); });
        } else if constexpr (std::is_same_v<T, MeasurementNoise>) {
          std::vector<std::pair<std::size_t, double>> targets;
          for (const auto& [name, sd] : s.sd_by_feature) {
            const auto j = d.schema.require(name);
            if (d.schema[j].kind != FeatureKind::numeric) {
              throw Error(Errc::invalid_spec, "measurement noise on categorical " + name);
            }
            if (!(sd >= 0.0)) throw Error(Errc::rate_out_of_range, "negative noise sd");
            targets.emplace_back(j, sd);
          }
          for (const auto& [g, m] : s.group_sd_multiplier) {
            if (!(m >= 0.0)) throw Error(Errc::rate_out_of_range, "negative multiplier " + g);
          }
          for (std::size_t i = 0; i < out.subjects.size(); ++i) {
            auto& subj = out.subjects[i];
            Rng rng(derive_seed(seed, i));
            double mult = 1.0;
            if (auto it = s.group_sd_multiplier.find(subj.group);
                it != s.group_sd_multiplier.end()) {
              mult = it->second;
            }
            for (const auto& [j, sd] : targets) {
              const double noise = rng.normal();
              if (auto* x = std::get_if<double>(&subj.features[j]); x && sd * mult > 0.0) {
                *x += sd * mult * noise;
              }
            }
          }
          return out;
        } else {
          if (!is_probability(s.rate)) {
            throw Error(Errc::rate_out_of_range, "missingness rate outside [0,1]");
          }
          const auto j = d.schema.require(s.feature);
          std::optional<std::size_t> driver;
          if (s.mechanism == MissingMechanism::mar) {
            if (!s.condition_on) {
              throw Error(Errc::invalid_spec, "MAR missingness needs condition_on");
            }
            driver = d.schema.require(*s.condition_on);
          } else if (s.mechanism == MissingMechanism::mnar) {
            driver = j;
          }
          if (driver && d.schema[*driver].kind != FeatureKind::numeric) {
            throw Error(Errc::invalid_spec, "MAR/MNAR driver must be numeric");
          }
          const ColumnMoments m = driver ? moments(d, *driver) : ColumnMoments{};
          std::vector<FeatureSpec> specs = d.schema.features();
          specs[j].missing_allowed = true;
          out.schema = FeatureSchema(std::move(specs));
          for (std::size_t i = 0; i < out.subjects.size(); ++i) {
            auto& subj = out.subjects[i];
            Rng rng(derive_seed(seed, i));
            double p = s.rate;
            if (driver && s.rate > 0.0 && s.rate < 1.0) {
              double z = 0.0;
              if (const auto* x = std::get_if<double>(&subj.features[*driver])) {
                z = (*x - m.mean) / m.sd;
              }
              p = sigmoid(logit(s.rate) + s.strength * z);
            }
            if (p > 0.0 && rng.bernoulli(p)) subj.features[j] = std::monostate{};
          }
          return out;
        }
      },
      spec);
}

}  // namespace multiverse

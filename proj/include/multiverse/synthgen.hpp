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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "multiverse/data.hpp"
#include "multiverse/predicate.hpp"

namespace multiverse {

inline constexpr double kDaysPerYear = 365.0;

/// Years to whole days, floored.
std::int64_t years_to_days(double years);

/// Piecewise-constant hazard. rates[k] applies on (knots[k-1], knots[k]]
/// with knots[-1] = 0; the last rate continues past the final knot.
struct PiecewiseHazard {
  std::vector<std::int64_t> knots_days;
  std::vector<double> rates_per_day;

  double cumulative(double t_days) const;
  /// Smallest t with cumulative(t) == target, or nullopt if never reached.
  std::optional<double> inverse_cumulative(double target) const;
  /// Baseline survival exp(-cumulative(t)).
  double survival(double t_days) const;
};

struct NumericGenerator {
  double mean = 0.0;
  double sd = 1.0;
};

struct CategoricalGenerator {
  std::vector<std::pair<std::string, double>> levels;  // level -> probability
};

struct FeatureGenerator {
  std::string name;
  std::variant<NumericGenerator, CategoricalGenerator> generator;
};

struct PopulationSpec {
  std::size_t n = 1000;
  std::vector<FeatureGenerator> features;
  std::vector<std::pair<std::string, double>> group_mix;
  std::map<std::string, double> numeric_weights;
  std::map<std::string, std::map<std::string, double>> level_weights;
  std::map<std::string, double> group_intercepts;
  PiecewiseHazard hazard;

  /// Each failure is an arrest; it is also a conviction with this probability.
  double conviction_given_arrest = 1.0;
  double felony_share = 1.0;
  double out_of_state_share = 0.0;
  /// Pre-anchor history: Poisson count of prior convictions.
  double prior_events_mean = 0.0;
  double prior_felony_share = 0.5;
  std::int64_t anchor_min_day = 3650;
  std::int64_t anchor_max_day = 5475;
  std::int64_t follow_up_days = 20 * 365;

  /// Throws Error(invalid_spec).
  void validate() const;
  FeatureSchema schema() const;

  static PopulationSpec from_json(const nlohmann::json& j);
};

/// Ground truth kept beside (never inside) the Dataset.
struct LatentTruth {
  std::vector<double> linear_predictor;
  /// Days after anchor of the latent failure; nullopt if none within
  /// follow-up.
  std::vector<std::optional<double>> failure_time;
  std::vector<bool> convicted;
};

struct Population {
  Dataset data;
  LatentTruth truth;
};

Population generate_population(const PopulationSpec& spec, std::uint64_t seed);

/// Linear predictors of n subjects drawn from the spec's feature and group
/// generators (no outcomes). Used to calibrate heterogeneous populations.
std::vector<double> sample_linear_predictors(const PopulationSpec& spec, std::size_t n,
                                             std::uint64_t seed);

struct RateTarget {
  std::int64_t window_days = 0;
  double cumulative_rate = 0.0;
};

/// Homogeneous closed form: knots at the target windows and
/// rate_k = ln(S_{k-1} / S_k) / (t_k - t_{k-1}).
PiecewiseHazard calibrate_hazard(std::span<const RateTarget> targets);

/// Marginal calibration for subjects with hazard multipliers exp(lp_i):
/// solves mean_i exp(-exp(lp_i) H_k) = 1 - rate_k for every knot.
PiecewiseHazard calibrate_hazard(std::span<const RateTarget> targets,
                                 std::span<const double> linear_predictors);

// ---------------------------------------------------------------------------

enum class MissingMechanism { mcar, mar, mnar };

struct LabelNoise {
  std::map<std::string, double> flip_rate_by_group;
  double default_flip_rate = 0.0;
  std::int64_t horizon_days = 3 * 365;
  /// When set, corrupts this categorical feature's levels instead of the
  /// outcome events.
  std::optional<std::string> feature;
  double confusion_rate = 0.0;
};

struct SelectionBias {
  double intercept = 0.0;
  std::map<std::string, double> numeric_weights;
  std::map<std::string, double> group_offsets;
};

struct CoverageFilter {
  SubjectPredicate keep;
};

struct MeasurementNoise {
  std::map<std::string, double> sd_by_feature;
  std::map<std::string, double> group_sd_multiplier;
};

struct Missingness {
  std::string feature;
  MissingMechanism mechanism = MissingMechanism::mcar;
  double rate = 0.0;
  /// MAR only: the observed feature that drives missingness.
  std::optional<std::string> condition_on;
  double strength = 1.0;
};

using BiasInjectorSpec =
    std::variant<LabelNoise, SelectionBias, CoverageFilter, MeasurementNoise, Missingness>;

BiasInjectorSpec bias_injector_from_json(const nlohmann::json& j);
std::string describe(const BiasInjectorSpec& spec);

/// Returns a corrupted copy; d is left untouched.
Dataset inject_bias(const Dataset& d, const BiasInjectorSpec& spec, std::uint64_t seed);

}  // namespace multiverse

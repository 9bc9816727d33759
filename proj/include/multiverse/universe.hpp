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
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace multiverse {

/// The nine pipeline stages that may fork.
enum class Stage : std::uint8_t {
  outcome_definition,
  imputation,
  rare_grouping,
  resampling,
  subpopulation,
  variable_selection,
  model_family,
  model_seed,
  binning,
};

inline constexpr std::size_t kStageCount = 9;

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

enum class ReasonProvenance : std::uint8_t { local_law, domain_knowledge, data_driven };

std::string_view to_string(ReasonProvenance p);

struct Reasonableness {
  std::string rationale;
  ReasonProvenance provenance = ReasonProvenance::domain_knowledge;
};

struct Option {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  Reasonableness reasonableness;
};

struct Dimension {
  Stage stage = Stage::outcome_definition;
  std::vector<Option> options;

  std::string_view name() const { return to_string(stage); }
  std::optional<std::size_t> option_index(std::string_view option) const;
};

/// A conjunction of (dimension, option) pairs that may not co-occur.
struct Exclusion {
  std::vector<std::pair<std::string, std::string>> terms;
};

struct UniverseSpec {
  std::vector<Dimension> dimensions;
  std::vector<Exclusion> constraints;

  std::optional<std::size_t> dimension_index(std::string_view name) const;
  static UniverseSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// One concrete choice vector. `options[k]` indexes dimension k's options.
struct PathConfig {
  std::vector<std::size_t> options;
  std::uint64_t path_id = 0;

  /// [["dimension","option"],...] in declared dimension order.
  static std::string canonical_choices(const UniverseSpec& u,
                                       const std::vector<std::size_t>& options);
  std::string_view choice(const UniverseSpec& u, std::size_t dimension) const {
    return u.dimensions[dimension].options[options[dimension]].name;
  }
  const Option& option(const UniverseSpec& u, Stage stage) const;
  nlohmann::json choices_json(const UniverseSpec& u) const;
};

struct UniverseReport {
  std::uint64_t raw_paths = 0;
  std::uint64_t admissible_paths = 0;
  std::vector<std::string> empty_rationales;  // "dimension/option"
  std::vector<std::string> warnings;
};

inline constexpr std::uint64_t kLargeUniverseWarning = 100000;

/// Throws Error(invalid_spec) on structural defects, Error(unknown_reference)
/// for constraints naming undeclared dimensions/options and
/// Error(no_admissible_path) when every combination is excluded.
UniverseReport validate_universe(const UniverseSpec& u);

/// All admissible paths, lexicographic over dimension order then option order.
std::vector<PathConfig> enumerate_paths(const UniverseSpec& u);

/// stable_hash(master_seed ‖ path_id); see stable_hash_pair.
std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t path_id);

}  // namespace multiverse

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
#include <string>
#include <vector>

#include <json.hpp>

#include "multiverse/data.hpp"
#include "multiverse/inconsistency.hpp"
#include "multiverse/metrics.hpp"
#include "multiverse/synthgen.hpp"
#include "multiverse/universe.hpp"

namespace multiverse {

inline constexpr const char* kToolVersion = "0.1.0";

struct SynthSection {
  PopulationSpec population;
  std::vector<BiasInjectorSpec> injectors;
  std::uint64_t seed = 0;
};

struct DataSection {
  std::string subjects_path;
  std::string events_path;
  FeatureSchema schema;
  Provenance provenance;
};

/// A parsed run configuration (one JSON document).
struct RunConfig {
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  std::optional<SynthSection> synth;
  std::optional<DataSection> data;

  double holdout_fraction = 0.3;
  std::optional<std::string> stratify_by;

  UniverseSpec universe;
  RashomonRule rashomon;
  std::vector<BinningScheme> binning;
  MetricsOptions metrics;
  double fairness_tolerance = 0.01;
  /// dimension -> option; unset dimensions take their first option.
  std::map<std::string, std::string> baseline;
  AbstainRule abstain;
  std::vector<std::string> curve_subjects;
  std::size_t min_rows = 50;

  /// Exact bytes the config was parsed from; they are what gets hashed.
  std::string source;

  /// Throws Error(config_invalid) (or a more specific code) on bad input.
  /// Relative data paths resolve against base_dir.
  static RunConfig parse(const std::string& bytes, const std::string& base_dir = ".");
  static RunConfig load(const std::string& path);

  /// FNV-1a over the config bytes.
  std::uint64_t hash() const;
  /// The baseline as option indices of `universe`.
  std::vector<std::size_t> baseline_options() const;
};

/// Loads or synthesizes the dataset a config describes (injectors applied).
Dataset materialize_dataset(const RunConfig& config);

}  // namespace multiverse

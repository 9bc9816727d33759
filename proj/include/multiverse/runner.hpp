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

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "multiverse/config.hpp"
#include "multiverse/inconsistency.hpp"
#include "multiverse/metrics.hpp"
#include "multiverse/models.hpp"
#include "multiverse/pipeline.hpp"
#include "multiverse/universe.hpp"

namespace multiverse {

/// Concrete settings of every stage for one path. Stages absent from the
/// universe keep these defaults.
struct PathStages {
  OutcomeDefinition outcome;
  ImputationMethod imputation = ImputationMethod::mean_mode;
  double rare_threshold = 0.0;
  ResampleMethod resampling = ResampleMethod::none;
  double target_rate = 0.5;
  SubjectPredicate subpopulation;
  SelectionSpec selection;
  ModelSpec model;
  std::uint64_t model_seed = 0;
  double threshold = kDefaultThreshold;
};

/// Throws Error(invalid_spec) or Error(config_invalid) on bad parameters.
PathStages resolve_stages(const RunConfig& config, const PathConfig& path);

struct PathResult {
  PathConfig path;
  std::size_t order = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;
  Eigen::VectorXd scores;  // holdout, subject order of the split
  Eigen::VectorXd labels;  // holdout labels under this path's outcome
  PathMetrics metrics;
  std::size_t train_rows = 0;
  std::vector<std::string> model_columns;
  nlohmann::json model;
  std::vector<std::string> warnings;
};

/// Runs one path end to end. Pipeline errors become a failed result; they
/// never propagate.
PathResult run_path(const RunConfig& config, const HoldoutSplit& split, const PathConfig& path,
                    std::size_t order);

/// Calls task(i) for i in [0, n) on a fixed pool of `workers` threads.
/// Tasks must only write to their own slot of any shared output.
template <typename Task>
void parallel_for(std::size_t n, std::size_t workers, Task&& task) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct RunResult {
  RunConfig config;
  Dataset dataset;
  HoldoutSplit split;
  UniverseReport universe;
  std::vector<PathResult> results;  // canonical order
  /// Completed paths only; the admissible mask holds the Rashomon decision.
  ScoreMatrix matrix;
  std::vector<PathMetrics> metrics;  // aligned with matrix columns
  std::vector<InconsistencyProfile> profiles;
  std::uint64_t baseline_path = 0;
  std::optional<Multiplicity> multiplicity;
  std::string multiplicity_error;

  std::size_t ok_count() const;
  const PathResult* result_for(std::uint64_t path_id) const;
};

/// Full multiverse run. Throws Error(all_paths_failed) or
/// Error(empty_rashomon_set); single-path failures are recorded.
RunResult execute(const RunConfig& config, std::size_t workers);

}  // namespace multiverse

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

// Slow, obviously-correct reference implementations used to check the
// library. None of them share code with src/.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "multiverse/random.hpp"
#include "multiverse/universe.hpp"

namespace oracle {

/// Pairwise AUC: concordant pairs + half the ties, over all pos x neg pairs.
inline double auc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) num += 1.0;
      else if (s[i] == s[j]) num += 0.5;
    }
  }
  return num / pairs;
}

/// Lift by selecting the top n one at a time: highest score first, lowest
/// id among equal scores.
inline double lift(const std::vector<double>& s, const std::vector<int>& y,
                   const std::vector<std::string>& ids, double k) {
  const std::size_t n_total = s.size();
  const auto top = static_cast<std::size_t>(std::ceil(k * static_cast<double>(n_total) - 1e-12));
  std::vector<bool> taken(n_total, false);
  int hits = 0;
  for (std::size_t t = 0; t < std::max<std::size_t>(top, 1); ++t) {
    std::size_t best = n_total;
    for (std::size_t i = 0; i < n_total; ++i) {
      if (taken[i]) continue;
      if (best == n_total || s[i] > s[best] || (s[i] == s[best] && ids[i] < ids[best])) best = i;
    }
    taken[best] = true;
    hits += y[best];
  }
  const double positives = std::accumulate(y.begin(), y.end(), 0.0);
  return (hits / static_cast<double>(std::max<std::size_t>(top, 1))) /
         (positives / static_cast<double>(n_total));
}

struct Multiplicity {
  double ambiguity = 0.0;
  double discrepancy = 0.0;
};

/// Enumerates every (subject, path) decision against the baseline column.
inline Multiplicity multiplicity(const std::vector<std::vector<double>>& rows, std::size_t baseline,
                                 double threshold) {
  Multiplicity m;
  if (rows.empty()) return m;
  const std::size_t paths = rows[0].size();
  std::vector<int> flips_per_path(paths, 0);
  int ambiguous = 0;
  for (const auto& row : rows) {
    const bool base = row[baseline] >= threshold;
    bool any = false;
    for (std::size_t j = 0; j < paths; ++j) {
      if ((row[j] >= threshold) != base) {
        ++flips_per_path[j];
        any = true;
      }
    }
    ambiguous += any;
  }
  m.ambiguity = ambiguous / static_cast<double>(rows.size());
  for (int f : flips_per_path) {
    m.discrepancy = std::max(m.discrepancy, f / static_cast<double>(rows.size()));
  }
  return m;
}

/// A random universe over a random subset of stages.
inline multiverse::UniverseSpec random_universe(multiverse::Rng& rng, std::uint64_t max_raw) {
  using namespace multiverse;
  UniverseSpec u;
  std::vector<Stage> stages = {Stage::outcome_definition, Stage::imputation, Stage::rare_grouping,
                               Stage::resampling,         Stage::subpopulation,
                               Stage::variable_selection, Stage::model_family,
                               Stage::model_seed,         Stage::binning};
  rng.shuffle(stages);
  const std::size_t dims = 1 + rng.below(6);
  std::uint64_t raw = 1;
  for (std::size_t k = 0; k < dims; ++k) {
    const std::uint64_t room = max_raw / raw;
    if (room < 1) break;
    const std::uint64_t n_opts = 1 + rng.below(std::min<std::uint64_t>(6, room));
    raw *= n_opts;
    Dimension d{stages[k], {}};
    for (std::uint64_t o = 0; o < n_opts; ++o) {
      d.options.push_back({"o" + std::to_string(o), nlohmann::json::object(), {}});
    }
    u.dimensions.push_back(std::move(d));
  }
  const std::size_t n_rules = rng.below(4);
  for (std::size_t r = 0; r < n_rules; ++r) {
    Exclusion e;
    std::vector<std::size_t> pick(u.dimensions.size());
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    rng.shuffle(pick);
    const std::size_t terms = 1 + rng.below(std::min<std::size_t>(2, pick.size()));
    for (std::size_t t = 0; t < terms; ++t) {
      const auto& d = u.dimensions[pick[t]];
      e.terms.emplace_back(std::string(d.name()), d.options[rng.below(d.options.size())].name);
    }
    u.constraints.push_back(std::move(e));
  }
  return u;
}

/// Every option tuple by nested recursion, minus tuples matching any rule.
inline std::vector<std::vector<std::string>> admissible_tuples(const multiverse::UniverseSpec& u) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> current;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == u.dimensions.size()) {
      for (const auto& rule : u.constraints) {
        bool all = true;
        for (const auto& [dim, opt] : rule.terms) {
          std::size_t idx = 0;
          while (u.dimensions[idx].name() != dim) ++idx;
          all = all && current[idx] == opt;
        }
        if (all) return;
      }
      out.push_back(current);
      return;
    }
    for (const auto& o : u.dimensions[k].options) {
      current.push_back(o.name);
      rec(k + 1);
      current.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace oracle

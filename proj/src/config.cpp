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

#include "multiverse/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "multiverse/error.hpp"
#include "multiverse/hash.hpp"
#include "multiverse/random.hpp"

namespace multiverse {

namespace {

FeatureSchema schema_from_json(const nlohmann::json& j) {
  std::vector<FeatureSpec> features;
  for (const auto& f : j) {
    FeatureSpec spec;
    spec.name = f.at("name").get<std::string>();
    const auto kind = f.value("kind", std::string("numeric"));
    if (kind == "numeric") spec.kind = FeatureKind::numeric;
    else if (kind == "categorical") spec.kind = FeatureKind::categorical;
    else throw Error(Errc::config_invalid, "unknown feature kind " + kind);
    if (f.contains("levels")) spec.levels = f["levels"].get<std::vector<std::string>>();
    spec.missing_allowed = f.value("missing_allowed", true);
    features.push_back(std::move(spec));
  }
  return FeatureSchema(std::move(features));
}

std::string resolve(const std::string& base, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base) / p).string();
}

}  // namespace

RunConfig RunConfig::parse(const std::string& bytes, const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_invalid, std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::config_invalid, "config must be a JSON object");

  RunConfig c;
  c.source = bytes;
  try {
    if (!j.contains("master_seed")) throw Error(Errc::config_invalid, "master_seed is required");
    c.master_seed = j["master_seed"].get<std::uint64_t>();
    c.workers = j.value("workers", std::size_t{1});
    if (c.workers == 0) throw Error(Errc::config_invalid, "workers must be >= 1");

    if (j.contains("synth") == j.contains("data")) {
      throw Error(Errc::config_invalid, "exactly one of data / synth must be present");
    }
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      SynthSection synth;
      synth.population = PopulationSpec::from_json(s.at("population"));
      synth.seed = s.value("seed", c.master_seed);
      if (s.contains("injectors")) {
        for (const auto& inj : s["injectors"]) synth.injectors.push_back(bias_injector_from_json(inj));
      }
      c.synth = std::move(synth);
    } else {
      const auto& d = j["data"];
      const auto& p = d.value("provenance", nlohmann::json::object());
      c.data = DataSection{resolve(base_dir, d.at("subjects").get<std::string>()),
                           resolve(base_dir, d.at("events").get<std::string>()),
                           schema_from_json(d.at("schema")),
                           {p.value("source", std::string()),
                            p.value("collection_period", std::string()),
                            p.value("known_biases", std::string())}};
    }

    if (j.contains("holdout")) {
      const auto& h = j["holdout"];
      c.holdout_fraction = h.value("fraction", c.holdout_fraction);
      if (h.contains("stratify_by")) c.stratify_by = h["stratify_by"].get<std::string>();
    }
    if (!(c.holdout_fraction > 0.0 && c.holdout_fraction < 1.0)) {
      throw Error(Errc::config_invalid, "holdout fraction must lie in (0,1)");
    }

    c.universe = UniverseSpec::from_json(j.at("universe"));
    if (j.contains("rashomon")) c.rashomon = RashomonRule::from_json(j["rashomon"]);

    if (j.contains("binning")) {
      for (const auto& b : j["binning"]) c.binning.push_back(BinningScheme::from_json(b));
    } else {
      c.binning.push_back(BinningScheme::equal_width("three_level", {"low", "medium", "high"}));
      c.binning.push_back(BinningScheme::equal_width(
          "five_level", {"very_low", "low", "average", "above_average", "high"}));
    }
    if (j.contains("lift_budgets")) {
      c.metrics.lift_budgets = j["lift_budgets"].get<std::vector<double>>();
    }
    if (j.contains("fairness")) {
      const auto& f = j["fairness"];
      c.metrics.threshold = f.value("threshold", c.metrics.threshold);
      c.metrics.min_group_size = f.value("min_group_size", c.metrics.min_group_size);
      c.fairness_tolerance = f.value("tolerance", c.fairness_tolerance);
    }
    if (j.contains("baseline_path")) {
      c.baseline = j["baseline_path"].get<std::map<std::string, std::string>>();
    }
    if (j.contains("abstain")) {
      c.abstain.range = j["abstain"].value("range", c.abstain.range);
      c.abstain.flip = j["abstain"].value("flip", c.abstain.flip);
    }
    if (j.contains("curves")) {
      c.curve_subjects = j["curves"].value("subjects", std::vector<std::string>{});
    }
    c.min_rows = j.value("min_rows", c.min_rows);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_invalid, e.what());
  }

  // Resolve every reference now so failures surface before any work.
  validate_universe(c.universe);
  for (const auto& [dim, opt] : c.baseline) {
    const auto d = c.universe.dimension_index(dim);
    if (!d) throw Error(Errc::unknown_reference, "baseline names unknown dimension " + dim);
    if (!c.universe.dimensions[*d].option_index(opt)) {
      throw Error(Errc::unknown_reference, "baseline names unknown option " + dim + "/" + opt);
    }
  }
  const auto& metric = c.rashomon.metric;
  if (metric != "auc" && metric != "brier" && metric != "ece") {
    bool found = false;
    if (metric.rfind("lift@", 0) == 0) {
      double k = -1.0;
      try {
        k = std::stod(metric.substr(5));
      } catch (const std::exception&) {
      }
      for (double b : c.metrics.lift_budgets) found = found || std::abs(b - k) < 1e-12;
    }
    if (!found) throw Error(Errc::unknown_reference, "rashomon metric " + metric);
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse(ss.str(), dir.empty() ? "." : dir);
}

std::uint64_t RunConfig::hash() const { return fnv1a64(source); }

std::vector<std::size_t> RunConfig::baseline_options() const {
  std::vector<std::size_t> opts(universe.dimensions.size(), 0);
  for (const auto& [dim, opt] : baseline) {
    const auto d = *universe.dimension_index(dim);
    opts[d] = *universe.dimensions[d].option_index(opt);
  }
  return opts;
}

Dataset materialize_dataset(const RunConfig& config) {
  if (config.data) {
    Dataset d = load_dataset(config.data->subjects_path, config.data->events_path,
                             config.data->schema);
    d.provenance = config.data->provenance;
    return d;
  }
  const auto& s = *config.synth;
  Dataset d = generate_population(s.population, s.seed).data;
  std::vector<std::string> applied;
  for (std::size_t k = 0; k < s.injectors.size(); ++k) {
    d = inject_bias(d, s.injectors[k], derive_seed(s.seed, 1000 + k));
    applied.push_back(describe(s.injectors[k]));
  }
  if (!applied.empty()) {
    std::string biases;
    for (const auto& a : applied) biases += (biases.empty() ? "" : "; ") + a;
    d.provenance.known_biases = biases;
  }
  return d;
}

}  // namespace multiverse

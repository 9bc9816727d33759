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

#include "multiverse/universe.hpp"

#include <set>

#include "multiverse/error.hpp"
#include "multiverse/hash.hpp"

namespace multiverse {

namespace {

constexpr Stage kStages[] = {
    Stage::outcome_definition, Stage::imputation,         Stage::rare_grouping,
    Stage::resampling,         Stage::subpopulation,      Stage::variable_selection,
    Stage::model_family,       Stage::model_seed,         Stage::binning,
};

struct ResolvedExclusion {
  std::vector<std::pair<std::size_t, std::size_t>> terms;  // (dimension, option)
};

std::vector<ResolvedExclusion> resolve(const UniverseSpec& u) {
  std::vector<ResolvedExclusion> out;
  for (const auto& c : u.constraints) {
    if (c.terms.empty()) throw Error(Errc::invalid_spec, "empty exclusion rule");
    ResolvedExclusion r;
    for (const auto& [dim, opt] : c.terms) {
      const auto d = u.dimension_index(dim);
      if (!d) throw Error(Errc::unknown_reference, "constraint names dimension " + dim);
      const auto o = u.dimensions[*d].option_index(opt);
      if (!o) {
        throw Error(Errc::unknown_reference, "constraint names option " + dim + "/" + opt);
      }
      r.terms.emplace_back(*d, *o);
    }
    out.push_back(std::move(r));
  }
  return out;
}

bool excluded(const std::vector<ResolvedExclusion>& rules,
              const std::vector<std::size_t>& options) {
  for (const auto& r : rules) {
    bool all = true;
    for (const auto& [d, o] : r.terms) {
      if (options[d] != o) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

// Odometer over the Cartesian product, last dimension fastest.
template <typename Visit>
void for_each_combination(const UniverseSpec& u, Visit visit) {
  std::vector<std::size_t> options(u.dimensions.size(), 0);
  if (u.dimensions.empty()) return;
  for (;;) {
    visit(options);
    std::size_t k = u.dimensions.size();
    while (k > 0) {
      --k;
      if (++options[k] < u.dimensions[k].options.size()) break;
      options[k] = 0;
      if (k == 0) return;
    }
  }
}

void check_structure(const UniverseSpec& u) {
  if (u.dimensions.empty()) throw Error(Errc::invalid_spec, "universe declares no dimensions");
  std::set<Stage> seen;
  for (const auto& d : u.dimensions) {
    if (!seen.insert(d.stage).second) {
      throw Error(Errc::invalid_spec, "duplicate dimension " + std::string(d.name()));
    }
    if (d.options.empty()) {
      throw Error(Errc::invalid_spec, "dimension " + std::string(d.name()) + " has no options");
    }
    std::set<std::string> names;
    for (const auto& o : d.options) {
      if (o.name.empty() || !names.insert(o.name).second) {
        throw Error(Errc::invalid_spec,
                    "option names must be unique and non-empty in " + std::string(d.name()));
      }
    }
  }
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::outcome_definition: return "outcome_definition";
    case Stage::imputation: return "imputation";
    case Stage::rare_grouping: return "rare_grouping";
    case Stage::resampling: return "resampling";
    case Stage::subpopulation: return "subpopulation";
    case Stage::variable_selection: return "variable_selection";
    case Stage::model_family: return "model_family";
    case Stage::model_seed: return "model_seed";
    case Stage::binning: return "binning";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(ReasonProvenance p) {
  switch (p) {
    case ReasonProvenance::local_law: return "local_law";
    case ReasonProvenance::domain_knowledge: return "domain_knowledge";
    case ReasonProvenance::data_driven: return "data_driven";
  }
  return "?";
}

std::optional<std::size_t> Dimension::option_index(std::string_view option) const {
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (options[i].name == option) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> UniverseSpec::dimension_index(std::string_view name) const {
  for (std::size_t i = 0; i < dimensions.size(); ++i) {
    if (dimensions[i].name() == name) return i;
  }
  return std::nullopt;
}

UniverseSpec UniverseSpec::from_json(const nlohmann::json& j) {
  UniverseSpec u;
  for (const auto& dj : j.at("dimensions")) {
    const auto name = dj.at("name").get<std::string>();
    const auto stage = parse_stage(name);
    if (!stage) throw Error(Errc::config_invalid, "unknown dimension " + name);
    Dimension d{*stage, {}};
    for (const auto& oj : dj.at("options")) {
      Option o;
      o.name = oj.at("name").get<std::string>();
      if (oj.contains("parameters")) o.parameters = oj["parameters"];
      if (oj.contains("reasonableness")) {
        const auto& r = oj["reasonableness"];
        o.reasonableness.rationale = r.value("rationale", std::string());
        const auto prov = r.value("provenance", std::string("domain_knowledge"));
        if (prov == "local_law") o.reasonableness.provenance = ReasonProvenance::local_law;
        else if (prov == "domain_knowledge")
          o.reasonableness.provenance = ReasonProvenance::domain_knowledge;
        else if (prov == "data_driven")
          o.reasonableness.provenance = ReasonProvenance::data_driven;
        else throw Error(Errc::config_invalid, "unknown provenance " + prov);
      }
      d.options.push_back(std::move(o));
    }
    u.dimensions.push_back(std::move(d));
  }
  if (j.contains("constraints")) {
    for (const auto& cj : j["constraints"]) {
      Exclusion e;
      for (const auto& [dim, opt] : cj.items()) {
        e.terms.emplace_back(dim, opt.get<std::string>());
      }
      u.constraints.push_back(std::move(e));
    }
  }
  return u;
}

nlohmann::json UniverseSpec::to_json() const {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : dimensions) {
    nlohmann::json options = nlohmann::json::array();
    for (const auto& o : d.options) {
      options.push_back({{"name", o.name},
                         {"parameters", o.parameters},
                         {"reasonableness",
                          {{"rationale", o.reasonableness.rationale},
                           {"provenance", std::string(to_string(o.reasonableness.provenance))}}}});
    }
    dims.push_back({{"name", std::string(d.name())}, {"options", options}});
  }
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : constraints) {
    nlohmann::json rule = nlohmann::json::object();
    for (const auto& [dim, opt] : c.terms) rule[dim] = opt;
    cons.push_back(rule);
  }
  return {{"dimensions", dims}, {"constraints", cons}};
}

std::string PathConfig::canonical_choices(const UniverseSpec& u,
                                          const std::vector<std::size_t>& options) {
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t k = 0; k < u.dimensions.size(); ++k) {
    pairs.push_back({std::string(u.dimensions[k].name()),
                     u.dimensions[k].options[options[k]].name});
  }
  return canonical_json(pairs);
}

const Option& PathConfig::option(const UniverseSpec& u, Stage stage) const {
  for (std::size_t k = 0; k < u.dimensions.size(); ++k) {
    if (u.dimensions[k].stage == stage) return u.dimensions[k].options[options[k]];
  }
  throw Error(Errc::unknown_reference, "path has no " + std::string(to_string(stage)));
}

nlohmann::json PathConfig::choices_json(const UniverseSpec& u) const {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t k = 0; k < u.dimensions.size(); ++k) {
    out[std::string(u.dimensions[k].name())] = std::string(choice(u, k));
  }
  return out;
}

UniverseReport validate_universe(const UniverseSpec& u) {
  check_structure(u);
  const auto rules = resolve(u);
  UniverseReport report;
  report.raw_paths = 1;
  for (const auto& d : u.dimensions) {
    report.raw_paths *= d.options.size();
    for (const auto& o : d.options) {
      if (o.reasonableness.rationale.empty()) {
        report.empty_rationales.push_back(std::string(d.name()) + "/" + o.name);
      }
    }
  }
  for_each_combination(u, [&](const std::vector<std::size_t>& options) {
    if (!excluded(rules, options)) ++report.admissible_paths;
  });
  if (report.admissible_paths == 0) {
    throw Error(Errc::no_admissible_path, "every combination is excluded");
  }
  if (report.admissible_paths > kLargeUniverseWarning) {
    report.warnings.push_back("more than " + std::to_string(kLargeUniverseWarning) +
                              " admissible paths");
  }
  return report;
}

std::vector<PathConfig> enumerate_paths(const UniverseSpec& u) {
  validate_universe(u);
  const auto rules = resolve(u);
  std::vector<PathConfig> paths;
  for_each_combination(u, [&](const std::vector<std::size_t>& options) {
    if (excluded(rules, options)) return;
    PathConfig p{options, fnv1a64(PathConfig::canonical_choices(u, options))};
    paths.push_back(std::move(p));
  });
  return paths;
}

std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t path_id) {
  return stable_hash_pair(master_seed, path_id);
}

}  // namespace multiverse

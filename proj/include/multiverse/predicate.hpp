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

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "multiverse/data.hpp"

namespace multiverse {

/// Boolean condition over a subject's features, group, and event history.
///
/// JSON forms:
///   {"all": true}
///   {"events": {"kinds": [...], "degrees": [...], "jurisdictions": [...],
///               "when": "prior"|"post"|"any", "min_count": 1}}
///   {"feature_equals": {"feature": "x", "level": "a"}}
///   {"feature_between": {"feature": "x", "min": 0, "max": 1}}
///   {"group_in": ["A", "B"]}
///   {"all_of": [...]}, {"any_of": [...]}, {"not": {...}}
class SubjectPredicate {
 public:
  enum class When { prior, post, any };

  struct Always {};
  struct EventCount {
    EventKindSet kinds = EventKindSet::all(4);
    DegreeSet degrees = DegreeSet::all(3);
    JurisdictionSet jurisdictions = JurisdictionSet::all(2);
    When when = When::any;
    std::size_t min_count = 1;
  };
  struct FeatureEquals {
    std::string feature;
    std::string level;
  };
  struct FeatureBetween {
    std::string feature;
    double min = -1e308;
    double max = 1e308;
  };
  struct GroupIn {
    std::vector<std::string> groups;
  };
  struct AllOf {
    std::vector<SubjectPredicate> terms;
  };
  struct AnyOf {
    std::vector<SubjectPredicate> terms;
  };
  struct Not {
    std::shared_ptr<const SubjectPredicate> term;
  };

  using Node = std::variant<Always, EventCount, FeatureEquals, FeatureBetween,
                            GroupIn, AllOf, AnyOf, Not>;

  SubjectPredicate() : node_(Always{}) {}
  SubjectPredicate(Node node) : node_(std::move(node)) {}

  static SubjectPredicate from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Throws Error(unknown_feature) when a referenced feature is not in the
  /// schema, Error(invalid_spec) on a kind mismatch.
  void check(const FeatureSchema& schema) const;

  bool operator()(const FeatureSchema& schema, const SubjectRecord& s) const;

  bool is_trivial() const { return std::holds_alternative<Always>(node_); }
  const Node& node() const { return node_; }

 private:
  Node node_;
};

}  // namespace multiverse

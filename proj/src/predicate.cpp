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

#include "multiverse/predicate.hpp"

#include <algorithm>

#include "multiverse/error.hpp"

namespace multiverse {

namespace {

template <typename Enum, typename Parse>
EnumSet<Enum> parse_set(const nlohmann::json& j, Parse parse, std::size_t count) {
  if (j.is_null()) return EnumSet<Enum>::all(count);
  EnumSet<Enum> out;
  for (const auto& item : j) {
    const auto v = parse(item.get<std::string>());
    if (!v) {
      throw Error(Errc::config_invalid, "unknown value " + item.dump());
    }
    out.insert(*v);
  }
  return out;
}

template <typename Enum>
nlohmann::json set_to_json(EnumSet<Enum> set, std::size_t count) {
  auto out = nlohmann::json::array();
  for (std::size_t i = 0; i < count; ++i) {
    const auto e = static_cast<Enum>(i);
    if (set.contains(e)) out.push_back(std::string(to_string(e)));
  }
  return out;
}

std::string_view when_name(SubjectPredicate::When w) {
  switch (w) {
    case SubjectPredicate::When::prior: return "prior";
    case SubjectPredicate::When::post: return "post";
    case SubjectPredicate::When::any: return "any";
  }
  return "any";
}

}  // namespace

SubjectPredicate SubjectPredicate::from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.size() != 1) {
    throw Error(Errc::config_invalid, "predicate must be a single-key object: " + j.dump());
  }
  const auto& [key, body] = *j.items().begin();
  if (key == "all") return SubjectPredicate(Always{});
  if (key == "events") {
    EventCount ec;
    ec.kinds = parse_set<EventKind>(body.value("kinds", nlohmann::json()),
                                    parse_event_kind, 4);
    ec.degrees = parse_set<Degree>(body.value("degrees", nlohmann::json()),
                                   parse_degree, 3);
    ec.jurisdictions = parse_set<Jurisdiction>(
        body.value("jurisdictions", nlohmann::json()), parse_jurisdiction, 2);
    const auto when = body.value("when", std::string("any"));
    if (when == "prior") ec.when = When::prior;
    else if (when == "post") ec.when = When::post;
    else if (when == "any") ec.when = When::any;
    else throw Error(Errc::config_invalid, "unknown 'when' " + when);
    ec.min_count = body.value("min_count", std::size_t{1});
    return SubjectPredicate(ec);
  }
  if (key == "feature_equals") {
    return SubjectPredicate(FeatureEquals{body.at("feature").get<std::string>(),
                                          body.at("level").get<std::string>()});
  }
  if (key == "feature_between") {
    FeatureBetween fb{body.at("feature").get<std::string>()};
    fb.min = body.value("min", fb.min);
    fb.max = body.value("max", fb.max);
    return SubjectPredicate(fb);
  }
  if (key == "group_in") {
    return SubjectPredicate(GroupIn{body.get<std::vector<std::string>>()});
  }
  if (key == "all_of" || key == "any_of") {
    std::vector<SubjectPredicate> terms;
    for (const auto& t : body) terms.push_back(from_json(t));
    if (key == "all_of") return SubjectPredicate(AllOf{std::move(terms)});
    return SubjectPredicate(AnyOf{std::move(terms)});
  }
  if (key == "not") {
    return SubjectPredicate(Not{std::make_shared<const SubjectPredicate>(from_json(body))});
  }
  throw Error(Errc::config_invalid, "unknown predicate '" + key + "'");
}

nlohmann::json SubjectPredicate::to_json() const {
  return std::visit(
      [](const auto& n) -> nlohmann::json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Always>) {
          return {{"all", true}};
        } else if constexpr (std::is_same_v<T, EventCount>) {
          return {{"events",
                   {{"kinds", set_to_json(n.kinds, 4)},
                    {"degrees", set_to_json(n.degrees, 3)},
                    {"jurisdictions", set_to_json(n.jurisdictions, 2)},
                    {"when", std::string(when_name(n.when))},
                    {"min_count", n.min_count}}}};
        } else if constexpr (std::is_same_v<T, FeatureEquals>) {
          return {{"feature_equals", {{"feature", n.feature}, {"level", n.level}}}};
        } else if constexpr (std::is_same_v<T, FeatureBetween>) {
          return {{"feature_between",
                   {{"feature", n.feature}, {"min", n.min}, {"max", n.max}}}};
        } else if constexpr (std::is_same_v<T, GroupIn>) {
          return {{"group_in", n.groups}};
        } else if constexpr (std::is_same_v<T, AllOf> || std::is_same_v<T, AnyOf>) {
          auto terms = nlohmann::json::array();
          for (const auto& t : n.terms) terms.push_back(t.to_json());
          return {{std::is_same_v<T, AllOf> ? "all_of" : "any_of", terms}};
        } else {
          return {{"not", n.term->to_json()}};
        }
      },
      node_);
}

void SubjectPredicate::check(const FeatureSchema& schema) const {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, FeatureEquals>) {
          const auto& spec = schema[schema.require(n.feature)];
          if (spec.kind != FeatureKind::categorical) {
            throw Error(Errc::invalid_spec, "feature_equals on numeric " + n.feature);
          }
        } else if constexpr (std::is_same_v<T, FeatureBetween>) {
          const auto& spec = schema[schema.require(n.feature)];
          if (spec.kind != FeatureKind::numeric) {
            throw Error(Errc::invalid_spec, "feature_between on categorical " + n.feature);
          }
        } else if constexpr (std::is_same_v<T, AllOf> || std::is_same_v<T, AnyOf>) {
          for (const auto& t : n.terms) t.check(schema);
        } else if constexpr (std::is_same_v<T, Not>) {
          n.term->check(schema);
        } else if constexpr (std::is_same_v<T, EventCount>) {
          if (n.kinds.empty()) throw Error(Errc::invalid_spec, "empty event kind set");
        }
      },
      node_);
}

bool SubjectPredicate::operator()(const FeatureSchema& schema,
                                  const SubjectRecord& s) const {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Always>) {
          return true;
        } else if constexpr (std::is_same_v<T, EventCount>) {
          std::size_t count = 0;
          for (const auto& e : s.events) {
            if (!n.kinds.contains(e.kind) || !n.degrees.contains(e.degree) ||
                !n.jurisdictions.contains(e.jurisdiction)) {
              continue;
            }
            if (n.when == When::prior && e.day > s.anchor_day) continue;
            if (n.when == When::post && e.day <= s.anchor_day) continue;
            ++count;
          }
          return count >= n.min_count;
        } else if constexpr (std::is_same_v<T, FeatureEquals>) {
          const auto* level = std::get_if<std::string>(&s.features[schema.require(n.feature)]);
          return level && *level == n.level;
        } else if constexpr (std::is_same_v<T, FeatureBetween>) {
          const auto* x = std::get_if<double>(&s.features[schema.require(n.feature)]);
          return x && *x >= n.min && *x <= n.max;
        } else if constexpr (std::is_same_v<T, GroupIn>) {
          return std::find(n.groups.begin(), n.groups.end(), s.group) != n.groups.end();
        } else if constexpr (std::is_same_v<T, AllOf>) {
          return std::all_of(n.terms.begin(), n.terms.end(),
                             [&](const auto& t) { return t(schema, s); });
        } else if constexpr (std::is_same_v<T, AnyOf>) {
          return std::any_of(n.terms.begin(), n.terms.end(),
                             [&](const auto& t) { return t(schema, s); });
        } else {
          return !(*n.term)(schema, s);
        }
      },
      node_);
}

}  // namespace multiverse

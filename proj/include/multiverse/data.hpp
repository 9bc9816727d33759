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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace multiverse {

enum class EventKind : std::uint8_t {
  arrest,
  conviction,
  incarceration_release,
  failure_to_appear,
};
enum class Degree : std::uint8_t { felony, misdemeanor, ordinance };
enum class Jurisdiction : std::uint8_t { in_state, out_of_state };

std::string_view to_string(EventKind kind);
std::string_view to_string(Degree degree);
std::string_view to_string(Jurisdiction jurisdiction);
std::optional<EventKind> parse_event_kind(std::string_view text);
std::optional<Degree> parse_degree(std::string_view text);
std::optional<Jurisdiction> parse_jurisdiction(std::string_view text);

/// Small bit set over one of the event enums.
template <typename Enum>
class EnumSet {
 public:
  constexpr EnumSet() = default;
  constexpr EnumSet(std::initializer_list<Enum> values) {
    for (Enum v : values) insert(v);
  }
  static constexpr EnumSet all(std::size_t count) {
    EnumSet s;
    s.bits_ = static_cast<std::uint32_t>((1U << count) - 1U);
    return s;
  }

  constexpr void insert(Enum v) { bits_ |= bit(v); }
  constexpr bool contains(Enum v) const { return (bits_ & bit(v)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool subset_of(EnumSet other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  constexpr std::uint32_t bits() const { return bits_; }
  friend constexpr bool operator==(EnumSet, EnumSet) = default;

 private:
  static constexpr std::uint32_t bit(Enum v) {
    return 1U << static_cast<unsigned>(v);
  }
  std::uint32_t bits_ = 0;
};

using EventKindSet = EnumSet<EventKind>;
using DegreeSet = EnumSet<Degree>;
using JurisdictionSet = EnumSet<Jurisdiction>;

struct EventRecord {
  EventKind kind = EventKind::arrest;
  Degree degree = Degree::felony;
  std::int64_t day = 0;
  Jurisdiction jurisdiction = Jurisdiction::in_state;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

enum class FeatureKind : std::uint8_t { numeric, categorical };

/// A cell: missing, numeric, or a categorical level.
using FeatureValue = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const FeatureValue& v) {
  return std::holds_alternative<std::monostate>(v);
}

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  std::vector<std::string> levels;  // categorical only
  bool missing_allowed = true;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  /// Throws Error(schema_violation) on duplicate names or empty level sets.
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  const std::vector<FeatureSpec>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Throws Error(unknown_feature).
  std::size_t require(std::string_view name) const;

  friend bool operator==(const FeatureSchema& a, const FeatureSchema& b) {
    return a.features_ == b.features_;
  }

 private:
  std::vector<FeatureSpec> features_;
};

struct SubjectRecord {
  std::string subject_id;
  std::string group;
  std::int64_t anchor_day = 0;
  std::vector<FeatureValue> features;  // schema order
  std::vector<EventRecord> events;

  friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

struct Provenance {
  std::string source;
  std::string collection_period;
  std::string known_biases;

  bool complete() const {
    return !source.empty() && !collection_period.empty() &&
           !known_biases.empty();
  }
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Dataset {
  FeatureSchema schema;
  std::vector<SubjectRecord> subjects;
  Provenance provenance;

  std::size_t size() const { return subjects.size(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Checks one subject against the schema and event invariants; throws
/// Error(schema_violation) naming the subject and column.
void validate_subject(const FeatureSchema& schema, const SubjectRecord& s);

// ---------------------------------------------------------------------------
// Ingestion. Subjects table: subject_id, group, anchor_day, <features...>.
// Events table: subject_id, event_kind, degree, day, jurisdiction.
// Empty cell = missing.

Dataset read_dataset(std::istream& subjects, std::istream& events,
                     const FeatureSchema& schema);
Dataset load_dataset(const std::string& subjects_path,
                     const std::string& events_path,
                     const FeatureSchema& schema);

void write_subjects(std::ostream& out, const Dataset& d);
void write_events(std::ostream& out, const Dataset& d);
void write_dataset(const Dataset& d, const std::string& subjects_path,
                   const std::string& events_path);

/// FNV-1a over the canonical CSV bytes of both tables.
std::uint64_t dataset_hash(const Dataset& d);

// ---------------------------------------------------------------------------

struct ValidationReport {
  std::size_t subjects = 0;
  std::vector<std::pair<std::string, double>> missingness;  // schema order
  std::map<std::string, std::size_t> group_counts;
  std::map<std::string, std::size_t> event_kind_counts;
  std::vector<std::string> warnings;

  bool has_warnings() const { return !warnings.empty(); }
  double missingness_of(std::string_view feature) const;
};

inline constexpr std::size_t kDefaultMinGroupSize = 30;

ValidationReport validate_dataset(const Dataset& d,
                                  std::size_t min_group_size = kDefaultMinGroupSize);

struct HoldoutSplit {
  Dataset train;
  Dataset holdout;
};

/// Random (or stratified) holdout. Subjects are ordered by id before
/// shuffling so the result does not depend on insertion order; each
/// stratum is shuffled under a seed derived from (master_seed, label).
HoldoutSplit split_inconsistency_holdout(
    const Dataset& d, double fraction, std::uint64_t master_seed,
    const std::optional<std::string>& stratify_by = std::nullopt);

std::string render_datasheet(const Dataset& d);
/// Throws Error(missing_provenance) when any provenance field is empty.
void emit_datasheet(const Dataset& d, const std::string& path);

/// Subset of d keeping subjects for which keep(i) is true, preserving order.
template <typename Pred>
Dataset filter_subjects(const Dataset& d, Pred keep) {
  Dataset out{d.schema, {}, d.provenance};
  for (std::size_t i = 0; i < d.subjects.size(); ++i) {
    if (keep(d.subjects[i])) out.subjects.push_back(d.subjects[i]);
  }
  return out;
}

}  // namespace multiverse

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

#include "multiverse/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "multiverse/csv.hpp"
#include "multiverse/error.hpp"
#include "multiverse/hash.hpp"
#include "multiverse/random.hpp"

namespace multiverse {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::arrest: return "arrest";
    case EventKind::conviction: return "conviction";
    case EventKind::incarceration_release: return "incarceration_release";
    case EventKind::failure_to_appear: return "failure_to_appear";
  }
  return "?";
}

std::string_view to_string(Degree degree) {
  switch (degree) {
    case Degree::felony: return "felony";
    case Degree::misdemeanor: return "misdemeanor";
    case Degree::ordinance: return "ordinance";
  }
  return "?";
}

std::string_view to_string(Jurisdiction jurisdiction) {
  switch (jurisdiction) {
    case Jurisdiction::in_state: return "in_state";
    case Jurisdiction::out_of_state: return "out_of_state";
  }
  return "?";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (auto k : {EventKind::arrest, EventKind::conviction,
                 EventKind::incarceration_release,
                 EventKind::failure_to_appear}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<Degree> parse_degree(std::string_view text) {
  for (auto d : {Degree::felony, Degree::misdemeanor, Degree::ordinance}) {
    if (to_string(d) == text) return d;
  }
  return std::nullopt;
}

std::optional<Jurisdiction> parse_jurisdiction(std::string_view text) {
  for (auto j : {Jurisdiction::in_state, Jurisdiction::out_of_state}) {
    if (to_string(j) == text) return j;
  }
  return std::nullopt;
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features)
    : features_(std::move(features)) {
  std::set<std::string, std::less<>> seen;
  for (const auto& f : features_) {
    if (f.name.empty()) {
      throw Error(Errc::schema_violation, "feature with empty name");
    }
    if (!seen.insert(f.name).second) {
      throw Error(Errc::schema_violation, "duplicate feature name " + f.name);
    }
    if (f.kind == FeatureKind::categorical) {
      if (f.levels.empty()) {
        throw Error(Errc::schema_violation,
                    "categorical feature " + f.name + " declares no levels");
      }
      std::set<std::string, std::less<>> lv(f.levels.begin(), f.levels.end());
      if (lv.size() != f.levels.size()) {
        throw Error(Errc::schema_violation,
                    "duplicate level in feature " + f.name);
      }
    }
  }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t FeatureSchema::require(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  throw Error(Errc::unknown_feature, "unknown feature " + std::string(name));
}

void validate_subject(const FeatureSchema& schema, const SubjectRecord& s) {
  const auto where = "subject " + s.subject_id;
  if (s.subject_id.empty()) {
    throw Error(Errc::schema_violation, "empty subject_id");
  }
  if (s.features.size() != schema.size()) {
    throw Error(Errc::schema_violation, where + ": feature count mismatch");
  }
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& spec = schema[j];
    const auto& v = s.features[j];
    if (is_missing(v)) {
      if (!spec.missing_allowed) {
        throw Error(Errc::schema_violation,
                    where + ", column " + spec.name + ": missing value not allowed");
      }
      continue;
    }
    if (spec.kind == FeatureKind::numeric) {
      if (!std::holds_alternative<double>(v) ||
          !std::isfinite(std::get<double>(v))) {
        throw Error(Errc::schema_violation,
                    where + ", column " + spec.name + ": expected finite number");
      }
    } else {
      const auto* level = std::get_if<std::string>(&v);
      if (!level || std::find(spec.levels.begin(), spec.levels.end(), *level) ==
                        spec.levels.end()) {
        throw Error(Errc::schema_violation,
                    where + ", column " + spec.name + ": undeclared level");
      }
    }
  }
  for (const auto& e : s.events) {
    if (e.day < 0) {
      throw Error(Errc::schema_violation, where + ": negative event day");
    }
  }
}

namespace {

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

std::string cell_ref(std::size_t row, std::string_view column) {
  return "row " + std::to_string(row) + ", column " + std::string(column);
}

}  // namespace

Dataset read_dataset(std::istream& subjects_in, std::istream& events_in,
                     const FeatureSchema& schema) {
  Dataset d;
  d.schema = schema;
  const auto rows = csv::read(subjects_in);
  if (rows.empty()) throw Error(Errc::schema_violation, "subjects table has no header");

  const auto& header = rows.front();
  const std::vector<std::string> fixed = {"subject_id", "group", "anchor_day"};
  if (header.size() != fixed.size() + schema.size()) {
    throw Error(Errc::schema_violation, "subjects header has " +
                                            std::to_string(header.size()) +
                                            " columns, schema expects " +
                                            std::to_string(fixed.size() + schema.size()));
  }
  for (std::size_t c = 0; c < fixed.size(); ++c) {
    if (header[c] != fixed[c]) {
      throw Error(Errc::schema_violation, "header column " + std::to_string(c) +
                                              " must be " + fixed[c]);
    }
  }
  // Feature columns may appear in any order in the file.
  std::vector<std::size_t> column_of(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto it = std::find(header.begin() + 3, header.end(), schema[j].name);
    if (it == header.end()) {
      throw Error(Errc::schema_violation, "missing column " + schema[j].name);
    }
    column_of[j] = static_cast<std::size_t>(it - header.begin());
  }

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw Error(Errc::schema_violation,
                  "row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                      " cells, expected " + std::to_string(header.size()));
    }
    SubjectRecord s;
    s.subject_id = row[0];
    if (s.subject_id.empty()) {
      throw Error(Errc::schema_violation, cell_ref(r, "subject_id") + ": empty id");
    }
    if (!index.emplace(s.subject_id, d.subjects.size()).second) {
      throw Error(Errc::duplicate_id, "duplicate subject_id " + s.subject_id);
    }
    s.group = row[1];
    const auto anchor = parse_int(row[2]);
    if (!anchor || *anchor < 0) {
      throw Error(Errc::schema_violation, cell_ref(r, "anchor_day") + ": not a day");
    }
    s.anchor_day = *anchor;
    s.features.reserve(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& spec = schema[j];
      const std::string& cell = row[column_of[j]];
      if (cell.empty()) {
        if (!spec.missing_allowed) {
          throw Error(Errc::unparseable_cell,
                      cell_ref(r, spec.name) + ": empty cell in a required feature");
        }
        s.features.emplace_back(std::monostate{});
        continue;
      }
      if (spec.kind == FeatureKind::numeric) {
        if (auto v = parse_number(cell)) {
          s.features.emplace_back(*v);
        } else if (spec.missing_allowed) {
          s.features.emplace_back(std::monostate{});
        } else {
          throw Error(Errc::unparseable_cell,
                      cell_ref(r, spec.name) + ": '" + cell + "' is not a number");
        }
      } else {
        if (std::find(spec.levels.begin(), spec.levels.end(), cell) ==
            spec.levels.end()) {
          throw Error(Errc::schema_violation, cell_ref(r, spec.name) + ": level '" +
                                                  cell + "' is not declared");
        }
        s.features.emplace_back(cell);
      }
    }
    d.subjects.push_back(std::move(s));
  }

  const auto events = csv::read(events_in);
  if (events.empty()) throw Error(Errc::schema_violation, "events table has no header");
  const std::vector<std::string> event_header = {"subject_id", "event_kind", "degree",
                                                 "day", "jurisdiction"};
  if (events.front() != event_header) {
    throw Error(Errc::schema_violation,
                "events header must be subject_id,event_kind,degree,day,jurisdiction");
  }
  for (std::size_t r = 1; r < events.size(); ++r) {
    const auto& row = events[r];
    if (row.size() != event_header.size()) {
      throw Error(Errc::schema_violation,
                  "events row " + std::to_string(r) + " is incomplete");
    }
    const auto it = index.find(row[0]);
    if (it == index.end()) {
      throw Error(Errc::schema_violation, "events row " + std::to_string(r) +
                                              ": unknown subject " + row[0]);
    }
    const auto kind = parse_event_kind(row[1]);
    const auto degree = parse_degree(row[2]);
    const auto day = parse_int(row[3]);
    const auto juris = parse_jurisdiction(row[4]);
    if (!kind || !degree || !day || *day < 0 || !juris) {
      throw Error(Errc::schema_violation,
                  "events row " + std::to_string(r) + ": malformed event");
    }
    d.subjects[it->second].events.push_back({*kind, *degree, *day, *juris});
  }
  return d;
}

Dataset load_dataset(const std::string& subjects_path, const std::string& events_path,
                     const FeatureSchema& schema) {
  std::ifstream subjects(subjects_path, std::ios::binary);
  if (!subjects) throw Error(Errc::io, "cannot open " + subjects_path);
  std::ifstream events(events_path, std::ios::binary);
  if (!events) throw Error(Errc::io, "cannot open " + events_path);
  return read_dataset(subjects, events, schema);
}

void write_subjects(std::ostream& out, const Dataset& d) {
  csv::Row header = {"subject_id", "group", "anchor_day"};
  for (const auto& f : d.schema.features()) header.push_back(f.name);
  csv::write_row(out, header);
  for (const auto& s : d.subjects) {
    csv::Row row = {s.subject_id, s.group, std::to_string(s.anchor_day)};
    for (const auto& v : s.features) {
      if (const auto* x = std::get_if<double>(&v)) {
        row.push_back(format_double(*x));
      } else if (const auto* level = std::get_if<std::string>(&v)) {
        row.push_back(*level);
      } else {
        row.emplace_back();
      }
    }
    csv::write_row(out, row);
  }
}

void write_events(std::ostream& out, const Dataset& d) {
  csv::write_row(out, {"subject_id", "event_kind", "degree", "day", "jurisdiction"});
  for (const auto& s : d.subjects) {
    for (const auto& e : s.events) {
      csv::write_row(out, {s.subject_id, std::string(to_string(e.kind)),
                           std::string(to_string(e.degree)), std::to_string(e.day),
                           std::string(to_string(e.jurisdiction))});
    }
  }
}

void write_dataset(const Dataset& d, const std::string& subjects_path,
                   const std::string& events_path) {
  std::ofstream subjects(subjects_path, std::ios::binary);
  if (!subjects) throw Error(Errc::io, "cannot write " + subjects_path);
  write_subjects(subjects, d);
  std::ofstream events(events_path, std::ios::binary);
  if (!events) throw Error(Errc::io, "cannot write " + events_path);
  write_events(events, d);
}

std::uint64_t dataset_hash(const Dataset& d) {
  std::ostringstream subjects;
  write_subjects(subjects, d);
  std::ostringstream events;
  write_events(events, d);
  return fnv1a64(events.str(), fnv1a64(subjects.str()));
}

double ValidationReport::missingness_of(std::string_view feature) const {
  for (const auto& [name, rate] : missingness) {
    if (name == feature) return rate;
  }
  throw Error(Errc::unknown_feature, "unknown feature " + std::string(feature));
}

ValidationReport validate_dataset(const Dataset& d, std::size_t min_group_size) {
  ValidationReport report;
  report.subjects = d.subjects.size();
  if (d.subjects.empty()) report.warnings.push_back("dataset is empty");

  std::vector<std::size_t> missing(d.schema.size(), 0);
  for (const auto& s : d.subjects) {
    ++report.group_counts[s.group];
    for (std::size_t j = 0; j < s.features.size() && j < missing.size(); ++j) {
      if (is_missing(s.features[j])) ++missing[j];
    }
    for (const auto& e : s.events) ++report.event_kind_counts[std::string(to_string(e.kind))];
  }
  for (std::size_t j = 0; j < d.schema.size(); ++j) {
    const double rate = d.subjects.empty()
                            ? 0.0
                            : static_cast<double>(missing[j]) /
                                  static_cast<double>(d.subjects.size());
    report.missingness.emplace_back(d.schema[j].name, rate);
  }
  for (const auto& [group, count] : report.group_counts) {
    if (count < min_group_size) {
      report.warnings.push_back("group '" + group + "' has " + std::to_string(count) +
                                " subjects (< " + std::to_string(min_group_size) + ")");
    }
  }
  return report;
}

HoldoutSplit split_inconsistency_holdout(const Dataset& d, double fraction,
                                         std::uint64_t master_seed,
                                         const std::optional<std::string>& stratify_by) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(Errc::rate_out_of_range, "holdout fraction must lie in (0,1)");
  }
  std::optional<std::size_t> feature;
  if (stratify_by && *stratify_by != "group") {
    feature = d.schema.require(*stratify_by);
    if (d.schema[*feature].kind != FeatureKind::categorical) {
      throw Error(Errc::invalid_spec, "stratify_by must name a categorical feature");
    }
  }
  const auto label_of = [&](const SubjectRecord& s) -> std::string {
    if (!stratify_by) return "";
    if (!feature) return s.group;
    const auto& v = s.features[*feature];
    if (const auto* level = std::get_if<std::string>(&v)) return *level;
    return "<missing>";
  };

  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < d.subjects.size(); ++i) {
    strata[label_of(d.subjects[i])].push_back(i);
  }

  std::vector<bool> in_holdout(d.subjects.size(), false);
  for (auto& [label, members] : strata) {
    if (stratify_by && members.size() < 2) {
      throw Error(Errc::stratum_too_small,
                  "stratum '" + label + "' has fewer than 2 subjects");
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return d.subjects[a].subject_id < d.subjects[b].subject_id;
    });
    const std::uint64_t seed =
        stable_hash_pair(master_seed, fnv1a64(label));
    Rng rng(seed);
    rng.shuffle(members);
    const auto take = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < take; ++k) in_holdout[members[k]] = true;
  }

  HoldoutSplit split{Dataset{d.schema, {}, d.provenance},
                     Dataset{d.schema, {}, d.provenance}};
  for (std::size_t i = 0; i < d.subjects.size(); ++i) {
    (in_holdout[i] ? split.holdout : split.train).subjects.push_back(d.subjects[i]);
  }
  return split;
}

std::string render_datasheet(const Dataset& d) {
  if (!d.provenance.complete()) {
    throw Error(Errc::missing_provenance,
                "datasheet requires source, collection_period and known_biases");
  }
  const auto report = validate_dataset(d);
  std::ostringstream out;
  out << "source: " << d.provenance.source << '\n';
  out << "collection_period: " << d.provenance.collection_period << '\n';
  out << "known_biases: " << d.provenance.known_biases << '\n';
  out << "subjects: " << report.subjects << '\n';
  out << "features: " << d.schema.size() << '\n';
  for (const auto& [name, rate] : report.missingness) {
    out << "missingness." << name << ": " << format_double(rate) << '\n';
  }
  for (const auto& [group, count] : report.group_counts) {
    out << "group." << group << ": " << count << '\n';
  }
  for (const auto& [kind, count] : report.event_kind_counts) {
    out << "events." << kind << ": " << count << '\n';
  }
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  return out.str();
}

void emit_datasheet(const Dataset& d, const std::string& path) {
  const std::string text = render_datasheet(d);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  out << text;
}

}  // namespace multiverse

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

#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "multiverse/csv.hpp"
#include "multiverse/data.hpp"
#include "multiverse/error.hpp"
#include "multiverse/predicate.hpp"

using namespace multiverse;

namespace {

FeatureSchema small_schema(bool age_required = false) {
  FeatureSpec age;
  age.name = "age";
  age.missing_allowed = !age_required;
  FeatureSpec job;
  job.name = "job";
  job.kind = FeatureKind::categorical;
  job.levels = {"employed", "unemployed"};
  return FeatureSchema({age, job});
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::io;
}

Dataset many_subjects(std::size_t n, std::size_t groups = 2) {
  Dataset d{small_schema(), {}, {"unit test", "none", "none"}};
  for (std::size_t i = 0; i < n; ++i) {
    SubjectRecord s;
    s.subject_id = "P" + std::to_string(1000 + i);
    s.group = std::string(1, static_cast<char>('A' + i % groups));
    s.anchor_day = 100;
    s.features = {static_cast<double>(i % 50), std::string(i % 3 ? "employed" : "unemployed")};
    d.subjects.push_back(std::move(s));
  }
  return d;
}

}  // namespace

TEST_CASE("csv reader handles quoting, embedded newlines and CRLF") {
  std::istringstream in("a,b,c\r\n\"x,1\",\"say \"\"hi\"\"\",\"two\nlines\"\n,,\n");
  const auto rows = csv::read(in);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1] == csv::Row{"x,1", "say \"hi\"", "two\nlines"});
  CHECK(rows[2] == csv::Row{"", "", ""});
  std::ostringstream out;
  csv::write_row(out, rows[1]);
  std::istringstream again(out.str());
  CHECK(csv::read(again).front() == rows[1]);
}

TEST_CASE("read_dataset parses subjects and events") {
  std::istringstream subjects("subject_id,group,anchor_day,job,age\nS1,A,100,employed,31\nS2,B,90,,x\n");
  std::istringstream events(
      "subject_id,event_kind,degree,day,jurisdiction\nS1,conviction,felony,150,in_state\n"
      "S2,arrest,misdemeanor,80,out_of_state\n");
  const auto d = read_dataset(subjects, events, small_schema());
  REQUIRE(d.size() == 2);
  CHECK(std::get<double>(d.subjects[0].features[0]) == 31.0);
  CHECK(std::get<std::string>(d.subjects[0].features[1]) == "employed");
  // Empty categorical and unparseable numeric become missing.
  CHECK(is_missing(d.subjects[1].features[0]));
  CHECK(is_missing(d.subjects[1].features[1]));
  REQUIRE(d.subjects[1].events.size() == 1);
  CHECK(d.subjects[1].events[0].jurisdiction == Jurisdiction::out_of_state);
}

TEST_CASE("read_dataset error codes") {
  const std::string ev = "subject_id,event_kind,degree,day,jurisdiction\n";
  SUBCASE("duplicate id") {
    CHECK(code_of([&] {
            std::istringstream s("subject_id,group,anchor_day,age,job\nS1,A,1,2,employed\nS1,A,1,3,employed\n");
            std::istringstream e(ev);
            read_dataset(s, e, small_schema());
          }) == Errc::duplicate_id);
  }
  SUBCASE("undeclared level") {
    CHECK(code_of([&] {
            std::istringstream s("subject_id,group,anchor_day,age,job\nS1,A,1,2,retired\n");
            std::istringstream e(ev);
            read_dataset(s, e, small_schema());
          }) == Errc::schema_violation);
  }
  SUBCASE("unparseable required cell") {
    CHECK(code_of([&] {
            std::istringstream s("subject_id,group,anchor_day,age,job\nS1,A,1,abc,employed\n");
            std::istringstream e(ev);
            read_dataset(s, e, small_schema(true));
          }) == Errc::unparseable_cell);
  }
  SUBCASE("event for unknown subject") {
    CHECK(code_of([&] {
            std::istringstream s("subject_id,group,anchor_day,age,job\nS1,A,1,2,employed\n");
            std::istringstream e(ev + "S9,arrest,felony,3,in_state\n");
            read_dataset(s, e, small_schema());
          }) == Errc::schema_violation);
  }
}

TEST_CASE("write then read reproduces the dataset and its hash") {
  auto d = many_subjects(20);
  d.subjects[3].features[0] = std::monostate{};
  d.subjects[4].events.push_back({EventKind::conviction, Degree::felony, 120, Jurisdiction::in_state});
  std::ostringstream s, e;
  write_subjects(s, d);
  write_events(e, d);
  std::istringstream si(s.str()), ei(e.str());
  auto back = read_dataset(si, ei, d.schema);
  back.provenance = d.provenance;
  CHECK(back == d);
  CHECK(dataset_hash(back) == dataset_hash(d));
  back.subjects[0].anchor_day += 1;
  CHECK(dataset_hash(back) != dataset_hash(d));
}

TEST_CASE("validation report") {
  auto d = many_subjects(40, 3);
  d.subjects[0].features[0] = std::monostate{};
  const auto r = validate_dataset(d);
  CHECK(r.subjects == 40);
  CHECK(r.missingness_of("age") == doctest::Approx(1.0 / 40));
  CHECK(r.group_counts.at("A") == 14);
  // Every group is below 30.
  CHECK(r.warnings.size() == 3);
}

TEST_CASE("holdout split") {
  const auto d = many_subjects(200);
  const auto split = split_inconsistency_holdout(d, 0.3, 5);
  CHECK(split.holdout.size() == 60);
  CHECK(split.train.size() == 140);

  SUBCASE("partition") {
    std::vector<std::string> ids;
    for (const auto& s : split.train.subjects) ids.push_back(s.subject_id);
    for (const auto& s : split.holdout.subjects) ids.push_back(s.subject_id);
    std::sort(ids.begin(), ids.end());
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    CHECK(ids.size() == 200);
  }
  SUBCASE("insertion order does not matter") {
    auto shuffled = d;
    std::reverse(shuffled.subjects.begin(), shuffled.subjects.end());
    const auto again = split_inconsistency_holdout(shuffled, 0.3, 5);
    std::vector<std::string> a, b;
    for (const auto& s : split.holdout.subjects) a.push_back(s.subject_id);
    for (const auto& s : again.holdout.subjects) b.push_back(s.subject_id);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
  SUBCASE("different seed, different split") {
    const auto other = split_inconsistency_holdout(d, 0.3, 6);
    CHECK(other.holdout.subjects != split.holdout.subjects);
  }
  SUBCASE("stratified keeps group shares") {
    const auto st = split_inconsistency_holdout(d, 0.3, 5, std::string("group"));
    std::map<std::string, int> counts;
    for (const auto& s : st.holdout.subjects) ++counts[s.group];
    CHECK(counts["A"] == 30);
    CHECK(counts["B"] == 30);
  }
  SUBCASE("tiny stratum") {
    auto t = many_subjects(10, 1);
    t.subjects[0].group = "Z";
    CHECK(code_of([&] { split_inconsistency_holdout(t, 0.3, 1, std::string("group")); }) ==
          Errc::stratum_too_small);
  }
}

TEST_CASE("datasheet requires provenance") {
  auto d = many_subjects(10);
  const auto text = render_datasheet(d);
  CHECK(text.find("source: unit test") != std::string::npos);
  CHECK(text.find("missingness.age: 0") != std::string::npos);
  d.provenance.known_biases.clear();
  CHECK(code_of([&] { render_datasheet(d); }) == Errc::missing_provenance);
}

TEST_CASE("subject predicates") {
  const auto schema = small_schema();
  SubjectRecord s;
  s.subject_id = "S";
  s.group = "B";
  s.anchor_day = 100;
  s.features = {25.0, std::string("unemployed")};
  s.events = {{EventKind::conviction, Degree::felony, 50, Jurisdiction::in_state},
              {EventKind::arrest, Degree::misdemeanor, 150, Jurisdiction::in_state}};

  const auto eval = [&](const char* text) {
    const auto p = SubjectPredicate::from_json(nlohmann::json::parse(text));
    p.check(schema);
    return p(schema, s);
  };
  CHECK(eval(R"({"all":true})"));
  CHECK(eval(R"({"events":{"kinds":["conviction"],"when":"prior"}})"));
  CHECK_FALSE(eval(R"({"events":{"kinds":["conviction"],"when":"post"}})"));
  CHECK(eval(R"({"events":{"when":"any","min_count":2}})"));
  CHECK(eval(R"({"feature_equals":{"feature":"job","level":"unemployed"}})"));
  CHECK(eval(R"({"feature_between":{"feature":"age","min":21,"max":30}})"));
  CHECK_FALSE(eval(R"({"group_in":["A"]})"));
  CHECK(eval(R"({"not":{"group_in":["A"]}})"));
  CHECK(eval(R"({"any_of":[{"group_in":["A"]},{"group_in":["B"]}]})"));
  CHECK_FALSE(eval(R"({"all_of":[{"group_in":["A"]},{"group_in":["B"]}]})"));

  const auto p = SubjectPredicate::from_json(nlohmann::json::parse(R"({"feature_equals":{"feature":"zzz","level":"x"}})"));
  CHECK(code_of([&] { p.check(schema); }) == Errc::unknown_feature);

  const auto round = SubjectPredicate::from_json(
      SubjectPredicate::from_json(nlohmann::json::parse(R"({"not":{"group_in":["A"]}})")).to_json());
  CHECK(round(schema, s));
}

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
#include <functional>

#include "multiverse/error.hpp"
#include "multiverse/pipeline.hpp"
#include "multiverse/random.hpp"

using namespace multiverse;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::io;
}

// age numeric (row 1 missing), job categorical with levels a/b/c (row 2 missing).
LabeledFrame toy_frame() {
  LabeledFrame f;
  f.rows = {"r0", "r1", "r2", "r3", "r4", "r5"};
  f.groups = {"A", "A", "B", "B", "A", "B"};
  f.y = (Eigen::VectorXd(6) << 1, 0, 0, 1, 0, 0).finished();
  Column age{"age", FeatureKind::numeric, {}, {20.0, std::nullopt, 30.0, 40.0, 50.0, 60.0}, {}};
  Column job{"job", FeatureKind::categorical, {"a", "b", "c"}, {}, {0, 1, std::nullopt, 1, 1, 2}};
  f.columns = {age, job};
  return f;
}

Dataset event_dataset() {
  Dataset d;
  SubjectRecord s;
  s.subject_id = "S1";
  s.group = "A";
  s.anchor_day = 100;
  s.events = {{EventKind::conviction, Degree::felony, 100, Jurisdiction::in_state},   // at anchor
              {EventKind::arrest, Degree::felony, 150, Jurisdiction::in_state},
              {EventKind::conviction, Degree::misdemeanor, 300, Jurisdiction::out_of_state}};
  d.subjects.push_back(s);
  return d;
}

}  // namespace

TEST_CASE("labels use a half-open window after the anchor") {
  const auto d = event_dataset();
  OutcomeDefinition def;
  def.window_days = 199;
  CHECK(derive_labels(d, def)(0) == 0.0);  // conviction at day 300 is one day late
  def.window_days = 200;
  CHECK(derive_labels(d, def)(0) == 1.0);
  def.jurisdictions = JurisdictionSet{Jurisdiction::in_state};
  CHECK(derive_labels(d, def)(0) == 0.0);
  def.failure_events = EventKindSet{EventKind::arrest};
  def.window_days = 50;
  CHECK(derive_labels(d, def)(0) == 1.0);
  def.degrees = DegreeSet{Degree::misdemeanor};
  CHECK(derive_labels(d, def)(0) == 0.0);
}

TEST_CASE("outcome definition json") {
  const auto def = OutcomeDefinition::from_json(
      {{"failure_events", {"conviction", "arrest"}}, {"window_years", 3.5}});
  CHECK(def.window_days == 1277);
  CHECK(def.failure_events.contains(EventKind::arrest));
  CHECK(code_of([] { OutcomeDefinition::from_json({{"failure_events", {"nope"}}, {"window_days", 3}}); }) ==
        Errc::config_invalid);
}

TEST_CASE("imputation") {
  const auto f = toy_frame();

  SUBCASE("mean/mode fills from training statistics") {
    const auto imp = Imputer::fit(f, ImputationMethod::mean_mode);
    CHECK(imp.numeric_fill()[0] == doctest::Approx(40.0));
    CHECK(imp.level_fill()[1] == 1);
    const auto out = imp.apply(f, true, 1);
    CHECK(*out.columns[0].numeric[1] == doctest::Approx(40.0));
    CHECK(*out.columns[1].codes[2] == 1);
    CHECK_FALSE(out.has_missing());
  }
  SUBCASE("complete case drops training rows only") {
    const auto imp = Imputer::fit(f, ImputationMethod::complete_case);
    const auto train = imp.apply(f, true, 1);
    CHECK(train.rows == std::vector<std::string>{"r0", "r3", "r4", "r5"});
    const auto test = imp.apply(f, false, 1);
    CHECK(test.size() == 6);
    CHECK_FALSE(test.has_missing());
    CHECK(code_of([&] { imp.apply(f, true, 5); }) == Errc::all_rows_dropped);
  }
  SUBCASE("indicator appends flag columns") {
    const auto out = impute(f, ImputationMethod::indicator, 1);
    REQUIRE(out.columns.size() == 4);
    CHECK(out.columns[2].name == "age__missing");
    CHECK(out.columns[3].name == "job__missing");
    CHECK(*out.columns[2].numeric[1] == 1.0);
    CHECK(*out.columns[3].numeric[1] == 0.0);
  }
  SUBCASE("statistics are frozen") {
    const auto imp = Imputer::fit(f, ImputationMethod::mean_mode);
    auto other = f;
    other.columns[0].numeric = {std::nullopt, 1.0, 1.0, 1.0, 1.0, 1.0};
    CHECK(*imp.apply(other, false).columns[0].numeric[0] == doctest::Approx(40.0));
  }
}

TEST_CASE("rare grouping") {
  auto f = impute(toy_frame(), ImputationMethod::mean_mode, 1);
  // job shares: a 1/6, b 4/6, c 1/6.
  const auto out = group_rare(f, 0.2);
  const auto& job = out.columns[1];
  CHECK(job.levels == std::vector<std::string>{"b", "OTHER"});
  CHECK(job.levels[static_cast<std::size_t>(*job.codes[0])] == "OTHER");
  CHECK(job.levels[static_cast<std::size_t>(*job.codes[1])] == "b");
  CHECK(group_rare(f, 0.0).columns[1].levels == f.columns[1].levels);
  CHECK(code_of([&] { group_rare(f, 1.0); }) == Errc::rate_out_of_range);
}

TEST_CASE("one-hot encoding drops the most frequent level") {
  const auto f = impute(toy_frame(), ImputationMethod::mean_mode, 1);
  const auto enc = Encoder::fit(f);
  CHECK(enc.encoding().column_names == std::vector<std::string>{"age", "job=a", "job=c"});
  const auto m = enc.apply(f);
  CHECK(m.X.rows() == 6);
  CHECK(m.X(0, 1) == 1.0);
  CHECK(m.X(1, 1) + m.X(1, 2) == 0.0);
  CHECK(m.X(5, 2) == 1.0);

  SUBCASE("levels absent from training get no column and warn at apply") {
    auto train = f;
    train.columns[1].codes = {0, 1, 1, 1, 1, 1};
    const auto e2 = Encoder::fit(train);
    CHECK(e2.encoding().column_names == std::vector<std::string>{"age", "job=a"});
    std::vector<std::string> warnings;
    const auto out = e2.apply(f, &warnings);
    CHECK(out.X.row(5).tail(1)(0) == 0.0);
    CHECK(warnings.size() == 1);
  }
}

TEST_CASE("resampling") {
  LabeledMatrix m;
  for (int i = 0; i < 100; ++i) m.rows.push_back("r" + std::to_string(i));
  m.groups.assign(100, "A");
  m.X = Eigen::MatrixXd::Random(100, 2);
  m.y = Eigen::VectorXd::Zero(100);
  for (int i = 0; i < 20; ++i) m.y(i * 5) = 1.0;

  SUBCASE("oversampling") {
    const auto out = resample(m, ResampleMethod::oversample_minority, 0.5, 3);
    CHECK(out.size() == 160);
    CHECK(out.y.sum() == 80.0);
    CHECK(out.base_rate() >= 0.5);
  }
  SUBCASE("undersampling keeps order") {
    const auto out = resample(m, ResampleMethod::undersample_majority, 0.4, 3);
    CHECK(out.y.sum() == 20.0);
    CHECK(out.size() == 50);
    CHECK(std::is_sorted(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) {
      return std::stoi(a.substr(1)) < std::stoi(b.substr(1));
    }));
  }
  SUBCASE("no-op when already balanced") {
    CHECK(resample(m, ResampleMethod::oversample_minority, 0.1, 3).size() == 100);
  }
  SUBCASE("errors") {
    auto none = m;
    none.y.setZero();
    CHECK(code_of([&] { resample(none, ResampleMethod::oversample_minority, 0.5, 1); }) ==
          Errc::empty_minority);
    CHECK(code_of([&] { resample(m, ResampleMethod::oversample_minority, 1.0, 1); }) ==
          Errc::rate_out_of_range);
  }
}

TEST_CASE("variable selection") {
  Rng rng(11);
  const int n = 600;
  LabeledMatrix m;
  m.X.resize(n, 4);
  m.y.resize(n);
  for (int i = 0; i < n; ++i) {
    m.X(i, 0) = rng.normal();
    m.X(i, 1) = rng.normal();
    m.X(i, 2) = 1.0;  // constant
    m.X(i, 3) = rng.normal();
    const double p = 1.0 / (1.0 + std::exp(-(2.0 * m.X(i, 0) - 1.5 * m.X(i, 3))));
    m.y(i) = rng.uniform() < p ? 1.0 : 0.0;
    m.rows.push_back(std::to_string(i));
    m.groups.push_back("A");
  }

  SUBCASE("forward stepwise finds the signal") {
    const auto cols = forward_stepwise(m.X, m.y, std::log(static_cast<double>(n)));
    CHECK(cols == std::vector<int>{0, 3});
  }
  SUBCASE("stepwise with a huge penalty selects nothing") {
    SelectionSpec s;
    s.method = SelectionMethod::forward_stepwise;
    s.penalty = 1e9;
    CHECK(select_variables(m, s, 1).intercept_only);
  }
  SUBCASE("bootstrap stability") {
    SelectionSpec s;
    s.method = SelectionMethod::bootstrap_stability;
    s.replicates = 10;
    s.penalty = std::log(static_cast<double>(n));
    const auto sel = select_variables(m, s, 4);
    CHECK(sel.frequency[0] == 1.0);
    CHECK(sel.frequency[2] == 0.0);
    CHECK(std::find(sel.columns.begin(), sel.columns.end(), 0) != sel.columns.end());
    CHECK(select_variables(m, s, 4).columns == sel.columns);
  }
  SUBCASE("l1 path") {
    SelectionSpec s;
    s.method = SelectionMethod::l1_path;
    s.lambda = 0.05;
    const auto sel = select_variables(m, s, 1);
    CHECK(std::find(sel.columns.begin(), sel.columns.end(), 0) != sel.columns.end());
    CHECK(std::find(sel.columns.begin(), sel.columns.end(), 2) == sel.columns.end());
  }
  SUBCASE("spec validation") {
    CHECK(code_of([] { SelectionSpec::from_json({{"method", "bootstrap_stability"}, {"replicates", 3}}); }) ==
          Errc::invalid_spec);
    CHECK(code_of([] { SelectionSpec::from_json({{"method", "magic"}}); }) == Errc::config_invalid);
  }
}

TEST_CASE("subpopulation restriction") {
  Dataset d = event_dataset();
  CHECK(restrict_subpopulation(d, SubjectPredicate::from_json({{"group_in", {"A"}}})).size() == 1);
  CHECK(code_of([&] { restrict_subpopulation(d, SubjectPredicate::from_json({{"group_in", {"Z"}}})); }) ==
        Errc::empty_result);
}

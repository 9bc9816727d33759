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

#include <cmath>
#include <vector>

#include "multiverse/error.hpp"
#include "multiverse/pipeline.hpp"
#include "multiverse/synthgen.hpp"

using namespace multiverse;

namespace {

const std::vector<RateTarget> kVrag = {{years_to_days(3.5), 0.15},
                                       {years_to_days(6.0), 0.31},
                                       {years_to_days(10.0), 0.43}};

PopulationSpec homogeneous(std::size_t n) {
  PopulationSpec spec;
  spec.n = n;
  spec.features = {{"age", NumericGenerator{30.0, 8.0}},
                   {"job", CategoricalGenerator{{{"employed", 0.6}, {"unemployed", 0.4}}}}};
  spec.group_mix = {{"A", 0.5}, {"B", 0.5}};
  spec.hazard = calibrate_hazard(kVrag);
  return spec;
}

double rate_at(const Dataset& d, std::int64_t window) {
  OutcomeDefinition def;
  def.window_days = window;
  return derive_labels(d, def).mean();
}

}  // namespace

TEST_CASE("years_to_days floors") {
  CHECK(years_to_days(3.5) == 1277);
  CHECK(years_to_days(6.0) == 2190);
  CHECK(years_to_days(10.0) == 3650);
}

TEST_CASE("piecewise hazard cumulative and inverse") {
  PiecewiseHazard h{{100, 300}, {0.01, 0.002}};
  CHECK(h.cumulative(50) == doctest::Approx(0.5));
  CHECK(h.cumulative(200) == doctest::Approx(1.0 + 0.2));
  CHECK(h.cumulative(400) == doctest::Approx(1.0 + 0.4 + 0.2));  // last rate continues
  for (double t : {1.0, 99.0, 150.0, 299.0, 1000.0}) {
    CHECK(*h.inverse_cumulative(h.cumulative(t)) == doctest::Approx(t));
  }
  PiecewiseHazard zero_tail{{100}, {0.01, 0.0}};
  CHECK_FALSE(zero_tail.inverse_cumulative(2.0).has_value());
}

TEST_CASE("closed-form calibration hits the VRAG triple exactly") {
  const auto h = calibrate_hazard(kVrag);
  for (const auto& t : kVrag) {
    CHECK(1.0 - h.survival(static_cast<double>(t.window_days)) ==
          doctest::Approx(t.cumulative_rate).epsilon(1e-12));
  }
  // Rates per year worked by hand: ln(1/0.85)/3.5, ln(0.85/0.69)/2.5, ln(0.69/0.57)/4.
  const double per_year = 365.0;
  CHECK(h.rates_per_day[0] * per_year == doctest::Approx(std::log(1 / 0.85) / (1277 / 365.0)));
  CHECK(h.rates_per_day[1] * per_year == doctest::Approx(std::log(0.85 / 0.69) / (913 / 365.0)));
  CHECK(h.rates_per_day[2] * per_year == doctest::Approx(std::log(0.69 / 0.57) / (1460 / 365.0)));
}

TEST_CASE("calibration rejects non-monotone targets") {
  std::vector<RateTarget> bad = {{1000, 0.3}, {2000, 0.2}};
  CHECK_THROWS_AS(calibrate_hazard(bad), Error);
  try {
    calibrate_hazard(bad);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_monotone_targets);
  }
}

TEST_CASE("marginal calibration averages survival over multipliers") {
  std::vector<double> lp;
  for (int i = 0; i < 200; ++i) lp.push_back(-1.0 + 2.0 * i / 199.0);
  const auto h = calibrate_hazard(kVrag, lp);
  for (const auto& t : kVrag) {
    double s = 0.0;
    const double H = h.cumulative(static_cast<double>(t.window_days));
    for (double x : lp) s += std::exp(-std::exp(x) * H);
    CHECK(1.0 - s / lp.size() == doctest::Approx(t.cumulative_rate).epsilon(1e-8));
  }
}

TEST_CASE("generated base rates match targets") {
  const auto pop = generate_population(homogeneous(8000), 3);
  for (const auto& t : kVrag) {
    const double sd = std::sqrt(t.cumulative_rate * (1 - t.cumulative_rate) / 8000.0);
    CHECK(std::abs(rate_at(pop.data, t.window_days) - t.cumulative_rate) < 3 * sd);
  }
}

TEST_CASE("labels agree with the latent failure time") {
  const auto pop = generate_population(homogeneous(2000), 4);
  OutcomeDefinition def;
  def.window_days = 1277;
  const auto y = derive_labels(pop.data, def);
  for (std::size_t i = 0; i < pop.data.size(); ++i) {
    const auto& t = pop.truth.failure_time[i];
    CHECK((y(static_cast<Eigen::Index>(i)) > 0.5) == (t.has_value() && *t <= 1277.0));
  }
}

TEST_CASE("generation is deterministic and seed-sensitive") {
  const auto a = generate_population(homogeneous(300), 9);
  const auto b = generate_population(homogeneous(300), 9);
  const auto c = generate_population(homogeneous(300), 10);
  CHECK(a.data == b.data);
  CHECK_FALSE(a.data == c.data);
  CHECK(a.data.subjects.front().subject_id == "S001");
}

TEST_CASE("bias injectors") {
  const auto pop = generate_population(homogeneous(4000), 5);
  const auto& d = pop.data;

  SUBCASE("MCAR missingness at the requested rate") {
    const auto out = inject_bias(d, Missingness{"age", MissingMechanism::mcar, 0.2, {}, 1.0}, 1);
    const auto r = validate_dataset(out);
    CHECK(r.missingness_of("age") == doctest::Approx(0.2).epsilon(0.15));
    CHECK(validate_dataset(d).missingness_of("age") == 0.0);  // input untouched
  }
  SUBCASE("MNAR removes high values more often") {
    const auto out = inject_bias(d, Missingness{"age", MissingMechanism::mnar, 0.2, {}, 2.0}, 1);
    double kept = 0, n = 0, all = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double v = std::get<double>(d.subjects[i].features[0]);
      all += v;
      if (!is_missing(out.subjects[i].features[0])) {
        kept += v;
        ++n;
      }
    }
    CHECK(kept / n < all / d.size());
  }
  SUBCASE("label noise flips only the targeted group") {
    LabelNoise noise;
    noise.flip_rate_by_group = {{"B", 0.3}};
    const auto out = inject_bias(d, noise, 2);
    OutcomeDefinition def;
    def.window_days = noise.horizon_days;
    const auto y0 = derive_labels(d, def);
    const auto y1 = derive_labels(out, def);
    double flips_a = 0, flips_b = 0, nb = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const bool flipped = y0(static_cast<Eigen::Index>(i)) != y1(static_cast<Eigen::Index>(i));
      if (d.subjects[i].group == "A") flips_a += flipped;
      else {
        flips_b += flipped;
        ++nb;
      }
    }
    CHECK(flips_a == 0);
    CHECK(flips_b / nb == doctest::Approx(0.3).epsilon(0.2));
  }
  SUBCASE("selection with inclusion 1 is the identity") {
    SelectionBias s;
    s.intercept = std::numeric_limits<double>::infinity();
    CHECK(inject_bias(d, s, 3) == d);
  }
  SUBCASE("coverage filter keeps matching subjects") {
    const auto out = inject_bias(d, CoverageFilter{SubjectPredicate::from_json({{"group_in", {"A"}}})}, 4);
    CHECK(out.size() > 0);
    for (const auto& s : out.subjects) CHECK(s.group == "A");
  }
  SUBCASE("measurement noise perturbs numeric values only") {
    const auto out = inject_bias(d, MeasurementNoise{{{"age", 1.0}}, {}}, 5);
    CHECK(out.subjects[0].features[1] == d.subjects[0].features[1]);
    CHECK(out.subjects[0].features[0] != d.subjects[0].features[0]);
  }
}

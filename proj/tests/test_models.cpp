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
#include <functional>
#include <numeric>

#include "gradcheck.hpp"
#include "multiverse/error.hpp"
#include "multiverse/models.hpp"
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

LabeledMatrix logistic_data(std::size_t n, std::uint64_t seed, double b0, std::vector<double> w) {
  Rng rng(seed);
  LabeledMatrix m;
  const auto p = static_cast<Eigen::Index>(w.size());
  m.X.resize(static_cast<Eigen::Index>(n), p);
  m.y.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m.X.rows(); ++i) {
    double eta = b0;
    for (Eigen::Index j = 0; j < p; ++j) {
      m.X(i, j) = rng.normal();
      eta += w[static_cast<std::size_t>(j)] * m.X(i, j);
    }
    m.y(i) = rng.uniform() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    m.rows.push_back("S" + std::to_string(i));
    m.groups.push_back("A");
  }
  for (Eigen::Index j = 0; j < p; ++j) m.column_names.push_back("x" + std::to_string(j));
  return m;
}

}  // namespace

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(2024);
  for (int k = 0; k < 25; ++k) CHECK(gradcheck::relative_error(gradcheck::random_instance(rng)) < 1e-6);
}

TEST_CASE("logistic fit reaches a stationary point") {
  const auto m = logistic_data(2000, 1, -0.5, {1.0, -2.0, 0.0});
  const auto fit = fit_logistic(m.X, m.y);
  CHECK(fit.converged);
  const Eigen::VectorXd g = logistic_gradient(m.X, m.y, fit.intercept, fit.coefficients, 0.0);
  CHECK(g.norm() / 2000.0 < 1e-8);
  CHECK(fit.coefficients(0) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(fit.coefficients(1) == doctest::Approx(-2.0).epsilon(0.15));
  CHECK(std::abs(fit.coefficients(2)) < 0.15);
  CHECK(logistic_deviance(m.X, m.y, fit) ==
        doctest::Approx(2.0 * logistic_objective(m.X, m.y, fit.intercept, fit.coefficients, 0.0)));
}

TEST_CASE("ridge shrinks toward zero") {
  const auto m = logistic_data(500, 2, 0.0, {1.5, 1.5});
  const auto plain = fit_logistic(m.X, m.y);
  LogisticOptions o;
  o.l2 = 50.0;
  const auto ridge = fit_logistic(m.X, m.y, o);
  CHECK(ridge.coefficients.norm() < plain.coefficients.norm());
  const Eigen::VectorXd g = logistic_gradient(m.X, m.y, ridge.intercept, ridge.coefficients, 50.0);
  CHECK(g.norm() < 1e-5);
}

TEST_CASE("separable data stays finite") {
  LabeledMatrix m;
  m.X = (Eigen::MatrixXd(6, 1) << -3, -2, -1, 1, 2, 3).finished();
  m.y = (Eigen::VectorXd(6) << 0, 0, 0, 1, 1, 1).finished();
  std::vector<std::string> warnings;
  const auto fit = fit_logistic(m.X, m.y, {}, &warnings);
  CHECK(std::isfinite(fit.intercept));
  CHECK(fit.coefficients.allFinite());
}

TEST_CASE("l1 zeroes noise columns and keeps strong ones") {
  const auto m = logistic_data(1500, 3, 0.0, {2.0, 0.0, 0.0, -1.0});
  const auto fit = fit_l1_logistic(m.X, m.y, 0.05);
  CHECK(fit.coefficients(0) > 0.5);
  CHECK(fit.coefficients(3) < -0.2);
  CHECK(fit.coefficients(1) == 0.0);
  CHECK(fit.coefficients(2) == 0.0);
  CHECK(fit_l1_logistic(m.X, m.y, 10.0).coefficients.isZero());
}

TEST_CASE("a tree recovers an axis-aligned rule") {
  LabeledMatrix m;
  const int n = 200;
  m.X.resize(n, 2);
  m.y.resize(n);
  Rng rng(4);
  for (int i = 0; i < n; ++i) {
    m.X(i, 0) = rng.uniform();
    m.X(i, 1) = rng.uniform();
    m.y(i) = m.X(i, 1) > 0.6 ? 1.0 : 0.0;
  }
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  const auto tree = grow_tree(m.X, m.y, rows, TreeOptions{1, 1, 0, 1.0});
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == 1);
  CHECK(tree.depth() == 1);
  for (int i = 0; i < n; ++i) CHECK((tree.predict(m.X.row(i)) > 0.5) == (m.y(i) > 0.5));

  SUBCASE("min_leaf is honored") {
    const auto t = grow_tree(m.X, m.y, rows, TreeOptions{10, 40, 0, 1.0});
    for (const auto& node : t.nodes) {
      if (node.feature < 0) CHECK(node.count >= 40);
    }
  }
  SUBCASE("leaf probabilities are Laplace smoothed") {
    for (const auto& node : tree.nodes) {
      CHECK(node.probability > 0.0);
      CHECK(node.probability < 1.0);
    }
  }
}

TEST_CASE("model fitting") {
  const auto m = logistic_data(400, 5, -0.3, {1.0, 0.5, -0.5, 0.0});

  SUBCASE("forests are deterministic per seed and differ across seeds") {
    ModelSpec spec = ModelSpec::from_json({{"family", "forest"}, {"n_trees", 10}, {"max_depth", 4}});
    const auto a = predict_proba(fit_model(m, spec, 1), m.X);
    const auto b = predict_proba(fit_model(m, spec, 1), m.X);
    const auto c = predict_proba(fit_model(m, spec, 2), m.X);
    CHECK(a == b);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
    CHECK(a.minCoeff() > 0.0);
    CHECK(a.maxCoeff() < 1.0);
  }
  SUBCASE("logistic ignores the seed") {
    const ModelSpec spec;
    CHECK(predict_proba(fit_model(m, spec, 1), m.X) == predict_proba(fit_model(m, spec, 9), m.X));
  }
  SUBCASE("errors") {
    auto one = m;
    one.y.setOnes();
    CHECK(code_of([&] { fit_model(one, ModelSpec{}, 1); }) == Errc::single_class);
    ModelSpec big;
    big.min_rows = 1000;
    CHECK(code_of([&] { fit_model(m, big, 1); }) == Errc::all_rows_dropped);
    const auto fitted = fit_model(m, ModelSpec{}, 1);
    CHECK(code_of([&] { predict_proba(fitted, m.X.leftCols(2)); }) == Errc::schema_mismatch);
    CHECK(code_of([] { ModelSpec::from_json({{"family", "svm"}}); }) == Errc::config_invalid);
    CHECK(code_of([] { ModelSpec::from_json({{"family", "tree"}, {"max_depth", 0}}); }) == Errc::invalid_spec);
  }
  SUBCASE("spec round trip") {
    const auto spec = ModelSpec::from_json({{"family", "tree"}, {"max_depth", 3}, {"min_leaf", 7}});
    const auto back = ModelSpec::from_json(spec.to_json());
    CHECK(back.max_depth == 3);
    CHECK(back.min_leaf == 7);
    CHECK(back.family == ModelFamily::tree);
  }
}

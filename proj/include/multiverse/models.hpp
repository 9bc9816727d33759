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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "multiverse/frame.hpp"

namespace multiverse {

// ---------------------------------------------------------------------------
// Penalized logistic likelihood, written against Eigen expressions so the
// same code serves fitting and the finite-difference checks in the tests.
//
//   f(b0, w) = -sum_i [ y_i log p_i + (1 - y_i) log(1 - p_i) ] + l2/2 |w|^2
//   p_i      = sigmoid(b0 + x_i . w)

template <typename Scalar>
Scalar log1p_exp(Scalar t) {
  using std::exp;
  using std::log1p;
  return t > Scalar(0) ? t + log1p(exp(-t)) : log1p(exp(t));
}

template <typename Scalar>
Scalar sigmoid(Scalar t) {
  using std::exp;
  return t >= Scalar(0) ? Scalar(1) / (Scalar(1) + exp(-t))
                        : exp(t) / (Scalar(1) + exp(t));
}

template <typename DerivedX, typename DerivedY, typename DerivedW>
typename DerivedX::Scalar logistic_objective(const Eigen::MatrixBase<DerivedX>& X,
                                             const Eigen::MatrixBase<DerivedY>& y,
                                             typename DerivedX::Scalar intercept,
                                             const Eigen::MatrixBase<DerivedW>& w,
                                             typename DerivedX::Scalar l2) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eta =
      (X * w).array() + intercept;
  Scalar nll(0);
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // -[y eta - log(1 + e^eta)]
    nll += log1p_exp(eta(i)) - y(i) * eta(i);
  }
  return nll + Scalar(0.5) * l2 * w.squaredNorm();
}

/// Gradient w.r.t. (intercept, w), intercept first.
template <typename DerivedX, typename DerivedY, typename DerivedW>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> logistic_gradient(
    const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedY>& y,
    typename DerivedX::Scalar intercept, const Eigen::MatrixBase<DerivedW>& w,
    typename DerivedX::Scalar l2) {
  using Scalar = typename DerivedX::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Vector eta = (X * w).array() + intercept;
  const Vector residual = eta.unaryExpr([](Scalar t) { return sigmoid(t); }) - y;
  Vector g(w.size() + 1);
  g(0) = residual.sum();
  g.tail(w.size()) = X.transpose() * residual + l2 * w;
  return g;
}

struct LogisticOptions {
  double l2 = 0.0;
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
};

struct LogisticFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  double l2 = 0.0;  // strength actually used (after any fallback)
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Newton/IRLS with step halving whenever the penalized deviance increases.
/// Stops when |grad|_2 / max(1, n) < gradient_tolerance. A singular system
/// with l2 == 0 falls back to l2 = 1e-6 and appends a warning.
LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const LogisticOptions& options = {},
                         std::vector<std::string>* warnings = nullptr);

/// Deviance (-2 log-likelihood) of a fitted model on (X, y).
double logistic_deviance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const LogisticFit& fit);

/// L1-penalized logistic regression by coordinate descent on the IRLS
/// quadratic approximation (columns standardized internally, coefficients
/// returned on the original scale). Objective:
///   (1/n) * negative log-likelihood + lambda * |w|_1.
LogisticFit fit_l1_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            double lambda, int max_iterations = 200);

// ---------------------------------------------------------------------------

enum class ModelFamily : std::uint8_t { logistic, tree, forest };

std::string_view to_string(ModelFamily family);

struct ModelSpec {
  ModelFamily family = ModelFamily::logistic;
  double l2 = 0.0;
  int max_depth = 5;
  int min_leaf = 10;
  int n_trees = 100;
  /// 0 selects floor(sqrt(#columns)) for forests and all columns for trees.
  int features_per_split = 0;
  /// Multiplies positive-class counts in the Gini impurity.
  double positive_weight = 1.0;
  std::size_t min_rows = 50;

  /// Throws Error(invalid_spec).
  void validate() const;
  static ModelSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double probability = 0.5;
  std::size_t count = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  template <typename Row>
  double predict(const Row& x) const {
    int k = 0;
    while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(k)];
      k = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(k)].probability;
  }
  std::size_t depth() const;
  friend bool operator==(const DecisionTree& a, const DecisionTree& b);
};

struct TreeOptions {
  int max_depth = 5;
  std::size_t min_leaf = 1;
  int features_per_split = 0;  // 0 = all
  double positive_weight = 1.0;
};

class Rng;

/// Greedy Gini tree over the given row multiset. Leaves hold
/// (positives + 1) / (rows + 2). Feature subsets, when requested, are drawn
/// from rng.
DecisionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       std::vector<std::size_t> rows, const TreeOptions& options,
                       Rng* rng = nullptr);

struct FittedModel {
  ModelSpec spec;
  LogisticFit logistic;
  std::vector<DecisionTree> trees;
  std::vector<std::string> columns;
  std::uint64_t path_id = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

/// Throws Error(single_class) when y has one class, Error(all_rows_dropped)
/// below spec.min_rows.
FittedModel fit_model(const LabeledMatrix& m, const ModelSpec& spec, std::uint64_t seed);

/// Throws Error(schema_mismatch) when X's columns differ from training.
Eigen::VectorXd predict_proba(const FittedModel& f, const Eigen::MatrixXd& X);

}  // namespace multiverse

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

#include "multiverse/models.hpp"

#include <algorithm>
#include <numeric>

#include "multiverse/error.hpp"
#include "multiverse/random.hpp"

namespace multiverse {

namespace {

constexpr double kFallbackL2 = 1e-6;

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Z(X.rows(), X.cols() + 1);
  Z.col(0).setOnes();
  Z.rightCols(X.cols()) = X;
  return Z;
}

double penalized_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& beta, double l2) {
  const Eigen::VectorXd eta = Z * beta;
  double nll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) nll += log1p_exp(eta(i)) - y(i) * eta(i);
  return nll + 0.5 * l2 * beta.tail(beta.size() - 1).squaredNorm();
}

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const LogisticOptions& options, std::vector<std::string>* warnings) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const Eigen::MatrixXd Z = with_intercept(X);
  const double scale = std::max<double>(1.0, static_cast<double>(n));

  double l2 = options.l2;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  // Start the intercept at the empirical log-odds.
  const double ybar = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
  beta(0) = std::log(ybar / (1.0 - ybar));

  LogisticFit fit;
  double objective = penalized_objective(Z, y, beta, l2);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::VectorXd eta = Z * beta;
    const Eigen::VectorXd mu = eta.unaryExpr([](double t) { return sigmoid(t); });
    Eigen::VectorXd grad = Z.transpose() * (mu - y);
    grad.tail(p) += l2 * beta.tail(p);
    fit.iterations = iter;
    if (grad.norm() / scale < options.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    const Eigen::VectorXd weight = (mu.array() * (1.0 - mu.array())).matrix();
    Eigen::MatrixXd H = Z.transpose() * weight.asDiagonal() * Z;
    H.diagonal().tail(p).array() += l2;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    const auto d = ldlt.vectorD().cwiseAbs();
    const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                          d.minCoeff() <= 1e-12 * std::max(1.0, d.maxCoeff());
    if (singular && l2 < kFallbackL2) {
      l2 = kFallbackL2;
      if (warnings) warnings->push_back("ill-conditioned design; using L2 strength 1e-6");
      objective = penalized_objective(Z, y, beta, l2);
      continue;
    }
    const Eigen::VectorXd step = ldlt.solve(-grad);

    double t = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double cand_obj = penalized_objective(Z, y, candidate, l2);
    int halvings = 0;
    while (!(cand_obj <= objective + 1e-12 * std::abs(objective)) && halvings < 40) {
      t *= 0.5;
      candidate = beta + t * step;
      cand_obj = penalized_objective(Z, y, candidate, l2);
      ++halvings;
    }
    if (!(cand_obj <= objective + 1e-12 * std::abs(objective))) break;
    const double change = (candidate - beta).lpNorm<Eigen::Infinity>();
    beta = candidate;
    objective = cand_obj;
    fit.iterations = iter + 1;
    if (change < 1e-14 * std::max(1.0, beta.lpNorm<Eigen::Infinity>())) break;
  }
  if (!fit.converged) {
    Eigen::VectorXd grad = Z.transpose() *
                           ((Z * beta).unaryExpr([](double t) { return sigmoid(t); }) - y);
    grad.tail(p) += l2 * beta.tail(p);
    fit.converged = grad.norm() / scale < options.gradient_tolerance;
  }
  fit.intercept = beta(0);
  fit.coefficients = beta.tail(p);
  fit.l2 = l2;
  fit.objective = objective;
  return fit;
}

double logistic_deviance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const LogisticFit& fit) {
  return 2.0 * logistic_objective(X, y, fit.intercept, fit.coefficients, 0.0);
}

LogisticFit fit_l1_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            double lambda, int max_iterations) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const double nd = static_cast<double>(n);

  Eigen::VectorXd mean = X.colwise().mean();
  Eigen::VectorXd sd(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    sd(j) = std::sqrt((X.col(j).array() - mean(j)).square().mean());
  }
  Eigen::MatrixXd Xs(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (sd(j) > 0.0) Xs.col(j) = (X.col(j).array() - mean(j)) / sd(j);
    else Xs.col(j).setZero();
  }

  const auto objective = [&](double b0, const Eigen::VectorXd& b) {
    return logistic_objective(Xs, y, b0, b, 0.0) / nd + lambda * b.lpNorm<1>();
  };

  const double ybar = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
  double b0 = std::log(ybar / (1.0 - ybar));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double current = objective(b0, beta);
  int outer = 0;
  bool converged = false;
  for (; outer < max_iterations; ++outer) {
    const Eigen::VectorXd eta = (Xs * beta).array() + b0;
    const Eigen::VectorXd mu = eta.unaryExpr([](double t) { return sigmoid(t); });
    const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).max(1e-5).matrix();
    const Eigen::VectorXd z = eta.array() + (y - mu).array() / w.array();

    double nb0 = b0;
    Eigen::VectorXd nbeta = beta;
    Eigen::VectorXd r = z.array() - nb0 - (Xs * nbeta).array();
    const double wsum = w.sum();
    Eigen::VectorXd a(p);
    for (Eigen::Index j = 0; j < p; ++j) a(j) = w.dot(Xs.col(j).cwiseAbs2()) / nd;
    for (int sweep = 0; sweep < 1000; ++sweep) {
      double max_change = 0.0;
      const double db0 = w.dot(r) / wsum;
      nb0 += db0;
      r.array() -= db0;
      max_change = std::abs(db0);
      for (Eigen::Index j = 0; j < p; ++j) {
        if (a(j) <= 0.0) continue;
        const double c = w.dot(Xs.col(j).cwiseProduct(r)) / nd + a(j) * nbeta(j);
        const double soft = c > lambda ? c - lambda : (c < -lambda ? c + lambda : 0.0);
        const double updated = soft / a(j);
        const double delta = updated - nbeta(j);
        if (delta != 0.0) {
          r -= delta * Xs.col(j);
          nbeta(j) = updated;
          max_change = std::max(max_change, std::abs(delta) * std::sqrt(a(j)));
        }
      }
      if (max_change < 1e-10) break;
    }
    // Damp the proximal-Newton step if it does not decrease the objective.
    double t = 1.0;
    double b0_try = nb0;
    Eigen::VectorXd beta_try = nbeta;
    double next = objective(b0_try, beta_try);
    for (int h = 0; h < 30 && next > current + 1e-14; ++h) {
      t *= 0.5;
      b0_try = b0 + t * (nb0 - b0);
      beta_try = beta + t * (nbeta - beta);
      next = objective(b0_try, beta_try);
    }
    const double change = std::max(std::abs(b0_try - b0),
                                   (beta_try - beta).lpNorm<Eigen::Infinity>());
    b0 = b0_try;
    beta = beta_try;
    current = next;
    if (change < 1e-9) {
      converged = true;
      break;
    }
  }

  LogisticFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  fit.intercept = b0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (sd(j) > 0.0 && beta(j) != 0.0) {
      fit.coefficients(j) = beta(j) / sd(j);
      fit.intercept -= beta(j) * mean(j) / sd(j);
    }
  }
  fit.objective = current;
  fit.iterations = outer;
  fit.converged = converged;
  return fit;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::logistic: return "logistic";
    case ModelFamily::tree: return "tree";
    case ModelFamily::forest: return "forest";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (!(l2 >= 0.0)) throw Error(Errc::invalid_spec, "L2 strength must be >= 0");
  if (max_depth < 1) throw Error(Errc::invalid_spec, "max_depth must be >= 1");
  if (min_leaf < 1) throw Error(Errc::invalid_spec, "min_leaf must be >= 1");
  if (n_trees < 1) throw Error(Errc::invalid_spec, "n_trees must be >= 1");
  if (features_per_split < 0) throw Error(Errc::invalid_spec, "features_per_split < 0");
  if (!(positive_weight > 0.0)) throw Error(Errc::invalid_spec, "positive_weight must be > 0");
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  ModelSpec s;
  const auto family = j.value("family", std::string("logistic"));
  if (family == "logistic") s.family = ModelFamily::logistic;
  else if (family == "tree") s.family = ModelFamily::tree;
  else if (family == "forest") s.family = ModelFamily::forest;
  else throw Error(Errc::config_invalid, "unknown model family " + family);
  s.l2 = j.value("l2", s.l2);
  s.max_depth = j.value("max_depth", s.max_depth);
  s.min_leaf = j.value("min_leaf", s.min_leaf);
  s.n_trees = j.value("n_trees", s.n_trees);
  s.features_per_split = j.value("features_per_split", s.features_per_split);
  s.positive_weight = j.value("positive_weight", s.positive_weight);
  s.min_rows = j.value("min_rows", s.min_rows);
  s.validate();
  return s;
}

nlohmann::json ModelSpec::to_json() const {
  return {{"family", std::string(to_string(family))},
          {"l2", l2},
          {"max_depth", max_depth},
          {"min_leaf", min_leaf},
          {"n_trees", n_trees},
          {"features_per_split", features_per_split},
          {"positive_weight", positive_weight},
          {"min_rows", min_rows}};
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    deepest = std::max(deepest, level[k]);
    if (nodes[k].feature >= 0) {
      level[static_cast<std::size_t>(nodes[k].left)] = level[k] + 1;
      level[static_cast<std::size_t>(nodes[k].right)] = level[k] + 1;
    }
  }
  return deepest;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t k = 0; k < a.nodes.size(); ++k) {
    const auto& x = a.nodes[k];
    const auto& z = b.nodes[k];
    if (x.feature != z.feature || x.threshold != z.threshold || x.left != z.left ||
        x.right != z.right || x.probability != z.probability || x.count != z.count) {
      return false;
    }
  }
  return true;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeOptions& options,
              Rng* rng)
      : X_(X), y_(y), options_(options), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  double gini_mass(double pos, double neg) const {
    const double wp = options_.positive_weight * pos;
    const double total = wp + neg;
    if (total <= 0.0) return 0.0;
    return total - (wp * wp + neg * neg) / total;  // total * (1 - p1^2 - p0^2)
  }

  std::vector<int> candidate_features() {
    const int p = static_cast<int>(X_.cols());
    std::vector<int> all(static_cast<std::size_t>(p));
    std::iota(all.begin(), all.end(), 0);
    const int k = options_.features_per_split;
    if (k <= 0 || k >= p || rng_ == nullptr) return all;
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(rng_->below(static_cast<std::uint64_t>(p - i)));
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    return all;
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double pos = 0.0;
    for (auto r : rows) pos += y_(static_cast<Eigen::Index>(r));
    const double n = static_cast<double>(rows.size());
    const double neg = n - pos;
    {
      auto& node = tree_.nodes.back();
      node.count = rows.size();
      node.probability = (pos + 1.0) / (n + 2.0);
    }
    if (depth >= options_.max_depth || rows.size() < 2 * options_.min_leaf || pos == 0.0 ||
        neg == 0.0 || X_.cols() == 0) {
      return index;
    }

    const double parent = gini_mass(pos, neg);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, double>> sorted(rows.size());
    for (int f : candidate_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(rows[i]);
        sorted[i] = {X_(r, f), y_(r)};
      }
      std::sort(sorted.begin(), sorted.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left_pos += sorted[i].second;
        if (sorted[i].first == sorted[i + 1].first) continue;
        const std::size_t left_n = i + 1;
        const std::size_t right_n = sorted.size() - left_n;
        if (left_n < options_.min_leaf || right_n < options_.min_leaf) continue;
        const double left_neg = static_cast<double>(left_n) - left_pos;
        const double gain = parent - gini_mass(left_pos, left_neg) -
                            gini_mass(pos - left_pos, neg - left_neg);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return index;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (X_(static_cast<Eigen::Index>(r), best_feature) <= best_threshold ? left : right)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int rr = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = rr;
    return index;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  TreeOptions options_;
  Rng* rng_;
  DecisionTree tree_;
};

}  // namespace

DecisionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       std::vector<std::size_t> rows, const TreeOptions& options, Rng* rng) {
  return TreeBuilder(X, y, options, rng).build(std::move(rows));
}

nlohmann::json FittedModel::to_json() const {
  nlohmann::json j = {{"spec", spec.to_json()},
                      {"columns", columns},
                      {"path_id", to_hex(path_id)},
                      {"seed", to_hex(seed)},
                      {"warnings", warnings}};
  if (spec.family == ModelFamily::logistic) {
    j["intercept"] = logistic.intercept;
    j["coefficients"] = std::vector<double>(logistic.coefficients.data(),
                                            logistic.coefficients.data() +
                                                logistic.coefficients.size());
    j["l2_used"] = logistic.l2;
  } else {
    auto trees_json = nlohmann::json::array();
    for (const auto& t : trees) {
      auto nodes = nlohmann::json::array();
      for (const auto& n : t.nodes) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.probability, n.count});
      }
      trees_json.push_back(nodes);
    }
    j["trees"] = trees_json;
  }
  return j;
}

FittedModel fit_model(const LabeledMatrix& m, const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (m.size() < spec.min_rows) {
    throw Error(Errc::all_rows_dropped, "training set has " + std::to_string(m.size()) +
                                            " rows (< " + std::to_string(spec.min_rows) + ")");
  }
  const double positives = m.y.sum();
  if (positives == 0.0 || positives == static_cast<double>(m.size())) {
    throw Error(Errc::single_class, "training labels contain one class");
  }
  const auto p = static_cast<int>(m.X.cols());
  if (spec.features_per_split > p && p > 0) {
    throw Error(Errc::invalid_spec, "features_per_split exceeds column count");
  }

  FittedModel f;
  f.spec = spec;
  f.columns = m.column_names;
  f.seed = seed;
  const auto n = static_cast<std::size_t>(m.X.rows());
  switch (spec.family) {
    case ModelFamily::logistic:
      f.logistic = fit_logistic(m.X, m.y, {spec.l2}, &f.warnings);
      break;
    case ModelFamily::tree: {
      TreeOptions opt{spec.max_depth, static_cast<std::size_t>(spec.min_leaf),
                      spec.features_per_split, spec.positive_weight};
      Rng rng(seed);
      std::vector<std::size_t> rows(n);
      std::iota(rows.begin(), rows.end(), 0);
      f.trees.push_back(grow_tree(m.X, m.y, std::move(rows), opt, &rng));
      break;
    }
    case ModelFamily::forest: {
      const int fps = spec.features_per_split > 0
                          ? spec.features_per_split
                          : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p))));
      TreeOptions opt{spec.max_depth, static_cast<std::size_t>(spec.min_leaf), fps,
                      spec.positive_weight};
      f.trees.reserve(static_cast<std::size_t>(spec.n_trees));
      for (int t = 0; t < spec.n_trees; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> rows(n);
        for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
        f.trees.push_back(grow_tree(m.X, m.y, std::move(rows), opt, &rng));
      }
      break;
    }
  }
  return f;
}

Eigen::VectorXd predict_proba(const FittedModel& f, const Eigen::MatrixXd& X) {
  if (static_cast<std::size_t>(X.cols()) != f.columns.size()) {
    throw Error(Errc::schema_mismatch, "expected " + std::to_string(f.columns.size()) +
                                           " columns, got " + std::to_string(X.cols()));
  }
  Eigen::VectorXd scores(X.rows());
  if (f.spec.family == ModelFamily::logistic) {
    const Eigen::VectorXd eta = (X * f.logistic.coefficients).array() + f.logistic.intercept;
    // Keep scores strictly inside (0,1) even when the linear predictor saturates.
    scores = eta.unaryExpr([](double t) { return std::clamp(sigmoid(t), 1e-15, 1.0 - 1e-15); });
    return scores;
  }
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto row = X.row(i);
    double total = 0.0;
    for (const auto& t : f.trees) total += t.predict(row);
    scores(i) = total / static_cast<double>(f.trees.size());
  }
  return scores;
}

}  // namespace multiverse

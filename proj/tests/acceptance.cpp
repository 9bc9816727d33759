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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "gradcheck.hpp"
#include "multiverse/config.hpp"
#include "multiverse/hash.hpp"
#include "multiverse/inconsistency.hpp"
#include "multiverse/metrics.hpp"
#include "multiverse/pipeline.hpp"
#include "multiverse/report.hpp"
#include "multiverse/runner.hpp"
#include "multiverse/synthgen.hpp"
#include "multiverse/universe.hpp"
#include "oracles.hpp"
#include "outdir.hpp"

using namespace multiverse;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const std::vector<RateTarget> kVrag = {{years_to_days(3.5), 0.15},
                                       {years_to_days(6.0), 0.31},
                                       {years_to_days(10.0), 0.43}};

PopulationSpec example_population() {
  return testutil::load_config("configs/example.json").synth->population;
}

// Logistic AUC on a fixed 70/30 split of subjects, all features, mean/mode imputation.
double logistic_auc(const Dataset& d, std::int64_t window) {
  OutcomeDefinition def;
  def.window_days = window;
  const auto frame = derive_outcome(d, def);
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < frame.size(); ++i) (i % 10 < 7 ? train : test).push_back(i);
  const auto tr = frame.take(train), te = frame.take(test);
  const auto imp = Imputer::fit(tr, ImputationMethod::mean_mode);
  const auto enc = Encoder::fit(imp.apply(tr, true));
  const auto mtr = enc.apply(imp.apply(tr, true)), mte = enc.apply(imp.apply(te, false));
  const auto fit = fit_model(mtr, ModelSpec{}, 0);
  return auc(predict_proba(fit, mte.X), mte.y);
}

// ---------------------------------------------------------------------------

Verdict base_rates() {
  const auto t0 = Clock::now();
  auto spec = example_population();
  spec.n = 20000;
  spec.hazard = calibrate_hazard(kVrag, sample_linear_predictors(spec, 100000, 1));
  const auto pop = generate_population(spec, 2024);
  bool ok = true;
  std::string detail;
  std::vector<double> aucs;
  for (const auto& t : kVrag) {
    OutcomeDefinition def;
    def.window_days = t.window_days;
    const double rate = derive_labels(pop.data, def).mean();
    const double sd = std::sqrt(t.cumulative_rate * (1 - t.cumulative_rate) / 20000.0);
    ok = ok && std::abs(rate - t.cumulative_rate) <= 2 * sd;
    detail += fmt("%.4f(target %.2f, 2sd %.4f) ", rate, t.cumulative_rate, 2 * sd);
    aucs.push_back(logistic_auc(pop.data, t.window_days));
  }
  const double spread = *std::max_element(aucs.begin(), aucs.end()) - *std::min_element(aucs.begin(), aucs.end());
  const double secs = seconds_since(t0);
  detail += fmt("AUC %.4f/%.4f/%.4f spread %.4f", aucs[0], aucs[1], aucs[2], spread);
  detail += fmt(" in %.1f s", secs);
  return {ok && spread > 0.01 && secs < 30.0, detail};
}

Verdict auc_oracle() {
  Rng rng(101);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.below(499));
    Eigen::VectorXd s(n), y(n);
    const auto levels = 1 + rng.below(50);
    for (Eigen::Index i = 0; i < n; ++i) {
      s(i) = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
      y(i) = rng.bernoulli(0.1 + 0.8 * rng.uniform()) ? 1.0 : 0.0;
    }
    y(0) = 1;
    y(1) = 0;
    std::vector<double> sv(s.data(), s.data() + n);
    std::vector<int> yv(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) yv[static_cast<std::size_t>(i)] = y(i) > 0.5;
    mismatches += auc(s, y) != oracle::auc(sv, yv);
  }
  return {mismatches == 0, fmt("%.0f/1000 instances differ from the pairwise count", mismatches)};
}

Verdict lift_oracle() {
  Rng rng(202);
  int mismatches = 0, bound_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(300));
    Eigen::VectorXd s(n), y(n);
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < n; ++i) {
      s(i) = static_cast<double>(rng.below(8));
      y(i) = rng.bernoulli(0.3) ? 1.0 : 0.0;
      ids.push_back("S" + std::to_string(rng.below(1000000)) + "-" + std::to_string(i));
    }
    y(0) = 1;
    const double k = std::max(1e-3, rng.uniform());
    const auto r = lift_at(s, y, k, &ids);
    std::vector<double> sv(s.data(), s.data() + n);
    std::vector<int> yv(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) yv[static_cast<std::size_t>(i)] = y(i) > 0.5;
    mismatches += std::abs(r.lift - oracle::lift(sv, yv, ids, k)) > 1e-12;
    bound_violations += r.lift > static_cast<double>(n) / y.sum() + 1e-12;
  }
  // Random scores at N = 10^4.
  Eigen::VectorXd s(10000), y(10000);
  for (Eigen::Index i = 0; i < 10000; ++i) {
    s(i) = rng.uniform();
    y(i) = rng.bernoulli(0.3) ? 1.0 : 0.0;
  }
  const double l2 = lift_at(s, y, 0.2).lift, l5 = lift_at(s, y, 0.5).lift;
  const bool random_ok = std::abs(l2 - 1) <= 0.1 && std::abs(l5 - 1) <= 0.1;
  return {mismatches == 0 && bound_violations == 0 && random_ok,
          fmt("%.0f mismatches, %.0f bound violations; random lift@0.2 %.3f, lift@0.5 %.3f", mismatches,
              bound_violations, l2, l5)};
}

Verdict impossibility() {
  Eigen::VectorXd s(1000), y(1000);
  std::vector<std::string> g;
  for (int i = 0; i < 1000; ++i) {
    const bool b = i >= 500;
    const int k = i % 500;
    g.push_back(b ? "B" : "A");
    s(i) = b ? 0.4 : 0.2;
    y(i) = (b ? k < 200 : k < 100) ? 1.0 : 0.0;
  }
  const auto r = fairness_report(s, y, g);
  const auto f = impossibility_check(r, 0.01, auc(s, y));
  const bool first = f.calibration_error <= 0.01 && r.gaps.balance_positive >= 0.15;

  Eigen::VectorXd s2(1000), y2(1000);
  std::vector<std::string> g2;
  for (int i = 0; i < 1000; ++i) {
    g2.push_back(i % 2 ? "A" : "B");
    y2(i) = (i / 2) % 5 == 0 ? 1.0 : 0.0;
    s2(i) = y2(i);
  }
  const auto r2 = fairness_report(s2, y2, g2);
  const auto f2 = impossibility_check(r2, 0.01, auc(s2, y2));
  const bool second = f2.kind == ImpossibilityKind::all_satisfied;
  return {first && second,
          fmt("calibrated 0.2/0.4: calibration error %.4f, balance gaps %.3f/%.3f; ", f.calibration_error,
              r.gaps.balance_positive, r.gaps.balance_negative) +
              "finding " + std::string(to_string(f.kind)) + "; perfect equal-rate scores: " +
              std::string(to_string(f2.kind))};
}

Verdict multiplicity_oracle() {
  Rng rng(303);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(20), p = 1 + rng.below(20);
    std::vector<std::vector<double>> rows(n, std::vector<double>(p));
    std::vector<std::string> subjects;
    for (std::size_t i = 0; i < n; ++i) {
      subjects.push_back("S" + std::to_string(i));
      for (auto& v : rows[i]) v = (static_cast<double>(rng.below(20)) + 0.5) / 20.0;
    }
    std::vector<PathScores> cols;
    for (std::size_t j = 0; j < p; ++j) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = rows[i][j];
      cols.push_back({j, 1000 + j, v, {}});
    }
    const auto m = build_score_matrix(subjects, cols);
    const auto base = static_cast<std::size_t>(rng.below(p));
    const double threshold = 0.2 + 0.6 * rng.uniform();
    const auto got = multiplicity_metrics(m, 1000 + base, threshold);
    const auto want = oracle::multiplicity(rows, base, threshold);
    mismatches += std::abs(got.ambiguity - want.ambiguity) > 1e-12 ||
                  std::abs(got.discrepancy - want.discrepancy) > 1e-12;
  }
  return {mismatches == 0, fmt("%.0f/1000 matrices differ from exhaustive enumeration", mismatches)};
}

Verdict enumeration_oracle() {
  Rng rng(404);
  int mismatches = 0, tested = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = oracle::random_universe(rng, 10000);
    const auto want = oracle::admissible_tuples(u);
    std::vector<PathConfig> got;
    try {
      got = enumerate_paths(u);
    } catch (const Error& e) {
      mismatches += !(want.empty() && e.code() == Errc::no_admissible_path);
      ++tested;
      continue;
    }
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      for (std::size_t k = 0; k < u.dimensions.size(); ++k) same = same && got[i].choice(u, k) == want[i][k];
    }
    mismatches += !same;
    ++tested;
  }
  // 10 x 10 x 10 x 10 universe.
  UniverseSpec big;
  for (Stage st : {Stage::imputation, Stage::resampling, Stage::model_family, Stage::model_seed}) {
    Dimension d{st, {}};
    for (int o = 0; o < 10; ++o) d.options.push_back({"opt" + std::to_string(o), nlohmann::json::object(), {}});
    big.dimensions.push_back(d);
  }
  std::set<std::uint64_t> ids;
  for (const auto& p : enumerate_paths(big)) ids.insert(p.path_id);
  return {mismatches == 0 && ids.size() == 10000,
          fmt("%.0f/%.0f universes differ; %.0f distinct ids over 10000 paths", mismatches, tested,
              static_cast<double>(ids.size()))};
}

Verdict determinism() {
  const auto cfg_path = testutil::source_dir() + "/tests/data/small.json";
  const auto bytes = testutil::read_file(cfg_path);
  const auto config = RunConfig::parse(bytes, testutil::source_dir() + "/tests/data");
  const auto a = testutil::fresh_dir("acc_a"), b = testutil::fresh_dir("acc_b"), c = testutil::fresh_dir("acc_c");
  const auto r1 = execute(config, 1);
  write_outputs(r1, a.string());
  write_outputs(execute(config, 1), b.string());
  write_outputs(execute(config, 8), c.string());
  const auto sa = testutil::snapshot(a);
  const bool twice = sa == testutil::snapshot(b);
  const bool workers = sa == testutil::snapshot(c);

  // Mutate both master seed digits and one whitespace byte.
  const auto h0 = manifest_hash(build_manifest(r1));
  int unchanged = 0, mutations = 0;
  const auto seed_pos = bytes.find("\"master_seed\": 99");
  for (std::size_t pos : {seed_pos + 15, seed_pos + 16, bytes.find("\"workers\": 2") + 10}) {
    std::string m = bytes;
    m[pos] = m[pos] == '9' ? '8' : (m[pos] == ' ' ? '\t' : '7');
    ++mutations;
    unchanged += manifest_hash(build_manifest(execute(RunConfig::parse(m), 1))) == h0;
  }
  return {twice && workers && unchanged == 0,
          std::string("repeat run ") + (twice ? "identical" : "DIFFERS") + ", workers 1 vs 8 " +
              (workers ? "identical" : "DIFFER") + fmt(", %.0f/%.0f byte mutations changed the manifest hash",
                                                       mutations - unchanged, mutations) +
              fmt(" (%.0f files compared)", static_cast<double>(sa.size()))};
}

Verdict seed_fork() {
  const auto t0 = Clock::now();
  auto j = nlohmann::json::parse(testutil::read_file(testutil::source_dir() + "/configs/example.json"));
  j["synth"]["population"]["n"] = 2000;
  j["universe"] = nlohmann::json::parse(R"({"dimensions":[
    {"name":"outcome_definition","options":[{"name":"reconviction_6y","parameters":{"window_years":6}}]},
    {"name":"model_family","options":[{"name":"forest","parameters":{"family":"forest","n_trees":100,"max_depth":5,"min_leaf":10}}]},
    {"name":"model_seed","options":[
      {"name":"s1","parameters":{"seed":1}},{"name":"s2","parameters":{"seed":2}},
      {"name":"s3","parameters":{"seed":3}},{"name":"s4","parameters":{"seed":4}},
      {"name":"s5","parameters":{"seed":5}}]}]})");
  j["rashomon"] = {{"metric", "auc"}, {"mode", "absolute"}, {"value", 0.5}};
  j["baseline_path"] = nlohmann::json::object();
  const auto run = execute(RunConfig::parse(j.dump()), 8);
  double max_range = 0.0;
  for (const auto& p : run.profiles) max_range = std::max(max_range, p.range);
  double lo = 1.0, hi = 0.0;
  for (const auto& m : run.metrics) {
    lo = std::min(lo, m.auc);
    hi = std::max(hi, m.auc);
  }
  const double secs = seconds_since(t0);
  return {run.ok_count() == 5 && max_range > 0.01 && hi - lo < 0.02 && secs < 60.0,
          fmt("5 seeds: max subject range %.4f, max AUC difference %.4f (AUC %.4f-%.4f)", max_range, hi - lo, lo,
              hi) +
              fmt(" in %.1f s", secs)};
}

Verdict binning() {
  const auto three = BinningScheme::equal_width("three_level", {"low", "medium", "high"});
  const auto five = BinningScheme::equal_width("five_level", {"very_low", "low", "average", "above_average", "high"});
  std::vector<int> flagged;
  int oracle_mismatch = 0;
  for (int t = 0; t <= 1000; ++t) {
    const double s = t / 1000.0;
    const auto d = bin_disagreement(s, three, five);
    // Interval arithmetic: count cuts at or below s.
    std::size_t ia = 0, ib = 0;
    for (double c : three.cuts) ia += c <= s;
    for (double c : five.cuts) ib += c <= s;
    const bool expect = std::abs(ia / 2.0 - ib / 4.0) > 1.0 / 5.0 + 1e-12;
    oracle_mismatch += d.disagree != expect;
    if (d.disagree) flagged.push_back(t);
  }
  const auto g = bin_disagreement(0.68, three, five);
  const bool has_068 = std::find(flagged.begin(), flagged.end(), 680) != flagged.end();
  std::string ranges;
  for (std::size_t i = 0; i < flagged.size(); ++i) {
    if (i == 0 || flagged[i] != flagged[i - 1] + 1) {
      if (i) ranges += fmt("%.3f] ", flagged[i - 1] / 1000.0);
      ranges += fmt("[%.3f,", flagged[i] / 1000.0);
    }
  }
  if (!flagged.empty()) ranges += fmt("%.3f]", flagged.back() / 1000.0);
  return {!flagged.empty() && has_068 && g.disagree && oracle_mismatch == 0,
          "disagreement set " + ranges + "; 0.68 -> " + g.label_a + " vs " + g.label_b +
              fmt(", %.0f grid points differ from interval arithmetic", oracle_mismatch)};
}

Verdict gradient() {
  Rng rng(505);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) worst = std::max(worst, gradcheck::relative_error(gradcheck::random_instance(rng)));
  return {worst < 1e-6, fmt("worst relative error %.3g over 100 instances", worst)};
}

Verdict end_to_end() {
  const auto t0 = Clock::now();
  const auto config = testutil::load_config("configs/example.json");
  const auto run = execute(config, 8);
  const auto dir = testutil::fresh_dir("acc_example");
  write_outputs(run, dir.string());
  const double secs = seconds_since(t0);
  const auto admissible_paths = run.universe.admissible_paths;
  const auto rashomon = static_cast<std::size_t>(std::count(run.matrix.admissible.begin(), run.matrix.admissible.end(), true));
  std::size_t abstain = 0;
  for (const auto& p : run.profiles) abstain += p.abstain;
  bool artifacts = true;
  for (const char* f : {"dataset.csv", "events.csv", "datasheet.txt", "manifest.json", "manifest.hash", "paths.csv",
                        "subjects.csv", "matrix.csv", "cards", "curves"}) {
    artifacts = artifacts && fs::exists(dir / f);
  }
  std::size_t cards = 0, curves = 0;
  for (const auto& e : fs::directory_iterator(dir / "cards")) cards += e.is_regular_file();
  for (const auto& e : fs::directory_iterator(dir / "curves")) curves += e.path().extension() == ".svg";
  artifacts = artifacts && cards == rashomon && curves >= 1;
  return {admissible_paths >= 500 && artifacts && abstain >= 1 && secs < 600.0 && config.synth->population.n == 5000,
          fmt("%.0f admissible paths (%.0f failed, %.0f in the Rashomon set), ", static_cast<double>(admissible_paths),
              static_cast<double>(run.results.size() - run.ok_count()), static_cast<double>(rashomon)) +
              fmt("%.0f/%.0f subjects abstain, %.0f cards, ", static_cast<double>(abstain),
                  static_cast<double>(run.profiles.size()), static_cast<double>(cards)) +
              fmt("%.1f s on 8 workers (%.0f hardware threads)", secs,
                  static_cast<double>(std::thread::hardware_concurrency()))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"base rates at 3.5y/6y/10y and AUC spread", base_rates},
      {"AUC equals pairwise oracle", auc_oracle},
      {"lift equals top-n oracle", lift_oracle},
      {"calibration/balance impossibility", impossibility},
      {"multiplicity equals exhaustive enumeration", multiplicity_oracle},
      {"path enumeration oracle and id uniqueness", enumeration_oracle},
      {"determinism", determinism},
      {"seed-fork forest", seed_fork},
      {"3-bin vs 5-bin disagreement", binning},
      {"logistic gradient check", gradient},
      {"end-to-end example multiverse", end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}

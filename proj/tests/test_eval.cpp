#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sparsegd/dataset_gen.hpp"
#include "sparsegd/eval.hpp"
#include "sparsegd/rng.hpp"

using namespace sparsegd;

namespace {

Dataset class_data(std::uint64_t n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = n;
  spec.informative = 5;
  spec.noise_features = 20;
  spec.noise_p = 0.2;
  spec.label_noise = 0.1;
  spec.seed = seed;
  return generate_synthetic(spec).examples;
}

}  // namespace

TEST_CASE("auc on pinned examples") {
  CHECK(auc_score({0.9, 0.8, 0.2, 0.1}, {1, 1, -1, -1}) == 1.0);
  CHECK(auc_score({0.1, 0.2, 0.8, 0.9}, {1, 1, -1, -1}) == 0.0);
  CHECK(auc_score({0.4, 0.4, 0.4}, {1, -1, 1}) == 0.5);
  // one tied positive/negative pair contributes half a win
  CHECK(auc_score({2, 1, 1, 0}, {1, 1, -1, -1}) ==
        doctest::Approx(0.875).epsilon(1e-15));
  CHECK_THROWS_AS(auc_score({1, 2}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(auc_score({}, {}), std::invalid_argument);
}

TEST_CASE("auc agrees with the quadratic count under heavy ties") {
  auto rng = make_engine(3, "sample");
  std::uniform_int_distribution<int> pool(0, 4);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int rep = 0; rep < 60; ++rep) {
    std::size_t n = 2 + rep % 37;
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = pool(rng) / 2.0;
      y[i] = coin(rng) ? 1.0 : -1.0;
    }
    y[0] = 1.0;
    y[1] = -1.0;  // both classes present
    CHECK(std::abs(auc_score(s, y) - oracles::brute_auc(s, y)) <= 1e-12);
  }
}

TEST_CASE("accuracy treats a zero score as a negative prediction") {
  CHECK(accuracy_score({0.0}, {-1}) == 1.0);
  CHECK(accuracy_score({0.0}, {1}) == 0.0);
  CHECK(accuracy_score({1.0, -2.0, 0.5, -0.1}, {1, -1, -1, 1}) == 0.5);
}

TEST_CASE("mean loss and dataset scoring") {
  std::vector<double> s{0.5, -1.0};
  std::vector<double> y{1.0, -1.0};
  double want = 0.5 * (loss_value(LossKind::logistic, 0.5, 1.0) +
                       loss_value(LossKind::logistic, -1.0, -1.0));
  CHECK(mean_loss_score(LossKind::logistic, s, y) ==
        doctest::Approx(want).epsilon(1e-15));

  Dataset ds;
  SparseExample a;
  a.label = 1.0;
  a.features = {{0, 2.0}, {3, 1.0}};
  SparseExample b;
  b.label = -1.0;
  b.features = {{1, 1.0}};
  ds = {a, b};
  std::map<std::uint64_t, double> w{{0, 0.5}, {3, -1.0}};
  std::vector<double> scores, labels;
  score_dataset(ds, w, &scores, &labels);
  REQUIRE(scores.size() == 2);
  CHECK(scores[0] == 0.0);  // 2*0.5 - 1*1
  CHECK(scores[1] == 0.0);  // no overlap with w
  CHECK(labels == std::vector<double>{1.0, -1.0});
}

TEST_CASE("sweep rows are reproducible single-config runs, sorted by nnz") {
  Dataset all = class_data(400, 9);
  Dataset train_set(all.begin(), all.begin() + 300);
  Dataset eval_set(all.begin() + 300, all.end());

  LearnerConfig base;
  base.loss = LossKind::logistic;
  base.eta = 0.1;
  base.K = 5;
  base.passes = 2;
  std::vector<double> grid{1e-3, 1e-2};
  auto rows = sweep_frontier(train_set, eval_set, base, SweepAxis::gravity,
                             grid, 2);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK_FALSE(rows[i].failed);
    if (i) CHECK(rows[i - 1].nnz <= rows[i].nnz);
  }

  // the baseline row is the g = 0 run and carries ratio 1 against itself
  const SweepPoint* baseline = nullptr;
  for (const auto& r : rows)
    if (r.value == 0.0) baseline = &r;
  REQUIRE(baseline != nullptr);
  CHECK(baseline->auc_ratio == doctest::Approx(1.0).epsilon(1e-15));

  // each row is exactly a train() + score under that config
  for (const auto& r : rows) {
    LearnerConfig cfg = base;
    cfg.g = r.value;
    TrainResult tr = train(train_set, cfg);
    std::vector<double> scores, labels;
    score_dataset(eval_set, tr.final_weights, &scores, &labels);
    CHECK(r.nnz == tr.final_weights.size());
    CHECK(r.auc == auc_score(scores, labels));
    CHECK(r.accuracy == accuracy_score(scores, labels));
    CHECK(r.mean_loss == mean_loss_score(base.loss, scores, labels));
    CHECK(r.auc_ratio == doctest::Approx(r.auc / baseline->auc).epsilon(1e-15));
  }

  // parallel and serial sweeps agree exactly
  auto rows1 = sweep_frontier(train_set, eval_set, base, SweepAxis::gravity,
                              grid, 1);
  REQUIRE(rows1.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows1[i].value == rows[i].value);
    CHECK(rows1[i].auc == rows[i].auc);
    CHECK(rows1[i].nnz == rows[i].nnz);
  }
}

TEST_CASE("sweep over the threshold axis varies theta") {
  Dataset all = class_data(200, 10);
  Dataset train_set(all.begin(), all.begin() + 150);
  Dataset eval_set(all.begin() + 150, all.end());
  LearnerConfig base;
  base.loss = LossKind::square;
  base.eta = 0.05;
  base.g = 1e-3;
  base.K = 2;
  auto rows = sweep_frontier(train_set, eval_set, base, SweepAxis::threshold,
                             {0.01, 0.1}, 1);
  REQUIRE(rows.size() == 3);
  bool saw_zero = false;
  for (const auto& r : rows) saw_zero = saw_zero || r.value == 0.0;
  CHECK(saw_zero);
}

TEST_CASE("a diverging sweep point is reported, not fatal") {
  Dataset all = class_data(100, 11);
  for (auto& e : all)
    for (auto& [j, x] : e.features) x *= 1e6;
  Dataset train_set(all.begin(), all.begin() + 80);
  Dataset eval_set(all.begin() + 80, all.end());
  LearnerConfig base;
  base.loss = LossKind::square;
  base.eta = 1.0;
  base.passes = 3;
  auto rows =
      sweep_frontier(train_set, eval_set, base, SweepAxis::gravity, {1e-3}, 1);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.failed);
    CHECK_FALSE(r.error.empty());
  }
}

TEST_CASE("cross validation: grid, determinism, and the selection rule") {
  Dataset ds = class_data(240, 12);
  LearnerConfig base;
  base.loss = LossKind::logistic;
  base.K = 5;

  CvPlan plan;
  plan.folds = 3;
  plan.eta_grid = {0.05, 0.2};
  plan.g_grid = {0.0, 2e-3, 2e-2};
  plan.metric = CvMetric::accuracy;
  plan.within = 0.02;
  plan.seed = 4;

  CvOutcome o1 = cross_validate(ds, base, plan, 1);
  CvOutcome o2 = cross_validate(ds, base, plan, 3);
  REQUIRE(o1.rows.size() == 6);
  REQUIRE(o2.rows.size() == 6);
  for (std::size_t i = 0; i < o1.rows.size(); ++i) {
    CHECK(o1.rows[i].metric_mean == o2.rows[i].metric_mean);
    CHECK(o1.rows[i].metric_se == o2.rows[i].metric_se);
    CHECK(o1.rows[i].nnz_mean == o2.rows[i].nnz_mean);
    CHECK(o1.rows[i].cfg.eta == o2.rows[i].cfg.eta);
    CHECK(o1.rows[i].cfg.g == o2.rows[i].cfg.g);
  }
  CHECK(o1.best_row == o2.best_row);
  CHECK(o1.best.eta == o1.rows[o1.best_row].cfg.eta);
  CHECK(o1.best.g == o1.rows[o1.best_row].cfg.g);

  // replay the documented selection rule on the returned rows
  double best_mean = -1e300;
  for (const auto& r : o1.rows)
    if (!r.failed) best_mean = std::max(best_mean, r.metric_mean);
  double cutoff = best_mean - plan.within * std::abs(best_mean);
  std::size_t pick = o1.rows.size();
  for (std::size_t i = 0; i < o1.rows.size(); ++i) {
    const CvRow& r = o1.rows[i];
    if (r.failed || r.metric_mean < cutoff) continue;
    if (pick == o1.rows.size() || r.nnz_mean < o1.rows[pick].nnz_mean ||
        (r.nnz_mean == o1.rows[pick].nnz_mean &&
         r.cfg.g > o1.rows[pick].cfg.g))
      pick = i;
  }
  CHECK(o1.best_row == pick);

  // an empty grid falls back to the base config
  CvPlan empty;
  empty.folds = 3;
  empty.seed = 4;
  LearnerConfig eb = base;
  eb.eta = 0.1;
  eb.g = 1e-3;
  CvOutcome oe = cross_validate(ds, eb, empty, 1);
  REQUIRE(oe.rows.size() == 1);
  CHECK(oe.rows[0].cfg.eta == 0.1);
  CHECK(oe.rows[0].cfg.g == 1e-3);
}

TEST_CASE("mean-loss metric is negated so larger stays better") {
  Dataset ds = class_data(120, 13);
  LearnerConfig base;
  base.loss = LossKind::square;
  base.eta = 0.02;
  CvPlan plan;
  plan.folds = 3;
  plan.metric = CvMetric::mean_loss;
  plan.seed = 1;
  CvOutcome o = cross_validate(ds, base, plan, 1);
  REQUIRE(o.rows.size() == 1);
  CHECK(o.rows[0].metric_mean < 0.0);
}

TEST_CASE("csv writers emit one header and one line per row") {
  Dataset all = class_data(120, 14);
  Dataset train_set(all.begin(), all.begin() + 90);
  Dataset eval_set(all.begin() + 90, all.end());
  LearnerConfig base;
  base.loss = LossKind::logistic;
  base.eta = 0.1;
  auto rows = sweep_frontier(train_set, eval_set, base, SweepAxis::gravity,
                             {1e-3}, 1);
  std::ostringstream out;
  write_sweep_csv(out, SweepAxis::gravity, rows);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "g,nnz,auc,accuracy,mean_loss,auc_ratio,failed");
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  CHECK(n == rows.size());

  CvPlan plan;
  plan.folds = 3;
  plan.seed = 2;
  CvOutcome o = cross_validate(all, base, plan, 1);
  std::ostringstream cv;
  write_cv_csv(cv, o);
  std::istringstream cin2(cv.str());
  std::getline(cin2, line);
  CHECK(line.substr(0, 4) == "eta,");
  n = 0;
  while (std::getline(cin2, line))
    if (!line.empty()) ++n;
  CHECK(n == o.rows.size());
}

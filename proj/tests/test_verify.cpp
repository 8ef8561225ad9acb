#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sparsegd/dataset_gen.hpp"
#include "sparsegd/rng.hpp"
#include "sparsegd/verify.hpp"

using namespace sparsegd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Dataset noisy_regression(std::uint64_t n, std::uint64_t d, std::uint64_t seed) {
  auto rng = make_engine(seed, "truth");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> truth(d);
  for (auto& t : truth) t = gauss(rng);
  auto xr = make_engine(seed, "x");
  Dataset ds;
  for (std::uint64_t i = 0; i < n; ++i) {
    SparseExample e;
    double y = 0.0;
    for (std::uint64_t j = 0; j < d; ++j) {
      double x = gauss(xr);
      if (x == 0.0) continue;
      e.features.emplace_back(j, x);
      y += truth[j] * x;
    }
    e.label = y + 0.5 * gauss(xr);
    ds.push_back(std::move(e));
  }
  return ds;
}

Dataset noisy_classification(std::uint64_t n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n = n;
  spec.informative = 5;
  spec.noise_features = 3;
  spec.noise_p = 0.3;
  spec.label_noise = 0.25;
  spec.seed = seed;
  return generate_synthetic(spec).examples;
}

// safe learning rate for the square-loss guarantees on this data
double safe_eta(const Dataset& ds, double slack = 0.25) {
  double c = scan_meta(ds).max_norm;
  return slack / (2.0 * c * c);
}

}  // namespace

TEST_CASE("record_run captures exactly what a hand replay produces") {
  Dataset ds = noisy_regression(14, 3, 3);
  LearnerConfig cfg;
  cfg.loss = LossKind::square;
  cfg.eta = safe_eta(ds);
  cfg.g = 0.01;
  cfg.theta = 0.6;
  cfg.K = 2;
  cfg.passes = 1;
  RecordedRun run = record_run(ds, cfg);

  REQUIRE(run.steps == 14);
  REQUIRE(run.step_loss.size() == 14);
  REQUIRE(run.presented.size() == 14);

  // independent dense replay
  std::vector<double> w(run.d, 0.0);
  std::vector<double> mean(run.d, 0.0);
  std::size_t shrink_idx = 0;
  for (std::uint64_t i = 1; i <= 15; ++i) {
    if (i % cfg.K == 0) {
      double a = cfg.eta * cfg.K * cfg.g;
      double inband = 0.0;
      std::vector<std::uint64_t> exceeding;
      for (std::uint64_t j = 0; j < run.d; ++j) {
        w[j] = truncate_gravity(w[j], a, cfg.theta);
        if (std::abs(w[j]) <= cfg.theta)
          inband += std::abs(w[j]);
        else
          exceeding.push_back(j);
      }
      REQUIRE(shrink_idx < run.shrinks.size());
      const ShrinkSnapshot& s = run.shrinks[shrink_idx++];
      CHECK(s.trial == i);
      CHECK(s.amount == a);
      CHECK(s.inband_mass == doctest::Approx(inband).epsilon(1e-15));
      CHECK(s.exceeding == exceeding);
    }
    if (i == 15) break;  // the trailing sweep exists only as a snapshot
    const SparseExample& ex = ds[i - 1];
    double p = 0.0;
    for (const auto& [j, x] : ex.features) p += w[j] * x;
    CHECK(run.step_loss[i - 1] ==
          doctest::Approx(loss_value(cfg.loss, p, ex.label)).epsilon(1e-15));
    for (std::uint64_t j = 0; j < run.d; ++j)
      mean[j] += (w[j] - mean[j]) / static_cast<double>(i);
    double dv = loss_derivative(cfg.loss, p, ex.label);
    for (const auto& [j, x] : ex.features) w[j] -= cfg.eta * dv * x;
  }
  CHECK(shrink_idx == run.shrinks.size());  // 2,4,...,14 (15 is odd)
  for (std::uint64_t j = 0; j < run.d; ++j) {
    CHECK(run.final_weights[j] == doctest::Approx(w[j]).epsilon(1e-14));
    CHECK(run.mean_prediction_states[j] ==
          doctest::Approx(mean[j]).epsilon(1e-12));
  }
}

TEST_CASE("record_run keeps the trailing sweep when it lands on the grid") {
  Dataset ds = noisy_regression(9, 2, 4);
  LearnerConfig cfg;
  cfg.loss = LossKind::square;
  cfg.eta = safe_eta(ds);
  cfg.g = 0.01;
  cfg.K = 5;
  RecordedRun run = record_run(ds, cfg);  // T = 9, sweeps at 5 and 10
  REQUIRE(run.shrinks.size() == 2);
  CHECK(run.shrinks[0].trial == 5);
  CHECK(run.shrinks[1].trial == 10);
}

TEST_CASE("sampled transitions line up with the presented stream") {
  Dataset ds = noisy_classification(40, 7);
  LearnerConfig cfg;
  cfg.loss = LossKind::logistic;
  cfg.eta = 0.1;
  cfg.g = 1e-3;
  cfg.K = 3;
  cfg.passes = 2;
  cfg.seed = 11;
  RecordedRun a = record_run(ds, cfg, 12);
  RecordedRun b = record_run(ds, cfg, 12);
  REQUIRE(a.step_samples.size() == 12);
  for (std::size_t k = 0; k < 12; ++k) {
    const StepSnapshot& s = a.step_samples[k];
    CHECK(s.trial == b.step_samples[k].trial);  // seeded, reproducible
    CHECK(s.trial >= 1);
    CHECK(s.trial < a.steps);
    if (k) CHECK(s.trial > a.step_samples[k - 1].trial);
    CHECK(s.w_before.size() == a.d);
    CHECK(s.w_after.size() == a.d);
    CHECK(s.ex.features == a.presented[s.trial - 1].features);
    CHECK(s.eta == cfg.eta);
    double want = (s.trial + 1) % cfg.K == 0
                      ? static_cast<double>(cfg.K) * cfg.g
                      : 0.0;
    CHECK(s.gravity == want);
  }
  // asking for more samples than transitions caps out
  RecordedRun c = record_run(ds, cfg, 1000000);
  CHECK(c.step_samples.size() == c.steps - 1);
}

TEST_CASE("average-regret guarantees hold across configs and comparators") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Dataset ds = noisy_classification(60, 100 + seed);
    std::uint64_t d = scan_meta(ds).max_feature_index + 1;
    for (LossKind loss :
         {LossKind::square, LossKind::logistic, LossKind::hinge}) {
      LearnerConfig cfg;
      cfg.loss = loss;
      cfg.eta = loss == LossKind::square ? safe_eta(ds) : 0.1;
      cfg.g = 5e-3;
      cfg.theta = seed == 2 ? 0.4 : kInf;
      cfg.K = 1 + seed % 3;
      cfg.passes = 2;
      cfg.seed = seed;
      RecordedRun run = record_run(ds, cfg, 10);

      std::vector<std::vector<double>> comparators;
      comparators.push_back({});  // all zeros
      if (loss != LossKind::hinge && d <= 64)
        comparators.push_back(l1_oracle(ds, loss, cfg.g, d).w);
      auto rng = make_engine(seed, "comparator");
      std::normal_distribution<double> gauss(0.0, 0.3);
      std::vector<double> rnd(d);
      for (auto& v : rnd) v = gauss(rng);
      comparators.push_back(rnd);

      for (const auto& wbar : comparators) {
        for (std::uint64_t T : {run.steps / 2, run.steps}) {
          GuaranteeReport rep = check_regret(run, wbar, T, "x");
          CAPTURE(to_string(loss));
          CAPTURE(T);
          CHECK(rep.holds);
          CHECK(rep.margin == rep.rhs - rep.lhs);
          if (loss == LossKind::square) {
            GuaranteeReport sq = check_regret_square(run, wbar, T, "x");
            CHECK(sq.holds);
          }
        }
        GuaranteeReport lem = check_step_inequality(run, wbar, "x");
        CHECK(lem.holds);
      }
    }
  }
}

TEST_CASE("check_regret agrees with a direct transcription of the bound") {
  Dataset ds = noisy_classification(30, 17);
  LearnerConfig cfg;
  cfg.loss = LossKind::square;
  cfg.eta = safe_eta(ds);
  cfg.g = 2e-3;
  cfg.theta = 0.5;
  cfg.K = 2;
  RecordedRun run = record_run(ds, cfg);
  std::uint64_t d = scan_meta(ds).max_feature_index + 1;
  std::vector<double> wbar(d, 0.1);
  const std::uint64_t T = run.steps;
  GuaranteeReport rep = check_regret(run, wbar, T, "const");

  auto [A, B] = assumption_constants(cfg.loss, run.C);
  double factor = 1.0 - 0.5 * A * cfg.eta;
  double loss_sum = 0.0;
  for (std::uint64_t i = 0; i < T; ++i) loss_sum += run.step_loss[i];
  double wbar_l1 = 0.0, wbar_l2sq = 0.0;
  for (double v : wbar) {
    wbar_l1 += std::abs(v);
    wbar_l2sq += v * v;
  }
  double lhs_g = 0.0, rhs_g = 0.0;
  for (const auto& s : run.shrinks) {
    if (s.trial < 2 || s.trial > T + 1) continue;
    lhs_g += cfg.K * cfg.g * s.inband_mass;
    double kept = wbar_l1;
    for (std::uint64_t j : s.exceeding) kept -= std::abs(wbar[j]);
    rhs_g += cfg.K * cfg.g * kept;
  }
  double comp = 0.0;
  for (const auto& ex : run.presented) {
    double p = 0.0;
    for (const auto& [j, x] : ex.features) p += wbar[j] * x;
    comp += loss_value(cfg.loss, p, ex.label);
  }
  double lhs = (factor * loss_sum + lhs_g) / T;
  double rhs = 0.5 * cfg.eta * B + wbar_l2sq / (2.0 * cfg.eta * T) +
               (comp + rhs_g) / T;
  CHECK(rep.lhs == doctest::Approx(lhs).epsilon(1e-13));
  CHECK(rep.rhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("tampering with a recorded run is caught") {
  Dataset ds = noisy_classification(50, 23);
  LearnerConfig cfg;
  cfg.loss = LossKind::square;
  cfg.eta = safe_eta(ds);
  cfg.g = 1e-3;
  cfg.K = 2;
  RecordedRun run = record_run(ds, cfg, 8);

  RecordedRun fat = run;
  for (double& l : fat.step_loss) l = l * 100.0 + 1.0;
  CHECK_FALSE(check_regret(fat, {}, fat.steps, "zero").holds);
  CHECK_FALSE(check_regret_square(fat, {}, fat.steps, "zero").holds);

  RecordedRun bent = run;
  for (auto& s : bent.step_samples)
    for (double& v : s.w_after) v = v * 10.0 + 2.0;
  CHECK_FALSE(check_step_inequality(bent, {}, "zero").holds);
}

TEST_CASE("guarantee checks refuse configurations they do not cover") {
  Dataset ds = noisy_classification(20, 29);
  LearnerConfig base;
  base.loss = LossKind::square;
  base.eta = safe_eta(ds);
  base.g = 1e-3;

  {
    LearnerConfig c = base;
    c.rule = Rule::subgradient_l1;
    RecordedRun run = record_run(ds, c);
    CHECK_THROWS_AS(check_regret(run, {}, run.steps, "z"), ConfigError);
  }
  {
    LearnerConfig c = base;
    c.lr_decay_power = 0.5;
    RecordedRun run = record_run(ds, c);
    CHECK_THROWS_AS(check_regret(run, {}, run.steps, "z"), ConfigError);
  }
  {
    LearnerConfig c = base;
    c.loss = LossKind::logistic;
    c.eta = 0.1;
    RecordedRun run = record_run(ds, c);
    CHECK_THROWS_AS(check_regret_square(run, {}, run.steps, "z"), ConfigError);
  }
  {
    RecordedRun run = record_run(ds, base);
    run.cfg.eta = 1.0;  // way past 1/(2C^2) here
    CHECK_THROWS_AS(check_regret_square(run, {}, run.steps, "z"), ConfigError);
  }
  {
    RecordedRun run = record_run(ds, base);
    CHECK_THROWS_AS(check_regret(run, {}, 0, "z"), ConfigError);
    CHECK_THROWS_AS(check_regret(run, {}, run.steps + 1, "z"), ConfigError);
    CHECK_THROWS_AS(check_step_inequality(run, {}, "z"), ConfigError);
  }
}

TEST_CASE("l1 objective and optimality measure on a hand example") {
  Dataset ds;
  SparseExample e;
  e.label = 1.0;
  e.features = {{0, 1.0}};
  ds.push_back(e);
  std::vector<double> w{0.5};
  CHECK(l1_objective(ds, LossKind::square, 0.2, w) ==
        doctest::Approx(0.25 + 0.1).epsilon(1e-15));
  // gradient at w: 2*(0.5-1) = -1; subgradient condition wants -1 + 0.2 = -0.8
  CHECK(l1_kkt_violation(ds, LossKind::square, 0.2, w) ==
        doctest::Approx(0.8).epsilon(1e-12));
  // the actual minimiser: w = soft(1, g/2)... check via the oracle instead
  L1OracleResult opt = l1_oracle(ds, LossKind::square, 0.2, 1);
  CHECK(opt.w[0] == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(opt.kkt_violation <= 1e-6);
}

TEST_CASE("square-loss oracle: orthogonal design has a closed form") {
  Dataset ds;
  auto add = [&](double y, std::uint64_t j) {
    SparseExample e;
    e.label = y;
    e.features = {{j, 1.0}};
    ds.push_back(e);
  };
  add(2.0, 0);
  add(2.0, 0);
  add(-1.0, 1);
  add(-1.0, 1);
  // per-coordinate problem: (1/2)(w_j - y_j)^2 * ... soft threshold at g
  L1OracleResult r = l1_oracle(ds, LossKind::square, 0.5, 2);
  CHECK(r.w[0] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(r.w[1] == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(r.kkt_violation <= 1e-6);
  CHECK(r.objective ==
        doctest::Approx(l1_objective(ds, LossKind::square, 0.5, r.w))
            .epsilon(1e-15));

  // large enough g kills every coordinate
  L1OracleResult z = l1_oracle(ds, LossKind::square, 10.0, 2);
  CHECK(z.w == std::vector<double>{0.0, 0.0});
}

TEST_CASE("square-loss oracle matches least squares when g = 0") {
  Dataset ds = noisy_regression(40, 6, 31);
  L1OracleResult r = l1_oracle(ds, LossKind::square, 0.0, 6);
  std::vector<double> ls = oracles::least_squares(ds, 6);
  for (std::uint64_t j = 0; j < 6; ++j)
    CHECK(std::abs(r.w[j] - ls[j]) <= 1e-5);
  CHECK(r.kkt_violation <= 1e-6);
}

TEST_CASE("oracle results are local minima under perturbation") {
  Dataset dsr = noisy_regression(50, 5, 37);
  Dataset dsc = noisy_classification(80, 41);
  struct Case {
    const Dataset* ds;
    LossKind loss;
    double g;
  };
  std::uint64_t dc = scan_meta(dsc).max_feature_index + 1;
  for (const Case& c : {Case{&dsr, LossKind::square, 0.05},
                        Case{&dsc, LossKind::logistic, 0.01}}) {
    std::uint64_t d = c.ds == &dsr ? 5 : dc;
    L1OracleResult r = l1_oracle(*c.ds, c.loss, c.g, d);
    CHECK(r.kkt_violation <= 1e-6);
    double base = r.objective;
    auto rng = make_engine(43, "comparator");
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < 40; ++t) {
      std::vector<double> w = r.w;
      double scale = t % 2 ? 1e-3 : 1e-2;
      for (auto& v : w) v += scale * gauss(rng);
      CHECK(l1_objective(*c.ds, c.loss, c.g, w) >= base - 1e-10);
    }
    for (std::uint64_t j = 0; j < d; ++j) {
      for (double dlt : {1e-4, -1e-4}) {
        std::vector<double> w = r.w;
        w[j] += dlt;
        CHECK(l1_objective(*c.ds, c.loss, c.g, w) >= base - 1e-12);
      }
    }
  }
}

TEST_CASE("oracle input gates") {
  Dataset ds = noisy_regression(10, 3, 47);
  CHECK_THROWS_AS(l1_oracle(ds, LossKind::hinge, 0.1, 3), ConfigError);
  CHECK_THROWS_AS(l1_oracle(ds, LossKind::square, -0.1, 3), ConfigError);
  CHECK_THROWS_AS(l1_oracle(ds, LossKind::square, 0.1, 65), ConfigError);
  CHECK_THROWS_AS(l1_oracle(Dataset{}, LossKind::square, 0.1, 3), ConfigError);
}

TEST_CASE("stochastic check: averaged iterate approaches the batch optimum") {
  SyntheticSpec spec;
  spec.n = 20;
  spec.informative = 4;
  spec.noise_features = 0;
  spec.label_noise = 0.3;
  spec.seed = 5;
  Dataset ds = generate_synthetic(spec).examples;

  LearnerConfig cfg;
  cfg.loss = LossKind::square;
  cfg.eta = 0.5 * safe_eta(ds);
  cfg.g = 0.05;
  cfg.K = 1;
  cfg.sampling = Sampling::uniform_random;
  cfg.seed = 77;

  StochasticReport rep = check_stochastic(ds, cfg, 30000, 4, 0.2);
  CHECK(rep.seeds == 4);
  CHECK(rep.bound_holds);
  CHECK(rep.converged);
  CHECK(rep.rel_gap >= -1e-9);
  CHECK(rep.mean_objective >= rep.oracle_objective - 1e-9);

  // gates
  LearnerConfig bad = cfg;
  bad.K = 2;
  CHECK_THROWS_AS(check_stochastic(ds, bad, 100, 2), ConfigError);
  bad = cfg;
  bad.theta = 1.0;
  CHECK_THROWS_AS(check_stochastic(ds, bad, 100, 2), ConfigError);
  bad = cfg;
  bad.sampling = Sampling::sequential;
  CHECK_THROWS_AS(check_stochastic(ds, bad, 100, 2), ConfigError);
  CHECK_THROWS_AS(check_stochastic(ds, cfg, 100, 1), ConfigError);
  CHECK_THROWS_AS(check_stochastic(ds, cfg, 0, 2), ConfigError);
}

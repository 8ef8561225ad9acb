#include "sparsegd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "sparsegd/rng.hpp"

namespace sparsegd {

namespace {

double wb(const std::vector<double>& w, std::uint64_t j) {
  return j < w.size() ? w[j] : 0.0;
}

double dense_dot(const std::vector<double>& w, const SparseExample& ex) {
  double s = 0.0;
  for (const auto& [j, x] : ex.features) s += wb(w, j) * x;
  return s;
}

double l1_norm(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

double l2_sq(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

void require_checkable(const LearnerConfig& cfg, bool need_square) {
  if (cfg.rule != Rule::truncated_gradient)
    throw ConfigError("guarantee checks cover the truncated_gradient rule");
  if (!cfg.constant_rate())
    throw ConfigError("guarantee checks need a constant learning rate");
  if (cfg.vw_normalize || cfg.vw_clip)
    throw ConfigError("guarantee checks need unadjusted predictions");
  if (need_square && cfg.loss != LossKind::square)
    throw ConfigError("this bound is specific to the square loss");
}

}  // namespace

RecordedRun record_run(const Dataset& ds, const LearnerConfig& cfg,
                       std::uint64_t step_samples) {
  cfg.validate();
  if (ds.empty()) throw ConfigError("empty dataset");
  RecordedRun run;
  run.cfg = cfg;
  DatasetMeta meta = scan_meta(ds);
  run.d = meta.any_features ? meta.max_feature_index + 1 : 1;
  const std::uint64_t T = ds.size() * cfg.passes;
  run.steps = T;
  run.step_loss.reserve(T);
  run.presented.reserve(T);

  std::vector<std::uint64_t> sampled;
  if (step_samples > 0 && T >= 2) {
    std::vector<std::uint64_t> pop(T - 1);
    std::iota(pop.begin(), pop.end(), std::uint64_t{1});
    auto rng = make_engine(cfg.seed, "steps");
    std::sample(pop.begin(), pop.end(), std::back_inserter(sampled),
                std::min<std::size_t>(step_samples, pop.size()), rng);
    std::sort(sampled.begin(), sampled.end());
  }
  std::size_t next_sample = 0;

  struct Pending {
    std::uint64_t trial;
    std::vector<double> w;
    SparseExample ex;
    double eta;
  };
  std::optional<Pending> pending;

  EagerHooks hooks;
  hooks.on_prediction_state = [&](std::uint64_t i, const std::vector<double>& w,
                                  const SparseExample& ex, double L,
                                  double eta) {
    run.step_loss.push_back(L);
    run.presented.push_back(ex);
    run.C = std::max(run.C, ex.norm());
    if (run.mean_prediction_states.empty())
      run.mean_prediction_states.assign(w.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(i);
    for (std::size_t j = 0; j < w.size(); ++j)
      run.mean_prediction_states[j] += (w[j] - run.mean_prediction_states[j]) * inv;

    if (pending && pending->trial + 1 == i) {
      StepSnapshot snap;
      snap.trial = pending->trial;
      snap.w_before = std::move(pending->w);
      snap.w_after = w;
      snap.ex = std::move(pending->ex);
      snap.gravity = gravity_schedule(i, cfg.K, cfg.g);
      snap.eta = pending->eta;
      run.step_samples.push_back(std::move(snap));
      pending.reset();
    }
    if (next_sample < sampled.size() && sampled[next_sample] == i) {
      pending = Pending{i, w, ex, eta};
      ++next_sample;
    }
  };
  hooks.on_shrink_state = [&](std::uint64_t s, const std::vector<double>& w,
                              double amount) {
    ShrinkSnapshot snap;
    snap.trial = s;
    snap.amount = amount;
    for (std::uint64_t j = 0; j < w.size(); ++j) {
      double a = std::abs(w[j]);
      if (a <= cfg.theta)
        snap.inband_mass += a;
      else
        snap.exceeding.push_back(j);
    }
    run.shrinks.push_back(std::move(snap));
  };

  EagerResult er = eager_train(ds, cfg, run.d, &hooks, false);
  run.final_weights = std::move(er.weights);
  return run;
}

namespace {

double comparator_loss_sum(const RecordedRun& run,
                           const std::vector<double>& wbar, std::uint64_t T) {
  double s = 0.0;
  for (std::uint64_t i = 0; i < T; ++i)
    s += loss_value(run.cfg.loss, dense_dot(wbar, run.presented[i]),
                    run.presented[i].label);
  return s;
}

}  // namespace

GuaranteeReport check_regret(const RecordedRun& run,
                             const std::vector<double>& wbar, std::uint64_t T,
                             const std::string& comparator_name, double tol) {
  require_checkable(run.cfg, false);
  if (T == 0 || T > run.steps) throw ConfigError("bad horizon");
  const auto [A, B] = assumption_constants(run.cfg.loss, run.C);
  const double eta = run.cfg.eta;
  const double factor = 1.0 - 0.5 * A * eta;
  if (factor <= 0.0)
    throw ConfigError("eta too large for the guarantee (1 - A*eta/2 <= 0)");
  const double Kg = static_cast<double>(run.cfg.K) * run.cfg.g;

  double loss_sum =
      std::accumulate(run.step_loss.begin(), run.step_loss.begin() + T, 0.0);
  const double wbar_l1 = l1_norm(wbar);
  double lhs_grav = 0.0, rhs_grav = 0.0;
  for (const auto& s : run.shrinks) {
    if (s.trial < 2 || s.trial > T + 1) continue;
    lhs_grav += Kg * s.inband_mass;
    double excl = 0.0;
    for (std::uint64_t j : s.exceeding) excl += std::abs(wb(wbar, j));
    rhs_grav += Kg * (wbar_l1 - excl);
  }

  GuaranteeReport rep;
  rep.name = "regret";
  rep.comparator = comparator_name;
  rep.T = T;
  rep.lhs = (factor * loss_sum + lhs_grav) / static_cast<double>(T);
  rep.rhs = 0.5 * eta * B +
            l2_sq(wbar) / (2.0 * eta * static_cast<double>(T)) +
            (comparator_loss_sum(run, wbar, T) + rhs_grav) /
                static_cast<double>(T);
  rep.margin = rep.rhs - rep.lhs;
  rep.holds = rep.margin >= -tol;
  return rep;
}

GuaranteeReport check_regret_square(const RecordedRun& run,
                                    const std::vector<double>& wbar,
                                    std::uint64_t T,
                                    const std::string& comparator_name,
                                    double tol) {
  require_checkable(run.cfg, true);
  if (T == 0 || T > run.steps) throw ConfigError("bad horizon");
  const double eta = run.cfg.eta;
  const double factor = 1.0 - 2.0 * run.C * run.C * eta;
  if (factor <= 0.0)
    throw ConfigError("eta too large for the guarantee (1 - 2*C^2*eta <= 0)");
  const double Kg = static_cast<double>(run.cfg.K) * run.cfg.g;

  double loss_sum =
      std::accumulate(run.step_loss.begin(), run.step_loss.begin() + T, 0.0);
  const double wbar_l1 = l1_norm(wbar);
  double lhs_grav = 0.0, rhs_grav = 0.0;
  for (const auto& s : run.shrinks) {
    if (s.trial >= 1 && s.trial <= T) lhs_grav += Kg * s.inband_mass;
    if (s.trial >= 2 && s.trial <= T + 1) {
      double excl = 0.0;
      for (std::uint64_t j : s.exceeding) excl += std::abs(wb(wbar, j));
      rhs_grav += Kg * (wbar_l1 - excl);
    }
  }

  GuaranteeReport rep;
  rep.name = "regret-square";
  rep.comparator = comparator_name;
  rep.T = T;
  rep.lhs = (factor * loss_sum + lhs_grav) / static_cast<double>(T);
  rep.rhs = l2_sq(wbar) / (2.0 * eta * static_cast<double>(T)) +
            (comparator_loss_sum(run, wbar, T) + rhs_grav) /
                static_cast<double>(T);
  rep.margin = rep.rhs - rep.lhs;
  rep.holds = rep.margin >= -tol;
  return rep;
}

GuaranteeReport check_step_inequality(const RecordedRun& run,
                                      const std::vector<double>& wbar,
                                      const std::string& comparator_name,
                                      double tol) {
  require_checkable(run.cfg, false);
  if (run.step_samples.empty())
    throw ConfigError("no sampled transitions recorded");
  const auto [A, B] = assumption_constants(run.cfg.loss, run.C);
  const double eta = run.cfg.eta;
  const double factor = 1.0 - 0.5 * A * eta;
  if (factor <= 0.0)
    throw ConfigError("eta too large for the guarantee (1 - A*eta/2 <= 0)");

  GuaranteeReport rep;
  rep.name = "step-inequality";
  rep.comparator = comparator_name;
  rep.T = run.steps;
  rep.holds = true;
  bool first = true;
  for (const auto& snap : run.step_samples) {
    const double L_w = loss_value(run.cfg.loss, dense_dot(snap.w_before, snap.ex),
                                  snap.ex.label);
    const double L_wbar = loss_value(run.cfg.loss, dense_dot(wbar, snap.ex),
                                     snap.ex.label);
    double in_w = 0.0, in_wbar = 0.0;
    for (std::size_t j = 0; j < snap.w_after.size(); ++j) {
      if (std::abs(snap.w_after[j]) <= run.cfg.theta) {
        in_w += std::abs(snap.w_after[j]);
        in_wbar += std::abs(wb(wbar, j));
      }
    }
    double d2_before = 0.0, d2_after = 0.0;
    for (std::size_t j = 0; j < snap.w_before.size(); ++j) {
      double a = wb(wbar, j) - snap.w_before[j];
      double b = wb(wbar, j) - snap.w_after[j];
      d2_before += a * a;
      d2_after += b * b;
    }
    double lhs = factor * L_w + snap.gravity * in_w;
    double rhs = L_wbar + snap.gravity * in_wbar + 0.5 * eta * B +
                 (d2_before - d2_after) / (2.0 * eta);
    double margin = rhs - lhs;
    if (first || margin < rep.margin) {
      rep.lhs = lhs;
      rep.rhs = rhs;
      rep.margin = margin;
      first = false;
    }
    if (margin < -tol) rep.holds = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------

double l1_objective(const Dataset& ds, LossKind loss, double g,
                    const std::vector<double>& w) {
  double s = 0.0;
  for (const auto& ex : ds)
    s += loss_value(loss, dense_dot(w, ex), ex.label);
  return s / static_cast<double>(ds.size()) + g * l1_norm(w);
}

double l1_kkt_violation(const Dataset& ds, LossKind loss, double g,
                        const std::vector<double>& w) {
  if (loss == LossKind::hinge)
    throw ConfigError("l1 oracle supports square and logistic losses");
  std::vector<double> grad(w.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  for (const auto& ex : ds) {
    double d = loss_derivative(loss, dense_dot(w, ex), ex.label) * inv_n;
    for (const auto& [j, x] : ex.features)
      if (j < w.size()) grad[j] += d * x;
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    double v;
    if (w[j] > 0.0)
      v = std::abs(grad[j] + g);
    else if (w[j] < 0.0)
      v = std::abs(grad[j] - g);
    else
      v = std::max(0.0, std::abs(grad[j]) - g);
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

L1OracleResult oracle_square(const Dataset& ds, double g, std::uint64_t d) {
  const std::size_t n = ds.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> cols(d);
  for (std::uint32_t i = 0; i < n; ++i)
    for (const auto& [j, x] : ds[i].features) cols[j].emplace_back(i, x);
  std::vector<double> colnorm(d, 0.0);
  for (std::uint64_t j = 0; j < d; ++j)
    for (const auto& [i, x] : cols[j]) colnorm[j] += 2.0 * inv_n * x * x;

  L1OracleResult res;
  res.w.assign(d, 0.0);
  std::vector<double> r(n);  // residual w.x - y
  for (std::size_t i = 0; i < n; ++i) r[i] = -ds[i].label;

  auto objective = [&] {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s * inv_n + g * l1_norm(res.w);
  };

  double prev = objective();
  for (std::uint64_t sweep = 1; sweep <= 100000; ++sweep) {
    for (std::uint64_t j = 0; j < d; ++j) {
      if (colnorm[j] == 0.0) continue;
      double rho = res.w[j] * colnorm[j];
      for (const auto& [i, x] : cols[j]) rho -= 2.0 * inv_n * r[i] * x;
      double wnew = soft_threshold(rho, g) / colnorm[j];
      double delta = wnew - res.w[j];
      if (delta != 0.0) {
        for (const auto& [i, x] : cols[j]) r[i] += delta * x;
        res.w[j] = wnew;
      }
    }
    if (sweep % 64 == 0) {  // refresh residual drift
      for (std::size_t i = 0; i < n; ++i) r[i] = dense_dot(res.w, ds[i]) - ds[i].label;
    }
    double obj = objective();
    res.iterations = sweep;
    if (prev - obj < 1e-13 &&
        l1_kkt_violation(ds, LossKind::square, g, res.w) <= 1e-7)
      break;
    prev = obj;
  }
  res.objective = l1_objective(ds, LossKind::square, g, res.w);
  res.kkt_violation = l1_kkt_violation(ds, LossKind::square, g, res.w);
  return res;
}

L1OracleResult oracle_logistic(const Dataset& ds, double g, std::uint64_t d) {
  const std::size_t n = ds.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  auto smooth = [&](const std::vector<double>& w, std::vector<double>* grad) {
    if (grad) grad->assign(d, 0.0);
    double f = 0.0;
    for (const auto& ex : ds) {
      double p = dense_dot(w, ex);
      f += loss_value(LossKind::logistic, p, ex.label);
      if (grad) {
        double dv = loss_derivative(LossKind::logistic, p, ex.label) * inv_n;
        for (const auto& [j, x] : ex.features) (*grad)[j] += dv * x;
      }
    }
    return f * inv_n;
  };

  L1OracleResult res;
  res.w.assign(d, 0.0);
  std::vector<double> grad, wnew(d);
  double step = 1.0;
  double f = smooth(res.w, &grad);
  for (std::uint64_t it = 1; it <= 200000; ++it) {
    res.iterations = it;
    step = std::min(step * 2.0, 1e6);
    double resid = 0.0;
    for (;;) {
      double quad = 0.0, lin = 0.0;
      for (std::uint64_t j = 0; j < d; ++j) {
        wnew[j] = soft_threshold(res.w[j] - step * grad[j], step * g);
        double dj = wnew[j] - res.w[j];
        lin += grad[j] * dj;
        quad += dj * dj;
      }
      double fnew = smooth(wnew, nullptr);
      if (fnew <= f + lin + quad / (2.0 * step) + 1e-16) {
        resid = std::sqrt(quad) / step;
        break;
      }
      step *= 0.5;
      if (step < 1e-18) throw ConfigError("l1 oracle line search failed");
    }
    std::swap(res.w, wnew);
    f = smooth(res.w, &grad);
    if (resid <= 1e-10) break;
  }
  res.objective = l1_objective(ds, LossKind::logistic, g, res.w);
  res.kkt_violation = l1_kkt_violation(ds, LossKind::logistic, g, res.w);
  return res;
}

}  // namespace

L1OracleResult l1_oracle(const Dataset& ds, LossKind loss, double g,
                         std::uint64_t d) {
  if (ds.empty()) throw ConfigError("empty dataset");
  if (g < 0.0 || !std::isfinite(g)) throw ConfigError("g must be >= 0");
  if (d == 0) {
    DatasetMeta m = scan_meta(ds);
    d = m.any_features ? m.max_feature_index + 1 : 1;
  }
  if (d > 64 || ds.size() > 2000)
    throw ConfigError("l1 oracle is for desk-scale problems (d <= 64, n <= 2000)");
  switch (loss) {
    case LossKind::square: return oracle_square(ds, g, d);
    case LossKind::logistic: return oracle_logistic(ds, g, d);
    case LossKind::hinge: break;
  }
  throw ConfigError("l1 oracle supports square and logistic losses");
}

// ---------------------------------------------------------------------------

StochasticReport check_stochastic(const Dataset& ds, const LearnerConfig& cfg,
                                  std::uint64_t T, std::uint64_t n_seeds,
                                  double rel_tol) {
  require_checkable(cfg, false);
  if (cfg.sampling != Sampling::uniform_random)
    throw ConfigError("stochastic check needs uniform sampling");
  if (std::isfinite(cfg.theta))
    throw ConfigError("stochastic check needs theta = inf");
  if (cfg.K != 1) throw ConfigError("stochastic check needs K = 1");
  if (n_seeds < 2) throw ConfigError("need at least 2 seeds");
  if (T == 0) throw ConfigError("need T > 0");

  DatasetMeta meta = scan_meta(ds);
  const std::uint64_t d = meta.any_features ? meta.max_feature_index + 1 : 1;
  const auto [A, B] = assumption_constants(cfg.loss, meta.max_norm);
  const double factor = 1.0 - 0.5 * A * cfg.eta;
  if (factor <= 0.0)
    throw ConfigError("eta too large for the guarantee (1 - A*eta/2 <= 0)");
  const double g_scaled = cfg.g / factor;

  L1OracleResult oracle = l1_oracle(ds, cfg.loss, cfg.g, d);

  std::vector<double> plain(n_seeds), scaled(n_seeds);
  std::exception_ptr fail;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t m = 0; m < static_cast<std::int64_t>(n_seeds); ++m) {
    try {
      LearnerConfig c = cfg;
      c.seed = substream_seed(cfg.seed, "replicate", static_cast<std::uint64_t>(m));
      std::vector<double> mean(d, 0.0);
      EagerHooks hk;
      hk.on_prediction_state = [&](std::uint64_t i, const std::vector<double>& w,
                                   const SparseExample&, double, double) {
        const double inv = 1.0 / static_cast<double>(i);
        for (std::uint64_t j = 0; j < d; ++j) mean[j] += (w[j] - mean[j]) * inv;
      };
      eager_train(ds, c, d, &hk, false, T);
      plain[m] = l1_objective(ds, cfg.loss, cfg.g, mean);
      scaled[m] = factor * l1_objective(ds, cfg.loss, g_scaled, mean);
    } catch (...) {
#pragma omp critical
      if (!fail) fail = std::current_exception();
    }
  }
  if (fail) std::rethrow_exception(fail);

  StochasticReport rep;
  rep.seeds = n_seeds;
  rep.T = T;
  rep.oracle_objective = oracle.objective;
  double sum = 0.0, sum_s = 0.0;
  for (std::uint64_t m = 0; m < n_seeds; ++m) {
    sum += plain[m];
    sum_s += scaled[m];
  }
  rep.mean_objective = sum / static_cast<double>(n_seeds);
  rep.mean_scaled = sum_s / static_cast<double>(n_seeds);
  double var = 0.0;
  for (std::uint64_t m = 0; m < n_seeds; ++m) {
    double dv = scaled[m] - rep.mean_scaled;
    var += dv * dv;
  }
  var /= static_cast<double>(n_seeds - 1);
  rep.se_scaled = std::sqrt(var / static_cast<double>(n_seeds));
  rep.bound = 0.5 * cfg.eta * B +
              l2_sq(oracle.w) / (2.0 * cfg.eta * static_cast<double>(T)) +
              oracle.objective;
  rep.bound_holds = rep.mean_scaled <= rep.bound + 2.0 * rep.se_scaled;
  if (rep.oracle_objective <= 0.0)
    throw ConfigError("degenerate oracle objective; pick a noisier problem");
  rep.rel_gap = (rep.mean_objective - rep.oracle_objective) / rep.oracle_objective;
  rep.converged = rep.rel_gap <= rel_tol && rep.rel_gap >= -1e-9;
  return rep;
}

}  // namespace sparsegd

#include "sparsegd/eager.hpp"

#include <cmath>
#include <stdexcept>

#include "sparsegd/example.hpp"

namespace sparsegd {

namespace {

void shrink_all(std::vector<double>& w, const LearnerConfig& cfg,
                double amount) {
  switch (cfg.rule) {
    case Rule::truncated_gradient:
      for (double& v : w)
        if (v != 0.0) v = truncate_gravity(v, amount, cfg.theta);
      break;
    case Rule::rounding:
      for (double& v : w)
        if (v != 0.0) v = truncate_round(v, cfg.theta);
      break;
    case Rule::subgradient_l1:
      for (double& v : w) {
        if (v > 0.0)
          v -= amount;
        else if (v < 0.0)
          v += amount;
      }
      break;
  }
}

}  // namespace

EagerResult eager_train(const Dataset& ds, const LearnerConfig& cfg,
                        std::uint64_t d, const EagerHooks* hooks,
                        bool track_average, std::uint64_t force_steps) {
  cfg.validate();
  if (ds.empty()) throw ConfigError("empty dataset");
  if (d == 0) {
    DatasetMeta m = scan_meta(ds);
    d = m.any_features ? m.max_feature_index + 1 : 1;
  }
  if (d > 20'000'000)
    throw ConfigError("dense reference engine: dimension too large");

  const std::uint64_t T =
      force_steps > 0 ? force_steps : ds.size() * cfg.passes;
  ExampleOrder order(cfg, ds.size());
  EagerResult res;
  res.weights.assign(d, 0.0);
  if (track_average) res.averaged.assign(d, 0.0);
  res.trace.reserve(T);
  std::vector<double>& w = res.weights;

  for (std::uint64_t i = 1; i <= T; ++i) {
    const double eta_i = learning_rate(cfg, i, ds.size());
    double shrink_amount = 0.0;
    if (i % cfg.K == 0) {
      shrink_amount = eta_i * (static_cast<double>(cfg.K) * cfg.g);
      shrink_all(w, cfg, shrink_amount);
      if (hooks && hooks->on_shrink_state) hooks->on_shrink_state(i, w, shrink_amount);
    }

    const SparseExample& ex = ds[order.next()];
    validate_label(cfg.loss, ex.label);
    double raw = 0.0;
    for (const auto& [j, x] : ex.features) raw += w[j] * x;
    const double p = adjusted_prediction(cfg, raw, ex.features.size());
    const double L = loss_value(cfg.loss, p, ex.label);
    const double deriv = loss_derivative(cfg.loss, p, ex.label);
    if (!std::isfinite(p) || !std::isfinite(L) || !std::isfinite(deriv))
      throw DivergenceError("non-finite prediction or loss", i);
    if (hooks && hooks->on_prediction_state)
      hooks->on_prediction_state(i, w, ex, L, eta_i);

    const double scale = -eta_i * deriv;
    if (scale != 0.0)
      for (const auto& [j, x] : ex.features) w[j] += scale * x;

    if (track_average) {
      const double inv = 1.0 / static_cast<double>(i);
      for (std::uint64_t j = 0; j < d; ++j)
        res.averaged[j] += (w[j] - res.averaged[j]) * inv;
    }

    StepRecord rec;
    rec.loss = L;
    rec.eta = eta_i;
    rec.gravity = cfg.rule == Rule::rounding
                      ? 0.0
                      : gravity_schedule(i, cfg.K, cfg.g);
    rec.shrunk_mass = 0.0;
    std::uint64_t nnz = 0;
    for (double v : w) nnz += v != 0.0;
    rec.nnz_after = nnz;
    res.trace.push_back(rec);
  }

  // A shrink due at trial T+1 belongs to the *next* prediction state, which
  // the guarantee checkers need; report it on a copy so the returned weights
  // stay comparable with the lazy engine's post-T state.
  if ((T + 1) % cfg.K == 0 && hooks && hooks->on_shrink_state) {
    std::vector<double> w2 = w;
    double amount =
        learning_rate(cfg, T + 1, ds.size()) * (static_cast<double>(cfg.K) * cfg.g);
    shrink_all(w2, cfg, amount);
    hooks->on_shrink_state(T + 1, w2, amount);
  }

  res.steps = T;
  return res;
}

std::map<std::uint64_t, double> dense_to_sparse(const std::vector<double>& w) {
  std::map<std::uint64_t, double> out;
  for (std::uint64_t j = 0; j < w.size(); ++j)
    if (w[j] != 0.0) out.emplace(j, w[j]);
  return out;
}

}  // namespace sparsegd

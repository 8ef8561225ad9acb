#include "sparsegd/learner.hpp"

#include <chrono>
#include <cmath>

#include "sparsegd/rng.hpp"

namespace sparsegd {

std::string to_string(Rule r) {
  switch (r) {
    case Rule::truncated_gradient: return "tg";
    case Rule::rounding: return "rounding";
    case Rule::subgradient_l1: return "subgrad";
  }
  return "?";
}

Rule rule_from_string(std::string_view s) {
  if (s == "tg") return Rule::truncated_gradient;
  if (s == "rounding") return Rule::rounding;
  if (s == "subgrad") return Rule::subgradient_l1;
  throw std::invalid_argument("unknown rule: " + std::string(s));
}

std::string to_string(Sampling s) {
  return s == Sampling::sequential ? "sequential" : "uniform";
}

Sampling sampling_from_string(std::string_view s) {
  if (s == "sequential") return Sampling::sequential;
  if (s == "uniform") return Sampling::uniform_random;
  throw std::invalid_argument("unknown sampling: " + std::string(s));
}

void LearnerConfig::validate() const {
  if (!(eta > 0.0) || !(eta <= 1.0) || !std::isfinite(eta))
    throw ConfigError("eta must be in (0, 1]");
  if (!(g >= 0.0) || !std::isfinite(g))
    throw ConfigError("g must be finite and >= 0");
  if (std::isnan(theta) || theta < 0.0)
    throw ConfigError("theta must be >= 0 (or inf)");
  if (rule == Rule::rounding && !std::isfinite(theta))
    throw ConfigError("rounding needs a finite theta");
  if (K < 1) throw ConfigError("K must be >= 1");
  if (passes < 1) throw ConfigError("passes must be >= 1");
  if (lr_decay_power < 0.0 || lr_decay_power > 1.0)
    throw ConfigError("lr_decay_power must be in [0, 1]");
  if (!(pass_lr_decay > 0.0) || pass_lr_decay > 1.0)
    throw ConfigError("pass_lr_decay must be in (0, 1]");
}

double learning_rate(const LearnerConfig& cfg, std::uint64_t trial,
                     std::uint64_t steps_per_pass) {
  double rate = cfg.eta;
  if (cfg.pass_lr_decay != 1.0 && steps_per_pass > 0) {
    std::uint64_t pass = (trial - 1) / steps_per_pass;
    for (std::uint64_t p = 0; p < pass; ++p) rate *= cfg.pass_lr_decay;
  }
  if (cfg.lr_decay_power != 0.0)
    rate *= std::pow(static_cast<double>(trial), -cfg.lr_decay_power);
  return rate;
}

OnlineLearner::OnlineLearner(const LearnerConfig& cfg,
                             std::uint64_t steps_per_pass)
    : cfg_(cfg), steps_per_pass_(steps_per_pass) {
  cfg_.validate();
}

double OnlineLearner::catch_up(WeightEntry& e, std::uint64_t trial) const {
  const std::uint64_t K = cfg_.K;
  double before = e.value;

  if (cfg_.rule == Rule::rounding) {
    if (trial >= e.tau + K && std::abs(e.value) <= cfg_.theta) e.value = 0.0;
    e.tau = grid_snap(trial);
    return std::abs(before - e.value);
  }

  std::uint64_t missed = (trial - e.tau) / K;
  if (missed == 0) return 0.0;
  const double per_trial = static_cast<double>(K) * cfg_.g;

  if (cfg_.rule == Rule::truncated_gradient) {
    if (cfg_.constant_rate()) {
      // All owed events use the same amount and the weight cannot leave
      // [-theta, theta] in between, so the pulls collapse into one.
      double total = cfg_.eta * per_trial * static_cast<double>(missed);
      e.value = truncate_gravity(e.value, total, cfg_.theta);
    } else {
      for (std::uint64_t m = 1; m <= missed && e.value != 0.0; ++m) {
        double alpha = rate_at(e.tau + m * K) * per_trial;
        e.value = truncate_gravity(e.value, alpha, cfg_.theta);
      }
    }
  } else {  // subgradient_l1: signed pulls may cross zero, replay each event
    for (std::uint64_t m = 1; m <= missed && e.value != 0.0; ++m) {
      double c = rate_at(e.tau + m * K) * per_trial;
      e.value += e.value > 0.0 ? -c : c;
    }
  }
  e.tau += missed * K;
  return std::abs(before) - std::abs(e.value);
}

double OnlineLearner::effective_value(const WeightEntry& e,
                                      std::uint64_t at_trial) const {
  WeightEntry tmp = e;
  catch_up(tmp, at_trial);
  return tmp.value;
}

double adjusted_prediction(const LearnerConfig& cfg, double raw,
                           std::size_t nnz) {
  double p = raw;
  if (cfg.vw_normalize && nnz > 0) p /= std::sqrt(static_cast<double>(nnz));
  if (cfg.vw_clip) p = std::min(1.0, std::max(0.0, p));
  return p;
}

double OnlineLearner::adjust_prediction(double raw, std::size_t nnz) const {
  return adjusted_prediction(cfg_, raw, nnz);
}

double OnlineLearner::predict(const SparseExample& ex) const {
  double raw = 0.0;
  const auto& m = state_.entries();
  for (const auto& [j, x] : ex.features) {
    auto it = m.find(j);
    if (it != m.end()) raw += it->second.value * x;
  }
  return adjust_prediction(raw, ex.features.size());
}

StepRecord OnlineLearner::step(const SparseExample& ex) {
  const std::uint64_t i = state_.step + 1;
  const double eta_i = rate_at(i);
  validate_label(cfg_.loss, ex.label);

  double shrunk = 0.0;
  work_.clear();
  for (const auto& [j, x] : ex.features) {
    auto it = state_.find_counted(j);
    bool present = it != state_.end();
    if (present) {
      shrunk += catch_up(it->second, i);
      if (it->second.value == 0.0) {
        state_.erase_counted(it);
        present = false;
      }
    }
    work_.push_back({j, x, it, present});
  }

  double raw = 0.0;
  for (const auto& t : work_)
    if (t.present) raw += t.it->second.value * t.x;
  const double p = adjust_prediction(raw, ex.features.size());
  const double L = loss_value(cfg_.loss, p, ex.label);
  const double deriv = loss_derivative(cfg_.loss, p, ex.label);
  if (!std::isfinite(p) || !std::isfinite(L) || !std::isfinite(deriv))
    throw DivergenceError("non-finite prediction or loss", i);

  const double scale = -eta_i * deriv;
  if (scale != 0.0) {
    for (auto& t : work_) {
      double delta = scale * t.x;
      if (delta == 0.0) continue;
      if (!t.present) {
        state_.insert_counted(t.index, {delta, grid_snap(i)});
      } else {
        t.it->second.value += delta;
        if (t.it->second.value == 0.0) state_.erase_counted(t.it);
      }
    }
  }

  state_.step = i;
  StepRecord rec;
  rec.loss = L;
  rec.eta = eta_i;
  rec.gravity = cfg_.rule == Rule::rounding
                    ? 0.0
                    : gravity_schedule(i, cfg_.K, cfg_.g);
  rec.shrunk_mass = shrunk;
  rec.nnz_after = state_.nnz();
  return rec;
}

std::map<std::uint64_t, double> OnlineLearner::materialized(
    std::uint64_t at_trial) const {
  std::map<std::uint64_t, double> out;
  for (const auto& [j, e] : state_.entries()) {
    double v = effective_value(e, at_trial);
    if (v != 0.0) out.emplace(j, v);
  }
  return out;
}

void OnlineLearner::finalize() {
  for (auto it = state_.begin(); it != state_.end();) {
    catch_up(it->second, state_.step);
    if (it->second.value == 0.0)
      it = state_.erase_counted(it);
    else
      ++it;
  }
}

ExampleOrder::ExampleOrder(const LearnerConfig& cfg, std::size_t n)
    : mode_(cfg.sampling),
      n_(n),
      rng_(substream_seed(cfg.seed, "sample")),
      dist_(0, n > 0 ? n - 1 : 0) {}

std::size_t ExampleOrder::next() {
  if (mode_ == Sampling::sequential) {
    std::size_t i = seq_ % n_;
    ++seq_;
    return i;
  }
  return dist_(rng_);
}

TrainResult train(const Dataset& ds, const LearnerConfig& cfg,
                  const TrainOptions& opt) {
  cfg.validate();
  if (ds.empty()) throw ConfigError("empty dataset");
  auto t0 = std::chrono::steady_clock::now();

  OnlineLearner learner(cfg, ds.size());
  ExampleOrder order(cfg, ds.size());
  const std::uint64_t T = ds.size() * cfg.passes;

  TrainResult res;
  if (opt.keep_trace) res.trace.reserve(T);
  std::map<std::uint64_t, double> avg;

  for (std::uint64_t t = 1; t <= T; ++t) {
    const SparseExample& ex = ds[order.next()];
    StepRecord rec = learner.step(ex);
    res.peak_nnz = std::max<std::uint64_t>(res.peak_nnz, rec.nnz_after);
    if (opt.keep_trace) res.trace.push_back(rec);

    if (opt.track_average) {
      // Running mean over the union of live keys; effective_value settles
      // shrinkage through t so the mean matches the eager post-trial states.
      auto ai = avg.begin();
      for (const auto& [j, e] : learner.weights().entries()) {
        while (ai != avg.end() && ai->first < j) {
          ai->second += (0.0 - ai->second) / static_cast<double>(t);
          ++ai;
        }
        double v = learner.effective_value(e, t);
        if (ai != avg.end() && ai->first == j) {
          ai->second += (v - ai->second) / static_cast<double>(t);
          ++ai;
        } else if (v != 0.0) {
          ai = avg.emplace_hint(ai, j, v / static_cast<double>(t));
          ++ai;
        }
      }
      for (; ai != avg.end(); ++ai)
        ai->second += (0.0 - ai->second) / static_cast<double>(t);
    }
    if (opt.observer) opt.observer(t, learner, rec);
  }

  learner.finalize();
  for (const auto& [j, e] : learner.weights().entries())
    res.final_weights.emplace(j, e.value);
  if (opt.track_average) {
    for (auto& [j, v] : avg)
      if (v != 0.0) res.averaged.emplace(j, v);
  }
  res.steps = T;
  res.map_ops = learner.weights().map_ops();
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

}  // namespace sparsegd

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sparsegd/example.hpp"
#include "sparsegd/loss.hpp"
#include "sparsegd/truncation.hpp"

namespace sparsegd {

// Which shrinkage is applied at every K-th trial:
//   truncated_gradient: pull weights in [-theta, theta] toward zero by
//                       eta*K*g, clamping at zero (never crossing).
//   rounding:           zero out weights with magnitude <= theta.
//   subgradient_l1:     subtract eta*K*g times the sign, possibly crossing
//                       zero; kept as a reference point, produces no sparsity.
enum class Rule { truncated_gradient, rounding, subgradient_l1 };

enum class Sampling { sequential, uniform_random };

std::string to_string(Rule r);
Rule rule_from_string(std::string_view s);
std::string to_string(Sampling s);
Sampling sampling_from_string(std::string_view s);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::uint64_t step)
      : std::runtime_error("step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

struct LearnerConfig {
  Rule rule = Rule::truncated_gradient;
  LossKind loss = LossKind::square;
  double eta = 0.1;    // base learning rate, in (0, 1]
  double g = 0.0;      // per-trial shrinkage intensity, >= 0
  double theta = std::numeric_limits<double>::infinity();
  std::uint64_t K = 1;  // shrink every K-th trial by the accumulated amount
  std::uint64_t passes = 1;
  double lr_decay_power = 0.0;  // eta_i ~ i^-power, in [0, 1]
  double pass_lr_decay = 1.0;   // extra factor per completed pass, in (0, 1]
  Sampling sampling = Sampling::sequential;
  std::uint64_t seed = 0;
  bool vw_normalize = false;  // divide prediction by sqrt(#features present)
  bool vw_clip = false;       // clamp prediction to [0, 1]

  void validate() const;
  bool constant_rate() const {
    return lr_decay_power == 0.0 && pass_lr_decay == 1.0;
  }
};

// eta_i for 1-based trial i. steps_per_pass == 0 means "single endless pass"
// (no per-pass decay regardless of pass_lr_decay).
double learning_rate(const LearnerConfig& cfg, std::uint64_t trial,
                     std::uint64_t steps_per_pass);

// Applies the vw_normalize / vw_clip adjustments to a raw dot product.
double adjusted_prediction(const LearnerConfig& cfg, double raw,
                           std::size_t nnz);

// One weight plus the trial up to which shrinkage has been settled. All
// shrinkage events in (tau, now] are still owed.
struct WeightEntry {
  double value = 0.0;
  std::uint64_t tau = 0;
};

// Sorted sparse weight map. Every find/insert/erase is counted so tests can
// assert that per-step work depends on the example, not on the index range.
class WeightState {
 public:
  using Map = std::map<std::uint64_t, WeightEntry>;
  using iterator = Map::iterator;
  using const_iterator = Map::const_iterator;

  iterator find_counted(std::uint64_t j) {
    ++map_ops_;
    return entries_.find(j);
  }
  iterator insert_counted(std::uint64_t j, WeightEntry e) {
    ++map_ops_;
    return entries_.emplace(j, e).first;
  }
  iterator erase_counted(iterator it) {
    ++map_ops_;
    return entries_.erase(it);
  }

  iterator begin() { return entries_.begin(); }
  iterator end() { return entries_.end(); }
  const Map& entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  std::uint64_t map_ops() const { return map_ops_; }

  std::uint64_t step = 0;  // trials completed

 private:
  Map entries_;
  std::uint64_t map_ops_ = 0;
};

struct StepRecord {
  double loss = 0.0;
  double eta = 0.0;
  double gravity = 0.0;  // schedule value K*g if this trial shrank, else 0
  double shrunk_mass = 0.0;  // L1 mass removed by catch-up on touched features
  std::uint64_t nnz_after = 0;
};

using RunTrace = std::vector<StepRecord>;

class OnlineLearner {
 public:
  explicit OnlineLearner(const LearnerConfig& cfg,
                         std::uint64_t steps_per_pass = 0);

  // Runs one trial: settle owed shrinkage on the touched features, predict,
  // observe the label, apply the gradient. Throws DivergenceError on a
  // non-finite prediction, loss or update.
  StepRecord step(const SparseExample& ex);

  // Dot product against the stored values (plus the vw_* adjustments).
  // Features not yet settled contribute their stale value; call
  // materialized()/finalize() first when that matters.
  double predict(const SparseExample& ex) const;

  // Weight of j as it would be after settling shrinkage through trial
  // `at_trial`, without mutating anything.
  double effective_value(const WeightEntry& e, std::uint64_t at_trial) const;

  // All weights settled through `at_trial`, zeros dropped.
  std::map<std::uint64_t, double> materialized(std::uint64_t at_trial) const;

  // Settles every stored feature through the current trial, erasing zeros.
  void finalize();

  const WeightState& weights() const { return state_; }
  const LearnerConfig& config() const { return cfg_; }
  std::uint64_t current_step() const { return state_.step; }
  double rate_at(std::uint64_t trial) const {
    return learning_rate(cfg_, trial, steps_per_pass_);
  }

 private:
  // Applies events in (e.tau, trial] to e.value; returns |mass| removed.
  double catch_up(WeightEntry& e, std::uint64_t trial) const;
  std::uint64_t grid_snap(std::uint64_t trial) const {
    return trial / cfg_.K * cfg_.K;
  }
  double adjust_prediction(double raw, std::size_t nnz) const;

  LearnerConfig cfg_;
  std::uint64_t steps_per_pass_;
  WeightState state_;
  struct Touched {
    std::uint64_t index;
    double x;
    WeightState::iterator it;
    bool present;
  };
  std::vector<Touched> work_;
};

// Presentation order shared by every engine: sequential wraps around the
// dataset; uniform_random draws i.i.d. indices from a seed-derived stream.
class ExampleOrder {
 public:
  ExampleOrder(const LearnerConfig& cfg, std::size_t n);
  std::size_t next();

 private:
  Sampling mode_;
  std::size_t n_;
  std::size_t seq_ = 0;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<std::size_t> dist_;
};

struct TrainOptions {
  bool track_average = false;
  bool keep_trace = true;
  // Called after every trial with (trial, learner, record).
  std::function<void(std::uint64_t, const OnlineLearner&, const StepRecord&)>
      observer;
};

struct TrainResult {
  std::map<std::uint64_t, double> final_weights;
  std::map<std::uint64_t, double> averaged;  // mean of post-trial states
  RunTrace trace;
  std::uint64_t steps = 0;
  std::uint64_t peak_nnz = 0;
  std::uint64_t map_ops = 0;
  double wall_seconds = 0.0;
};

TrainResult train(const Dataset& ds, const LearnerConfig& cfg,
                  const TrainOptions& opt = {});

}  // namespace sparsegd

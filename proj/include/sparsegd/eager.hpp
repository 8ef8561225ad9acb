#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "sparsegd/learner.hpp"

namespace sparsegd {

// Dense reference trainer: applies shrinkage to every coordinate the moment
// it is due instead of lazily on touch. O(d) per shrink trial, so it only
// suits moderate dimensions — it exists as the behavioural reference the
// lazy engine is tested against, and as the state recorder for the
// analytic-guarantee checkers.
struct EagerHooks {
  // w as it stands when trial i predicts (post-shrink, pre-gradient), plus
  // the example it is about to see and the loss/rate it incurred.
  std::function<void(std::uint64_t i, const std::vector<double>& w,
                     const SparseExample& ex, double loss, double eta)>
      on_prediction_state;
  // w right after the shrink sweep of trial i (only trials with K | i,
  // including the phantom sweep at T+1 when K | T+1). `amount` is the
  // per-coordinate pull eta_i * K * g that was just applied.
  std::function<void(std::uint64_t i, const std::vector<double>& w,
                     double amount)>
      on_shrink_state;
};

struct EagerResult {
  std::vector<double> weights;   // state after trial T (no phantom sweep)
  std::vector<double> averaged;  // mean of the T post-trial states
  RunTrace trace;
  std::uint64_t steps = 0;
};

// d must cover every feature index (max index + 1); pass 0 to scan the
// dataset. Refuses absurdly large d rather than allocating gigabytes.
// force_steps overrides the trial count (otherwise n * passes).
EagerResult eager_train(const Dataset& ds, const LearnerConfig& cfg,
                        std::uint64_t d = 0, const EagerHooks* hooks = nullptr,
                        bool track_average = false,
                        std::uint64_t force_steps = 0);

std::map<std::uint64_t, double> dense_to_sparse(const std::vector<double>& w);

}  // namespace sparsegd

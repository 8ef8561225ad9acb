#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsegd/eager.hpp"
#include "sparsegd/learner.hpp"

namespace sparsegd {

// ---------------------------------------------------------------------------
// Recorded runs: everything the analytic-guarantee checkers need, captured
// from the dense reference engine. The guarantees quantify over prediction
// states w_1..w_T (the weights each trial predicts with), the per-trial
// losses, and the L1 mass the shrink sweeps see; we store exactly that.
// ---------------------------------------------------------------------------

struct ShrinkSnapshot {
  std::uint64_t trial = 0;  // s with K | s, in [1, T+1]
  double amount = 0.0;      // per-coordinate pull eta_s * K * g
  double inband_mass = 0.0; // sum |w_j| over j with |w_j| <= theta, post-shrink
  std::vector<std::uint64_t> exceeding;  // j with |w_j| > theta (post-shrink)
};

struct StepSnapshot {
  std::uint64_t trial = 0;       // i: transition w_i -> w_{i+1} via z_i
  std::vector<double> w_before;  // w_i
  std::vector<double> w_after;   // w_{i+1}
  SparseExample ex;              // z_i
  double gravity = 0.0;          // schedule value K*g if the transition shrank
  double eta = 0.0;
};

struct RecordedRun {
  LearnerConfig cfg;
  std::uint64_t steps = 0;  // T
  std::uint64_t d = 0;
  double C = 0.0;  // max |x| over presented examples
  std::vector<double> step_loss;         // L(w_i, z_i)
  std::vector<SparseExample> presented;  // z_1..z_T in presentation order
  std::vector<ShrinkSnapshot> shrinks;
  std::vector<double> final_weights;
  std::vector<double> mean_prediction_states;  // (1/T) sum of w_1..w_T
  std::vector<StepSnapshot> step_samples;
};

// Trains with the dense engine and captures the run. step_samples picks
// that many distinct trials in [1, T-1] (seeded from cfg.seed) whose full
// before/after states are kept for the per-step inequality.
RecordedRun record_run(const Dataset& ds, const LearnerConfig& cfg,
                       std::uint64_t step_samples = 0);

struct GuaranteeReport {
  std::string name;
  std::string comparator;
  std::uint64_t T = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool holds = false;   // margin >= -tol
};

// Average-regret guarantee for a general loss satisfying the gradient-growth
// bound, evaluated against a fixed comparator over the first T trials.
// Requires the truncated_gradient rule, a constant learning rate, no
// prediction adjustments, and eta small enough that 1 - A*eta/2 > 0.
GuaranteeReport check_regret(const RecordedRun& run,
                             const std::vector<double>& wbar, std::uint64_t T,
                             const std::string& comparator_name,
                             double tol = 1e-9);

// Square-loss specialisation: sharper constant (1 - 2*C^2*eta) and the
// current state's in-band mass on the left. Same preconditions, plus the
// square loss and 1 - 2*C^2*eta > 0.
GuaranteeReport check_regret_square(const RecordedRun& run,
                                    const std::vector<double>& wbar,
                                    std::uint64_t T,
                                    const std::string& comparator_name,
                                    double tol = 1e-9);

// Per-transition inequality on each captured step snapshot; returns the
// report of the worst margin (holds == all snapshots hold).
GuaranteeReport check_step_inequality(const RecordedRun& run,
                                      const std::vector<double>& wbar,
                                      const std::string& comparator_name,
                                      double tol = 1e-9);

// ---------------------------------------------------------------------------
// Batch L1 oracle: minimises (1/n) sum_i L(w, z_i) + g * |w|_1 to high
// precision on desk-scale problems. Square loss uses exact cyclic coordinate
// minimisation, logistic uses proximal gradient with backtracking.
// ---------------------------------------------------------------------------

struct L1OracleResult {
  std::vector<double> w;
  double objective = 0.0;
  double kkt_violation = 0.0;
  std::uint64_t iterations = 0;
};

double l1_objective(const Dataset& ds, LossKind loss, double g,
                    const std::vector<double>& w);
double l1_kkt_violation(const Dataset& ds, LossKind loss, double g,
                        const std::vector<double>& w);
L1OracleResult l1_oracle(const Dataset& ds, LossKind loss, double g,
                         std::uint64_t d = 0);

// ---------------------------------------------------------------------------
// Stochastic-setting convergence: train with uniform sampling for T trials,
// average the prediction states, and compare the regularised objective of
// the averaged iterate against the batch optimum, over independent seeds.
// ---------------------------------------------------------------------------

struct StochasticReport {
  std::uint64_t seeds = 0;
  std::uint64_t T = 0;
  double mean_objective = 0.0;    // mean over seeds of R(w_avg, g)
  double oracle_objective = 0.0;  // min_w R(w, g)
  double rel_gap = 0.0;           // (mean - oracle) / oracle
  double mean_scaled = 0.0;       // mean of (1-A*eta/2) R(w_avg, g/(1-A*eta/2))
  double se_scaled = 0.0;         // standard error of the above
  double bound = 0.0;             // eta*B/2 + |w*|^2/(2*eta*T) + R(w*, g)
  bool bound_holds = false;       // mean_scaled <= bound + 2*se
  bool converged = false;         // rel_gap <= rel_tol
};

// Preconditions: uniform sampling, truncated_gradient with theta = inf,
// K = 1, constant rate, no prediction adjustments. Seed replicates run in
// parallel; results are independent of thread count.
StochasticReport check_stochastic(const Dataset& ds, const LearnerConfig& cfg,
                                  std::uint64_t T, std::uint64_t n_seeds,
                                  double rel_tol = 0.05);

}  // namespace sparsegd

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparsegd/learner.hpp"

namespace sparsegd {

// Rank-based AUC with midrank tie handling; O(n log n). Labels must be
// -1/+1 and both classes present.
double auc_score(const std::vector<double>& scores,
                 const std::vector<double>& labels);

// Fraction with sign(score) matching the label; score > 0 counts positive.
double accuracy_score(const std::vector<double>& scores,
                      const std::vector<double>& labels);

double mean_loss_score(LossKind loss, const std::vector<double>& scores,
                       const std::vector<double>& labels);

void score_dataset(const Dataset& ds, const std::map<std::uint64_t, double>& w,
                   std::vector<double>* scores, std::vector<double>* labels);

// ---------------------------------------------------------------------------

enum class SweepAxis { gravity, threshold };
SweepAxis sweep_axis_from_string(std::string_view s);

struct SweepPoint {
  double value = 0.0;  // the grid value (g or theta)
  bool failed = false;
  std::string error;
  std::uint64_t nnz = 0;
  double auc = 0.0;
  double accuracy = 0.0;
  double mean_loss = 0.0;
  double auc_ratio = 0.0;  // vs. the unregularised baseline point
};

// Trains one model per grid value (plus an unregularised baseline as the
// first row) and evaluates on the held-out set. Points run in parallel when
// jobs > 1; a diverging point is recorded as failed, not fatal. Rows come
// back sorted by nnz ascending (baseline first on ties).
std::vector<SweepPoint> sweep_frontier(const Dataset& train_set,
                                       const Dataset& eval_set,
                                       const LearnerConfig& base,
                                       SweepAxis axis,
                                       const std::vector<double>& grid,
                                       int jobs = 1);

void write_sweep_csv(std::ostream& out, SweepAxis axis,
                     const std::vector<SweepPoint>& rows);

// ---------------------------------------------------------------------------

enum class CvMetric { auc, accuracy, mean_loss };
CvMetric cv_metric_from_string(std::string_view s);

struct CvRow {
  LearnerConfig cfg;
  double metric_mean = 0.0;   // across folds (mean_loss is negated so that
  double metric_se = 0.0;     // larger is always better)
  double nnz_mean = 0.0;
  bool failed = false;
};

struct CvPlan {
  std::uint64_t folds = 10;
  std::vector<double> eta_grid;
  std::vector<double> g_grid;
  std::vector<std::uint64_t> passes_grid;
  std::vector<double> pass_decay_grid;
  CvMetric metric = CvMetric::auc;
  double within = 0.01;  // relative slack off the best mean metric
  std::uint64_t seed = 0;
};

struct CvOutcome {
  LearnerConfig best;
  std::size_t best_row = 0;
  std::vector<CvRow> rows;
};

// K-fold CV over the cartesian grid. Selection: among configs whose mean
// metric is within `within` (relative) of the best, prefer the sparsest
// (smallest mean nnz), breaking ties toward larger g. Folds are formed by a
// seeded shuffle, fixed across configs. Grid points run in parallel when
// jobs > 1.
CvOutcome cross_validate(const Dataset& ds, const LearnerConfig& base,
                         const CvPlan& plan, int jobs = 1);

void write_cv_csv(std::ostream& out, const CvOutcome& o);

}  // namespace sparsegd

#include "sparsegd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "sparsegd/rng.hpp"

namespace sparsegd {

double auc_score(const std::vector<double>& scores,
                 const std::vector<double>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("auc: need equally sized, nonempty inputs");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0)
      throw std::invalid_argument("auc: labels must be -1/+1");
    n_pos += labels[i] == 1.0;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("auc: need both classes");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks: every member of a tie run gets the run's average rank, so two
  // examples with equal scores contribute half a concordant pair.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1.0) pos_rank_sum += midrank;
    i = j;
  }
  double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) /
         (np * static_cast<double>(n_neg));
}

double accuracy_score(const std::vector<double>& scores,
                      const std::vector<double>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("accuracy: need equally sized, nonempty inputs");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double pred = scores[i] > 0.0 ? 1.0 : -1.0;
    hit += pred == labels[i];
  }
  return static_cast<double>(hit) / static_cast<double>(scores.size());
}

double mean_loss_score(LossKind loss, const std::vector<double>& scores,
                       const std::vector<double>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::invalid_argument("mean_loss: need equally sized, nonempty inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    s += loss_value(loss, scores[i], labels[i]);
  return s / static_cast<double>(scores.size());
}

void score_dataset(const Dataset& ds, const std::map<std::uint64_t, double>& w,
                   std::vector<double>* scores, std::vector<double>* labels) {
  scores->clear();
  labels->clear();
  scores->reserve(ds.size());
  labels->reserve(ds.size());
  for (const auto& ex : ds) {
    double p = 0.0;
    for (const auto& [j, x] : ex.features) {
      auto it = w.find(j);
      if (it != w.end()) p += it->second * x;
    }
    scores->push_back(p);
    labels->push_back(ex.label);
  }
}

SweepAxis sweep_axis_from_string(std::string_view s) {
  if (s == "g") return SweepAxis::gravity;
  if (s == "theta") return SweepAxis::threshold;
  throw std::invalid_argument("unknown sweep axis: " + std::string(s));
}

namespace {

void eval_point(const Dataset& train_set, const Dataset& eval_set,
                const LearnerConfig& cfg, SweepPoint* pt) {
  try {
    TrainOptions opt;
    opt.keep_trace = false;
    TrainResult r = train(train_set, cfg, opt);
    pt->nnz = r.final_weights.size();
    std::vector<double> scores, labels;
    score_dataset(eval_set, r.final_weights, &scores, &labels);
    pt->mean_loss = mean_loss_score(cfg.loss, scores, labels);
    try {
      pt->auc = auc_score(scores, labels);
      pt->accuracy = accuracy_score(scores, labels);
    } catch (const std::invalid_argument&) {
      pt->auc = std::nan("");  // regression targets: rank metrics undefined
      pt->accuracy = std::nan("");
    }
  } catch (const std::exception& e) {
    pt->failed = true;
    pt->error = e.what();
  }
}

}  // namespace

std::vector<SweepPoint> sweep_frontier(const Dataset& train_set,
                                       const Dataset& eval_set,
                                       const LearnerConfig& base,
                                       SweepAxis axis,
                                       const std::vector<double>& grid,
                                       int jobs) {
  if (grid.empty()) throw ConfigError("empty sweep grid");
  std::vector<LearnerConfig> cfgs;
  cfgs.reserve(grid.size() + 1);
  {
    LearnerConfig baseline = base;  // no-shrink reference point
    if (axis == SweepAxis::gravity)
      baseline.g = 0.0;
    else
      baseline.theta = 0.0;
    cfgs.push_back(baseline);
  }
  for (double v : grid) {
    LearnerConfig c = base;
    if (axis == SweepAxis::gravity)
      c.g = v;
    else
      c.theta = v;
    cfgs.push_back(c);
  }

  std::vector<SweepPoint> rows(cfgs.size());
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(cfgs.size()); ++i) {
    rows[i].value = axis == SweepAxis::gravity ? cfgs[i].g : cfgs[i].theta;
    eval_point(train_set, eval_set, cfgs[i], &rows[i]);
  }

  const SweepPoint& baseline = rows[0];
  for (auto& r : rows)
    r.auc_ratio = (!baseline.failed && baseline.auc > 0.0 && !r.failed)
                      ? r.auc / baseline.auc
                      : std::nan("");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepPoint& a, const SweepPoint& b) {
                     return a.nnz < b.nnz;
                   });
  return rows;
}

void write_sweep_csv(std::ostream& out, SweepAxis axis,
                     const std::vector<SweepPoint>& rows) {
  out << (axis == SweepAxis::gravity ? "g" : "theta")
      << ",nnz,auc,accuracy,mean_loss,auc_ratio,failed\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%llu,%.17g,%.17g,%.17g,%.17g,%d\n",
                  r.value, static_cast<unsigned long long>(r.nnz), r.auc,
                  r.accuracy, r.mean_loss, r.auc_ratio, r.failed ? 1 : 0);
    out << buf;
  }
}

CvMetric cv_metric_from_string(std::string_view s) {
  if (s == "auc") return CvMetric::auc;
  if (s == "accuracy") return CvMetric::accuracy;
  if (s == "loss") return CvMetric::mean_loss;
  throw std::invalid_argument("unknown cv metric: " + std::string(s));
}

CvOutcome cross_validate(const Dataset& ds, const LearnerConfig& base,
                         const CvPlan& plan, int jobs) {
  if (plan.folds < 2 || plan.folds > ds.size())
    throw ConfigError("folds must be in [2, n]");
  auto pick = [](const std::vector<double>& grid, double fallback) {
    return grid.empty() ? std::vector<double>{fallback} : grid;
  };
  std::vector<double> etas = pick(plan.eta_grid, base.eta);
  std::vector<double> gs = pick(plan.g_grid, base.g);
  std::vector<std::uint64_t> passes =
      plan.passes_grid.empty() ? std::vector<std::uint64_t>{base.passes}
                               : plan.passes_grid;
  std::vector<double> decays = pick(plan.pass_decay_grid, base.pass_lr_decay);

  // Fold assignment: fixed across configs so every row sees the same splits.
  std::vector<std::uint32_t> fold_of(ds.size());
  {
    std::vector<std::size_t> perm(ds.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rng = make_engine(plan.seed, "folds");
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t pos = 0; pos < perm.size(); ++pos)
      fold_of[perm[pos]] = static_cast<std::uint32_t>(pos % plan.folds);
  }

  CvOutcome out;
  for (double e : etas)
    for (double g : gs)
      for (std::uint64_t p : passes)
        for (double dec : decays) {
          CvRow row;
          row.cfg = base;
          row.cfg.eta = e;
          row.cfg.g = g;
          row.cfg.passes = p;
          row.cfg.pass_lr_decay = dec;
          out.rows.push_back(std::move(row));
        }

#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : 1)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(out.rows.size());
       ++r) {
    CvRow& row = out.rows[r];
    std::vector<double> metrics;
    double nnz_sum = 0.0;
    try {
      for (std::uint32_t f = 0; f < plan.folds; ++f) {
        Dataset tr, ev;
        for (std::size_t i = 0; i < ds.size(); ++i)
          (fold_of[i] == f ? ev : tr).push_back(ds[i]);
        TrainOptions opt;
        opt.keep_trace = false;
        TrainResult res = train(tr, row.cfg, opt);
        nnz_sum += static_cast<double>(res.final_weights.size());
        std::vector<double> scores, labels;
        score_dataset(ev, res.final_weights, &scores, &labels);
        switch (plan.metric) {
          case CvMetric::auc: metrics.push_back(auc_score(scores, labels)); break;
          case CvMetric::accuracy:
            metrics.push_back(accuracy_score(scores, labels));
            break;
          case CvMetric::mean_loss:
            metrics.push_back(-mean_loss_score(row.cfg.loss, scores, labels));
            break;
        }
      }
      double m = std::accumulate(metrics.begin(), metrics.end(), 0.0) /
                 static_cast<double>(metrics.size());
      double var = 0.0;
      for (double v : metrics) var += (v - m) * (v - m);
      var /= std::max<double>(1.0, static_cast<double>(metrics.size() - 1));
      row.metric_mean = m;
      row.metric_se = std::sqrt(var / static_cast<double>(metrics.size()));
      row.nnz_mean = nnz_sum / static_cast<double>(plan.folds);
    } catch (const std::exception&) {
      row.failed = true;
    }
  }

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : out.rows)
    if (!r.failed) best = std::max(best, r.metric_mean);
  if (!std::isfinite(best)) throw ConfigError("every cv configuration failed");

  const double cutoff = best - plan.within * std::abs(best);
  std::size_t chosen = out.rows.size();
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    const CvRow& row = out.rows[r];
    if (row.failed || row.metric_mean < cutoff) continue;
    if (chosen == out.rows.size()) {
      chosen = r;
      continue;
    }
    const CvRow& cur = out.rows[chosen];
    if (row.nnz_mean < cur.nnz_mean ||
        (row.nnz_mean == cur.nnz_mean && row.cfg.g > cur.cfg.g))
      chosen = r;
  }
  out.best_row = chosen;
  out.best = out.rows[chosen].cfg;
  return out;
}

void write_cv_csv(std::ostream& out, const CvOutcome& o) {
  out << "eta,g,passes,pass_lr_decay,metric_mean,metric_se,nnz_mean,failed,"
         "selected\n";
  char buf[256];
  for (std::size_t r = 0; r < o.rows.size(); ++r) {
    const CvRow& row = o.rows[r];
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%llu,%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                  row.cfg.eta, row.cfg.g,
                  static_cast<unsigned long long>(row.cfg.passes),
                  row.cfg.pass_lr_decay, row.metric_mean, row.metric_se,
                  row.nnz_mean, row.failed ? 1 : 0, r == o.best_row ? 1 : 0);
    out << buf;
  }
}

}  // namespace sparsegd

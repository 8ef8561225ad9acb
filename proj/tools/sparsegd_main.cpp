#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "sparsegd/dataset_gen.hpp"
#include "sparsegd/eager.hpp"
#include "sparsegd/eval.hpp"
#include "sparsegd/io.hpp"
#include "sparsegd/learner.hpp"
#include "sparsegd/model_io.hpp"
#include "sparsegd/rng.hpp"
#include "sparsegd/verify.hpp"

namespace {

using namespace sparsegd;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;      // config / parse / I-O problems
constexpr int kExitDiverged = 2;   // non-finite prediction or loss
constexpr int kExitViolated = 4;   // a checked guarantee failed to hold

struct TrainFlags {
  std::string data;
  std::string rule = "tg";
  std::string loss = "square";
  std::string labels = "pm1";
  std::string sampling = "sequential";
  double eta = 0.1;
  double g = 0.0;
  double theta = std::numeric_limits<double>::infinity();
  std::uint64_t K = 1;
  std::uint64_t passes = 1;
  double lr_decay_power = 0.0;
  double pass_lr_decay = 1.0;
  std::uint64_t seed = 0;
  bool vw_normalize = false;
  bool vw_clip = false;

  LearnerConfig to_config() const {
    LearnerConfig cfg;
    cfg.rule = rule_from_string(rule);
    cfg.loss = loss_from_string(loss);
    cfg.sampling = sampling_from_string(sampling);
    cfg.eta = eta;
    cfg.g = g;
    cfg.theta = theta;
    cfg.K = K;
    cfg.passes = passes;
    cfg.lr_decay_power = lr_decay_power;
    cfg.pass_lr_decay = pass_lr_decay;
    cfg.seed = seed;
    cfg.vw_normalize = vw_normalize;
    cfg.vw_clip = vw_clip;
    cfg.validate();
    return cfg;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags* f) {
  cmd->add_option("--data", f->data, "input examples (svmlight text, .gz ok)")
      ->required();
  cmd->add_option("--rule", f->rule, "tg | rounding | subgrad")
      ->default_val(f->rule);
  cmd->add_option("--loss", f->loss, "square | logistic | hinge")
      ->default_val(f->loss);
  cmd->add_option("--labels", f->labels, "pm1 | 01 | raw")
      ->default_val(f->labels);
  cmd->add_option("--sampling", f->sampling, "sequential | uniform")
      ->default_val(f->sampling);
  cmd->add_option("--eta", f->eta, "learning rate, (0,1]")->default_val(f->eta);
  cmd->add_option("--g", f->g, "shrinkage intensity per trial, >= 0")
      ->default_val(f->g);
  cmd->add_option("--theta", f->theta, "shrinkage cap (inf = uncapped)")
      ->default_val(f->theta);
  cmd->add_option("--K", f->K, "shrink every K-th trial")->default_val(f->K);
  cmd->add_option("--passes", f->passes, "sweeps over the data")
      ->default_val(f->passes);
  cmd->add_option("--lr-decay-power", f->lr_decay_power,
                  "eta_i ~ i^-p, p in [0,1]")
      ->default_val(f->lr_decay_power);
  cmd->add_option("--pass-lr-decay", f->pass_lr_decay,
                  "eta multiplier per completed pass, (0,1]")
      ->default_val(f->pass_lr_decay);
  cmd->add_option("--seed", f->seed, "master seed")->default_val(f->seed);
  cmd->add_flag("--vw-normalize", f->vw_normalize,
                "divide predictions by sqrt(#features)");
  cmd->add_flag("--vw-clip", f->vw_clip, "clamp predictions to [0,1]");
}

std::string manifest_text(const TrainFlags& f, const LearnerConfig& cfg,
                          const DatasetMeta& meta, const TrainResult& res,
                          std::uint32_t data_crc, std::uint32_t model_crc) {
  char buf[1024];
  std::string out;
  auto add = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += buf;
  };
  add("%s", "tool sparsegd-train 1\n");
  add("data %s\n", f.data.c_str());
  add("data_crc32 %08x\n", data_crc);
  add("n %" PRIu64 "\n", meta.n_examples);
  add("max_index %" PRIu64 "\n", meta.max_feature_index);
  add("rule %s\n", to_string(cfg.rule).c_str());
  add("loss %s\n", to_string(cfg.loss).c_str());
  add("labels %s\n", f.labels.c_str());
  add("sampling %s\n", to_string(cfg.sampling).c_str());
  add("eta %.17g\n", cfg.eta);
  add("g %.17g\n", cfg.g);
  add("theta %.17g\n", cfg.theta);
  add("K %" PRIu64 "\n", cfg.K);
  add("passes %" PRIu64 "\n", cfg.passes);
  add("lr_decay_power %.17g\n", cfg.lr_decay_power);
  add("pass_lr_decay %.17g\n", cfg.pass_lr_decay);
  add("seed %" PRIu64 "\n", cfg.seed);
  add("vw_normalize %d\n", cfg.vw_normalize ? 1 : 0);
  add("vw_clip %d\n", cfg.vw_clip ? 1 : 0);
  add("steps %" PRIu64 "\n", res.steps);
  add("final_nnz %zu\n", res.final_weights.size());
  add("peak_nnz %" PRIu64 "\n", res.peak_nnz);
  add("map_ops %" PRIu64 "\n", res.map_ops);
  add("model_crc32 %08x\n", model_crc);
  // Wall clock stays last so tooling can compare manifests up to this line.
  add("wall_clock_sec %.6f\n", res.wall_seconds);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out.good()) throw IoError("write error on " + path);
}

std::string fmt17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------- train

int run_train(const TrainFlags& f, const std::string& model_path,
              std::string manifest_path, const std::string& trace_path,
              const std::string& average_path) {
  LearnerConfig cfg = f.to_config();
  Dataset ds = load_dataset(f.data, label_map_from_string(f.labels));
  if (ds.empty()) throw IoError("no examples in " + f.data);
  DatasetMeta meta = scan_meta(ds);

  TrainOptions opt;
  opt.track_average = !average_path.empty();
  opt.keep_trace = !trace_path.empty();
  TrainResult res = train(ds, cfg, opt);

  save_model(model_path, make_model(cfg, res.final_weights));
  if (!average_path.empty())
    save_model(average_path, make_model(cfg, res.averaged));
  if (!trace_path.empty()) {
    std::string text = "step loss eta gravity shrunk_mass nnz\n";
    char buf[192];
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
      const StepRecord& r = res.trace[i];
      std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g %.17g %.17g %" PRIu64 "\n",
                    i + 1, r.loss, r.eta, r.gravity, r.shrunk_mass,
                    r.nnz_after);
      text += buf;
    }
    write_file(trace_path, text);
  }

  if (manifest_path.empty()) manifest_path = model_path + ".manifest";
  write_file(manifest_path,
             manifest_text(f, cfg, meta, res, crc32_file(f.data),
                           crc32_file(model_path)));

  std::printf("trained steps=%" PRIu64 " nnz=%zu peak_nnz=%" PRIu64
              " wall=%.3fs model=%s\n",
              res.steps, res.final_weights.size(), res.peak_nnz,
              res.wall_seconds, model_path.c_str());
  return kExitOk;
}

// -------------------------------------------------------------------- predict

int run_predict(const std::string& model_path, const std::string& data,
                const std::string& labels, const std::string& scores_path,
                const std::string& metrics_path) {
  Model m = load_model(model_path);
  LabelMap map = label_map_from_string(labels);

  std::vector<double> scores, labs;
  bool all_labeled = true;
  {
    LineReader rd(data);
    std::string line;
    while (rd.next(line)) {
      if (line.empty() || line[0] == '#') continue;
      bool had = false;
      SparseExample ex = parse_example(line, map, false, &had, rd.line_no());
      all_labeled = all_labeled && had;
      double p = 0.0;
      for (const auto& [j, x] : ex.features) {
        auto it = m.weights.find(j);
        if (it != m.weights.end()) p += it->second * x;
      }
      scores.push_back(p);
      labs.push_back(ex.label);
    }
  }
  if (scores.empty()) throw IoError("no examples in " + data);

  {
    std::string text;
    for (double s : scores) text += fmt17(s) + "\n";
    if (scores_path.empty() || scores_path == "-")
      std::fwrite(text.data(), 1, text.size(), stdout);
    else
      write_file(scores_path, text);
  }

  if (!metrics_path.empty()) {
    if (!all_labeled)
      throw IoError("metrics requested but some examples lack labels");
    std::string text;
    text += "n " + std::to_string(scores.size()) + "\n";
    text += "mean_loss " + fmt17(mean_loss_score(m.loss, scores, labs)) + "\n";
    if (loss_is_classification(m.loss) || map != LabelMap::raw) {
      text += "accuracy " + fmt17(accuracy_score(scores, labs)) + "\n";
      text += "auc " + fmt17(auc_score(scores, labs)) + "\n";
    }
    if (metrics_path == "-")
      std::fwrite(text.data(), 1, text.size(), stdout);
    else
      write_file(metrics_path, text);
  }
  return kExitOk;
}

// -------------------------------------------------------------- gen-synthetic

int run_gen(std::uint64_t n, std::uint64_t informative, std::uint64_t noise,
            double noise_p, double label_noise, std::uint64_t seed,
            const std::string& out_path, std::string truth_path) {
  SyntheticSpec spec;
  spec.n = n;
  spec.informative = informative;
  spec.noise_features = noise;
  spec.noise_p = noise_p;
  spec.label_noise = label_noise;
  spec.seed = seed;
  SyntheticData data = generate_synthetic(spec);

  std::string text;
  for (const auto& ex : data.examples) text += format_example(ex) + "\n";
  write_file(out_path, text);

  if (truth_path.empty()) truth_path = out_path + ".truth";
  Model truth;  // header fields are placeholders; only weights matter here
  truth.eta = 1.0;
  for (const auto& [j, w] : data.true_weights) truth.weights.emplace(j, w);
  save_model(truth_path, truth);

  std::printf("generated n=%" PRIu64 " informative=%" PRIu64
              " noise=%" PRIu64 " -> %s (truth: %s)\n",
              n, informative, noise, out_path.c_str(), truth_path.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------- sweep

int run_sweep(const TrainFlags& f, const std::string& axis_str,
              const std::vector<double>& grid, const std::string& eval_path,
              double holdout, int jobs, const std::string& out_path) {
  LearnerConfig cfg = f.to_config();
  SweepAxis axis = sweep_axis_from_string(axis_str);
  LabelMap map = label_map_from_string(f.labels);
  Dataset all = load_dataset(f.data, map);

  Dataset train_set, eval_set;
  if (!eval_path.empty()) {
    train_set = std::move(all);
    eval_set = load_dataset(eval_path, map);
  } else {
    if (!(holdout > 0.0 && holdout < 1.0))
      throw ConfigError("--holdout must be in (0,1) when --eval is absent");
    std::vector<std::size_t> perm(all.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto rng = make_engine(cfg.seed, "holdout");
    std::shuffle(perm.begin(), perm.end(), rng);
    std::size_t n_eval = std::max<std::size_t>(
        1, static_cast<std::size_t>(holdout * static_cast<double>(all.size())));
    for (std::size_t pos = 0; pos < perm.size(); ++pos)
      (pos < n_eval ? eval_set : train_set).push_back(std::move(all[perm[pos]]));
  }
  if (train_set.empty() || eval_set.empty())
    throw ConfigError("need nonempty train and eval sets");

  auto rows = sweep_frontier(train_set, eval_set, cfg, axis, grid, jobs);
  std::ostringstream csv;
  write_sweep_csv(csv, axis, rows);
  if (out_path.empty() || out_path == "-")
    std::fwrite(csv.str().data(), 1, csv.str().size(), stdout);
  else
    write_file(out_path, csv.str());

  for (const auto& r : rows)
    if (r.failed)
      std::fprintf(stderr, "point %s=%.17g failed: %s\n",
                   axis == SweepAxis::gravity ? "g" : "theta", r.value,
                   r.error.c_str());
  bool any_ok = false;
  for (const auto& r : rows) any_ok = any_ok || !r.failed;
  return any_ok ? kExitOk : kExitUsage;
}

// ------------------------------------------------------------------------- cv

int run_cv(const TrainFlags& f, std::uint64_t folds,
           const std::vector<double>& eta_grid,
           const std::vector<double>& g_grid,
           const std::vector<std::uint64_t>& passes_grid,
           const std::vector<double>& decay_grid, const std::string& metric,
           double within, int jobs, const std::string& out_path) {
  LearnerConfig base = f.to_config();
  Dataset ds = load_dataset(f.data, label_map_from_string(f.labels));

  CvPlan plan;
  plan.folds = folds;
  plan.eta_grid = eta_grid;
  plan.g_grid = g_grid;
  plan.passes_grid = passes_grid;
  plan.pass_decay_grid = decay_grid;
  plan.metric = cv_metric_from_string(metric);
  plan.within = within;
  plan.seed = base.seed;

  CvOutcome o = cross_validate(ds, base, plan, jobs);
  std::ostringstream csv;
  write_cv_csv(csv, o);
  if (out_path.empty() || out_path == "-")
    std::fwrite(csv.str().data(), 1, csv.str().size(), stdout);
  else
    write_file(out_path, csv.str());

  const CvRow& best = o.rows[o.best_row];
  std::printf("selected eta=%s g=%s passes=%" PRIu64
              " pass_lr_decay=%s metric=%s nnz=%.1f\n",
              fmt17(best.cfg.eta).c_str(), fmt17(best.cfg.g).c_str(),
              best.cfg.passes, fmt17(best.cfg.pass_lr_decay).c_str(),
              fmt17(best.metric_mean).c_str(), best.nnz_mean);
  return kExitOk;
}

// -------------------------------------------------------------- verify-regret

int run_verify(const TrainFlags& f, const std::vector<std::uint64_t>& prefixes,
               std::uint64_t step_samples, const std::string& comparators,
               const std::string& trace_path, const std::string& report_path) {
  LearnerConfig cfg = f.to_config();
  Dataset ds = load_dataset(f.data, label_map_from_string(f.labels));
  DatasetMeta meta = scan_meta(ds);
  const std::uint64_t d = meta.any_features ? meta.max_feature_index + 1 : 1;
  if (d > 100000)
    throw ConfigError("verify-regret replays densely; too many features");

  RecordedRun run = record_run(ds, cfg, step_samples);
  std::string report;
  bool all_hold = true;

  // Optional cross-check against a trace produced by `train`: the per-trial
  // losses must match the dense replay, otherwise the trace (or the flags)
  // do not describe this run.
  if (!trace_path.empty()) {
    LineReader rd(trace_path);
    std::string line;
    if (!rd.next(line)) throw IoError("empty trace " + trace_path);
    std::uint64_t rows = 0;
    bool consistent = true;
    double worst = 0.0;
    while (rd.next(line) && rows < run.steps) {
      std::istringstream is(line);
      std::uint64_t step;
      double loss;
      if (!(is >> step >> loss)) throw IoError("bad trace line: " + line);
      double diff = std::abs(loss - run.step_loss[rows]);
      worst = std::max(worst, diff);
      if (diff > 1e-9) consistent = false;
      ++rows;
    }
    if (rows != run.steps) consistent = false;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "trace-consistency rows=%" PRIu64 " max_diff=%.3g %s\n",
                  rows, worst, consistent ? "OK" : "MISMATCH");
    report += buf;
    all_hold = all_hold && consistent;
  }

  // Comparator vectors.
  std::vector<std::pair<std::string, std::vector<double>>> bars;
  std::istringstream cs(comparators);
  std::string name;
  while (std::getline(cs, name, ',')) {
    if (name == "zero") {
      bars.emplace_back(name, std::vector<double>(d, 0.0));
    } else if (name == "final") {
      bars.emplace_back(name, run.final_weights);
    } else if (name == "random") {
      auto rng = make_engine(cfg.seed, "comparator");
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::vector<double> w(d);
      for (auto& v : w) v = gauss(rng);
      bars.emplace_back(name, std::move(w));
    } else if (name == "oracle") {
      if (d > 64 || ds.size() > 2000) {
        report += "regret oracle SKIPPED (desk-scale only)\n";
        continue;
      }
      double g_obj = static_cast<double>(cfg.K) * cfg.g;
      bars.emplace_back(name, l1_oracle(ds, cfg.loss, g_obj, d).w);
    } else {
      throw ConfigError("unknown comparator: " + name);
    }
  }

  std::vector<std::uint64_t> Ts = prefixes;
  if (Ts.empty()) Ts.push_back(run.steps);

  char buf[256];
  std::snprintf(buf, sizeof(buf), "run T=%" PRIu64 " C=%.17g d=%" PRIu64 "\n",
                run.steps, run.C, d);
  report += buf;
  for (const auto& [cname, wbar] : bars) {
    for (std::uint64_t T : Ts) {
      if (T == 0 || T > run.steps)
        throw ConfigError("prefix out of range: " + std::to_string(T));
      GuaranteeReport r = check_regret(run, wbar, T, cname);
      std::snprintf(buf, sizeof(buf),
                    "%s %s T=%" PRIu64 " lhs=%.17g rhs=%.17g margin=%.3g %s\n",
                    r.name.c_str(), cname.c_str(), T, r.lhs, r.rhs, r.margin,
                    r.holds ? "HOLDS" : "VIOLATED");
      report += buf;
      all_hold = all_hold && r.holds;
      if (cfg.loss == LossKind::square) {
        GuaranteeReport q = check_regret_square(run, wbar, T, cname);
        std::snprintf(buf, sizeof(buf),
                      "%s %s T=%" PRIu64 " lhs=%.17g rhs=%.17g margin=%.3g %s\n",
                      q.name.c_str(), cname.c_str(), T, q.lhs, q.rhs, q.margin,
                      q.holds ? "HOLDS" : "VIOLATED");
        report += buf;
        all_hold = all_hold && q.holds;
      }
    }
    if (step_samples > 0) {
      GuaranteeReport r = check_step_inequality(run, wbar, cname);
      std::snprintf(buf, sizeof(buf),
                    "%s %s samples=%zu worst_margin=%.3g %s\n", r.name.c_str(),
                    cname.c_str(), run.step_samples.size(), r.margin,
                    r.holds ? "HOLDS" : "VIOLATED");
      report += buf;
      all_hold = all_hold && r.holds;
    }
  }

  if (report_path.empty() || report_path == "-")
    std::fwrite(report.data(), 1, report.size(), stdout);
  else
    write_file(report_path, report);
  return all_hold ? kExitOk : kExitViolated;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse online learner with scheduled shrinkage"};
  app.require_subcommand(1);

  // train
  TrainFlags tf;
  std::string model_path = "model.txt", manifest_path, trace_path, avg_path;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  add_train_flags(train_cmd, &tf);
  train_cmd->add_option("--model", model_path, "model output path")
      ->default_val(model_path);
  train_cmd->add_option("--manifest", manifest_path,
                        "manifest path (default <model>.manifest)");
  train_cmd->add_option("--trace", trace_path, "per-step trace output");
  train_cmd->add_option("--average-model", avg_path,
                        "also write the averaged-iterate model here");

  // predict
  std::string p_model, p_data, p_labels = "pm1", p_scores, p_metrics;
  CLI::App* predict_cmd = app.add_subcommand("predict", "score examples");
  predict_cmd->add_option("--model", p_model)->required();
  predict_cmd->add_option("--data", p_data)->required();
  predict_cmd->add_option("--labels", p_labels, "pm1 | 01 | raw")
      ->default_val(p_labels);
  predict_cmd->add_option("--scores", p_scores, "scores output ('-' = stdout)");
  predict_cmd->add_option("--metrics", p_metrics,
                          "metrics output; requires labeled data");

  // gen-synthetic
  std::uint64_t g_n = 1000, g_inf = 10, g_noise = 0, g_seed = 0;
  double g_noise_p = 0.05, g_label_noise = 0.0;
  std::string g_out, g_truth;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-synthetic", "write a synthetic dataset");
  gen_cmd->add_option("--n", g_n)->default_val(g_n);
  gen_cmd->add_option("--informative", g_inf)->default_val(g_inf);
  gen_cmd->add_option("--noise-features", g_noise)->default_val(g_noise);
  gen_cmd->add_option("--noise-p", g_noise_p)->default_val(g_noise_p);
  gen_cmd->add_option("--label-noise", g_label_noise)->default_val(g_label_noise);
  gen_cmd->add_option("--seed", g_seed)->default_val(g_seed);
  gen_cmd->add_option("--out", g_out)->required();
  gen_cmd->add_option("--truth", g_truth, "sidecar path (default <out>.truth)");

  // sweep
  TrainFlags sf;
  std::string s_axis = "g", s_eval, s_out;
  std::vector<double> s_grid;
  double s_holdout = 0.2;
  int s_jobs = 1;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "trace a sparsity/quality frontier");
  add_train_flags(sweep_cmd, &sf);
  sweep_cmd->add_option("--axis", s_axis, "g | theta")->default_val(s_axis);
  sweep_cmd->add_option("--grid", s_grid, "comma-separated grid values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--eval", s_eval, "held-out set (else --holdout split)");
  sweep_cmd->add_option("--holdout", s_holdout)->default_val(s_holdout);
  sweep_cmd->add_option("--jobs", s_jobs)->default_val(s_jobs);
  sweep_cmd->add_option("--out", s_out, "csv output ('-' = stdout)");

  // cv
  TrainFlags cf;
  std::uint64_t c_folds = 10;
  std::vector<double> c_eta, c_g, c_decay;
  std::vector<std::uint64_t> c_passes;
  std::string c_metric = "auc", c_out;
  double c_within = 0.01;
  int c_jobs = 1;
  CLI::App* cv_cmd = app.add_subcommand("cv", "cross-validated grid search");
  add_train_flags(cv_cmd, &cf);
  cv_cmd->add_option("--folds", c_folds)->default_val(c_folds);
  cv_cmd->add_option("--eta-grid", c_eta)->delimiter(',');
  cv_cmd->add_option("--g-grid", c_g)->delimiter(',');
  cv_cmd->add_option("--passes-grid", c_passes)->delimiter(',');
  cv_cmd->add_option("--pass-decay-grid", c_decay)->delimiter(',');
  cv_cmd->add_option("--metric", c_metric, "auc | accuracy | loss")
      ->default_val(c_metric);
  cv_cmd->add_option("--within", c_within,
                     "relative slack for the sparsest-within-tolerance pick")
      ->default_val(c_within);
  cv_cmd->add_option("--jobs", c_jobs)->default_val(c_jobs);
  cv_cmd->add_option("--out", c_out, "csv output ('-' = stdout)");

  // verify-regret
  TrainFlags vf;
  std::vector<std::uint64_t> v_prefixes;
  std::uint64_t v_step = 0;
  std::string v_comparators = "zero,final", v_trace, v_report;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify-regret", "replay a run densely and check its guarantees");
  add_train_flags(verify_cmd, &vf);
  verify_cmd->add_option("--prefixes", v_prefixes,
                         "horizons T to check (default: the full run)")
      ->delimiter(',');
  verify_cmd->add_option("--step-samples", v_step,
                         "transitions to spot-check per comparator");
  verify_cmd
      ->add_option("--comparators", v_comparators,
                   "comma list of zero|final|oracle|random")
      ->default_val(v_comparators);
  verify_cmd->add_option("--trace", v_trace,
                         "trace from `train` to cross-check losses against");
  verify_cmd->add_option("--report", v_report, "report output ('-' = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_cmd->parsed())
      return run_train(tf, model_path, manifest_path, trace_path, avg_path);
    if (predict_cmd->parsed())
      return run_predict(p_model, p_data, p_labels, p_scores, p_metrics);
    if (gen_cmd->parsed())
      return run_gen(g_n, g_inf, g_noise, g_noise_p, g_label_noise, g_seed,
                     g_out, g_truth);
    if (sweep_cmd->parsed())
      return run_sweep(sf, s_axis, s_grid, s_eval, s_holdout, s_jobs, s_out);
    if (cv_cmd->parsed())
      return run_cv(cf, c_folds, c_eta, c_g, c_passes, c_decay, c_metric,
                    c_within, c_jobs, c_out);
    if (verify_cmd->parsed())
      return run_verify(vf, v_prefixes, v_step, v_comparators, v_trace,
                        v_report);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "diverged: %s\n", e.what());
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}

// Benchmarks the lazy sparse engine against the dense eager reference at
// growing dimension, and a grid sweep run serially vs. with OpenMP workers.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "sparsegd/dataset_gen.hpp"
#include "sparsegd/eager.hpp"
#include "sparsegd/eval.hpp"
#include "sparsegd/learner.hpp"
#include "sparsegd/rng.hpp"

using namespace sparsegd;

namespace {

double now_sec() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

Dataset spread_indices(const Dataset& ds, std::uint64_t stride) {
  Dataset out = ds;
  for (auto& ex : out)
    for (auto& [j, x] : ex.features) j *= stride;
  return out;
}

void bench_engines(std::uint64_t n, std::uint64_t k, std::uint64_t passes) {
  SyntheticSpec spec;
  spec.n = n;
  spec.informative = 10;
  spec.noise_features = 200;
  spec.noise_p = static_cast<double>(k) / 200.0;
  spec.label_noise = 0.1;
  spec.seed = 7;
  Dataset base = generate_synthetic(spec).examples;

  LearnerConfig cfg;
  cfg.rule = Rule::truncated_gradient;
  cfg.loss = LossKind::logistic;
  cfg.eta = 0.05;
  cfg.g = 0.001;
  cfg.K = 10;
  cfg.passes = passes;

  std::printf("engine comparison: n=%llu passes=%llu (~%llu active features/example)\n",
              (unsigned long long)n, (unsigned long long)passes,
              (unsigned long long)k);
  std::printf("%12s %14s %14s %10s\n", "max_index", "lazy (s)", "eager (s)",
              "ratio");
  for (std::uint64_t stride : {1ull, 100ull, 10000ull}) {
    Dataset ds = spread_indices(base, stride);
    std::uint64_t d = scan_meta(ds).max_feature_index + 1;

    TrainOptions opt;
    opt.keep_trace = false;
    double t0 = now_sec();
    TrainResult lazy = train(ds, cfg, opt);
    double lazy_s = now_sec() - t0;

    t0 = now_sec();
    EagerResult eager = eager_train(ds, cfg, d);
    double eager_s = now_sec() - t0;
    (void)lazy;
    (void)eager;
    std::printf("%12llu %14.4f %14.4f %9.1fx\n", (unsigned long long)(d - 1),
                lazy_s, eager_s, eager_s / lazy_s);
  }
}

void bench_sweep(int max_jobs) {
  SyntheticSpec spec;
  spec.n = 3000;
  spec.informative = 10;
  spec.noise_features = 500;
  spec.noise_p = 0.05;
  spec.label_noise = 0.1;
  spec.seed = 11;
  Dataset all = generate_synthetic(spec).examples;
  Dataset train_set(all.begin(), all.begin() + 2400);
  Dataset eval_set(all.begin() + 2400, all.end());

  LearnerConfig cfg;
  cfg.loss = LossKind::logistic;
  cfg.eta = 0.05;
  cfg.K = 10;
  cfg.passes = 3;
  std::vector<double> grid;
  for (int i = 0; i < 12; ++i) grid.push_back(1e-5 * (1 << i));

  std::printf("\nsweep of %zu grid points (plus baseline):\n", grid.size());
  std::printf("%8s %12s %10s\n", "jobs", "wall (s)", "speedup");
  double serial = 0.0;
  for (int jobs = 1; jobs <= max_jobs; jobs *= 2) {
    double t0 = now_sec();
    auto rows = sweep_frontier(train_set, eval_set, cfg, SweepAxis::gravity,
                               grid, jobs);
    double dt = now_sec() - t0;
    (void)rows;
    if (jobs == 1) serial = dt;
    std::printf("%8d %12.3f %9.2fx\n", jobs, dt, serial / dt);
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t n = 2000, passes = 2;
  int jobs = omp_get_max_threads();
  for (int a = 1; a < argc; ++a) {
    if (!std::strcmp(argv[a], "--n") && a + 1 < argc)
      n = std::strtoull(argv[++a], nullptr, 10);
    else if (!std::strcmp(argv[a], "--passes") && a + 1 < argc)
      passes = std::strtoull(argv[++a], nullptr, 10);
    else if (!std::strcmp(argv[a], "--max-jobs") && a + 1 < argc)
      jobs = static_cast<int>(std::strtoul(argv[++a], nullptr, 10));
    else {
      std::fprintf(stderr, "usage: %s [--n N] [--passes P] [--max-jobs J]\n",
                   argv[0]);
      return 1;
    }
  }
  bench_engines(n, 10, passes);
  bench_sweep(jobs < 1 ? 1 : jobs);
  return 0;
}

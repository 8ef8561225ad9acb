#include "sparsegd/dataset_gen.hpp"

#include <stdexcept>

#include "sparsegd/rng.hpp"

namespace sparsegd {

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n == 0) throw std::invalid_argument("need n > 0");
  if (spec.informative == 0) throw std::invalid_argument("need informative > 0");
  if (spec.noise_p < 0.0 || spec.noise_p > 1.0 || spec.label_noise < 0.0 ||
      spec.label_noise > 1.0)
    throw std::invalid_argument("probabilities must be in [0,1]");

  SyntheticData out;
  auto truth_rng = make_engine(spec.seed, "truth");
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  out.true_weights.reserve(spec.informative);
  for (std::uint64_t j = 0; j < spec.informative; ++j) {
    double w = mag(truth_rng);
    if (truth_rng() & 1u) w = -w;
    out.true_weights.emplace_back(j, w);
  }

  auto x_rng = make_engine(spec.seed, "x");
  auto flip_rng = make_engine(spec.seed, "labels");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  out.examples.resize(spec.n);
  for (auto& ex : out.examples) {
    ex.features.reserve(spec.informative);
    double score = 0.0;
    for (const auto& [j, w] : out.true_weights) {
      double x = gauss(x_rng);
      if (x != 0.0) ex.features.emplace_back(j, x);
      score += w * x;
    }
    ex.label = score >= 0.0 ? 1.0 : -1.0;
    if (spec.label_noise > 0.0 && unit(flip_rng) < spec.label_noise)
      ex.label = -ex.label;
  }

  if (spec.noise_features > 0)
    augment_random_features(out.examples, spec.noise_features, spec.noise_p,
                            substream_seed(spec.seed, "noise"));
  return out;
}

void augment_random_features(Dataset& ds, std::uint64_t count, double p,
                             std::uint64_t seed) {
  if (count == 0 || ds.empty()) return;
  std::uint64_t base = 0;
  for (const auto& ex : ds)
    if (!ex.features.empty())
      base = std::max(base, ex.features.back().first + 1);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    // Per-example engine: the noise pattern of example i does not depend on
    // how many examples precede it.
    auto rng = make_engine(seed, "augment", i);
    for (std::uint64_t j = 0; j < count; ++j)
      if (unit(rng) < p) ds[i].features.emplace_back(base + j, 1.0);
  }
}

}  // namespace sparsegd

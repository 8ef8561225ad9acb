#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sparsegd/example.hpp"

namespace sparsegd {

// Synthetic binary-classification streams: a handful of dense informative
// coordinates determine the label; a large block of rare binary noise
// coordinates provides the clutter a sparsifying learner should strip out.
struct SyntheticSpec {
  std::uint64_t n = 1000;
  std::uint64_t informative = 10;    // indices 0 .. informative-1, N(0,1)
  std::uint64_t noise_features = 0;  // indices informative .. +noise_features-1
  double noise_p = 0.05;             // P(noise coordinate = 1)
  double label_noise = 0.0;          // P(label flipped)
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset examples;
  // The generating weights over the informative block (index, weight).
  std::vector<std::pair<std::uint64_t, double>> true_weights;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Appends `count` binary noise coordinates (each present with prob p) to
// every example, at indices above the current maximum. Existing features are
// untouched, so labels keep their original meaning.
void augment_random_features(Dataset& ds, std::uint64_t count, double p,
                             std::uint64_t seed);

}  // namespace sparsegd

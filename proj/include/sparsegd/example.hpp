#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace sparsegd {

// One labeled instance. Features are (index, value) pairs with strictly
// increasing indices and nonzero finite values; parsers and generators are
// responsible for upholding that.
struct SparseExample {
  double label = 0.0;
  std::vector<std::pair<std::uint64_t, double>> features;

  double squared_norm() const {
    double s = 0.0;
    for (const auto& [j, x] : features) s += x * x;
    return s;
  }
  double norm() const { return std::sqrt(squared_norm()); }
};

using Dataset = std::vector<SparseExample>;

struct DatasetMeta {
  std::uint64_t n_examples = 0;
  std::uint64_t max_feature_index = 0;  // 0 when no features at all
  bool any_features = false;
  double max_norm = 0.0;  // max over examples of |x|
};

inline DatasetMeta scan_meta(const Dataset& ds) {
  DatasetMeta m;
  m.n_examples = ds.size();
  for (const auto& ex : ds) {
    if (!ex.features.empty()) {
      m.any_features = true;
      m.max_feature_index =
          std::max(m.max_feature_index, ex.features.back().first);
    }
    m.max_norm = std::max(m.max_norm, ex.norm());
  }
  return m;
}

}  // namespace sparsegd

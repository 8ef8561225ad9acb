#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sparsegd/learner.hpp"

namespace sparsegd {

// Plain-text model: six header lines (rule, eta, g, theta, K, loss) followed
// by one "index:weight" line per nonzero, sorted by index. Numbers use %.17g
// so save/load round-trips doubles exactly; theta may be the literal "inf".
struct Model {
  Rule rule = Rule::truncated_gradient;
  LossKind loss = LossKind::square;
  double eta = 0.0;
  double g = 0.0;
  double theta = 0.0;
  std::uint64_t K = 1;
  std::map<std::uint64_t, double> weights;
};

std::string format_model(const Model& m);
void save_model(const std::string& path, const Model& m);
Model parse_model(const std::string& text);
Model load_model(const std::string& path);

Model make_model(const LearnerConfig& cfg,
                 const std::map<std::uint64_t, double>& weights);

}  // namespace sparsegd

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sparsegd {

enum class LossKind { square, logistic, hinge };

inline std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::square: return "square";
    case LossKind::logistic: return "logistic";
    case LossKind::hinge: return "hinge";
  }
  return "?";
}

inline LossKind loss_from_string(std::string_view s) {
  if (s == "square") return LossKind::square;
  if (s == "logistic") return LossKind::logistic;
  if (s == "hinge") return LossKind::hinge;
  throw std::invalid_argument("unknown loss: " + std::string(s));
}

inline bool loss_is_classification(LossKind k) {
  return k != LossKind::square;
}

// log(1 + exp(t)) without overflow for large |t|.
inline double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

inline double loss_value(LossKind k, double p, double y) {
  switch (k) {
    case LossKind::square: {
      double d = p - y;
      return d * d;
    }
    case LossKind::logistic:
      return softplus(-p * y);
    case LossKind::hinge:
      return std::max(0.0, 1.0 - p * y);
  }
  return 0.0;
}

// d/dp of loss_value. At the hinge kink (p*y == 1) the flat-side subgradient
// 0 is used, so a correctly-classified boundary point produces no update.
inline double loss_derivative(LossKind k, double p, double y) {
  switch (k) {
    case LossKind::square:
      return 2.0 * (p - y);
    case LossKind::logistic:
      return -y / (1.0 + std::exp(p * y));
    case LossKind::hinge:
      return p * y < 1.0 ? -y : 0.0;
  }
  return 0.0;
}

// Coefficients (A, B) of the gradient-growth bound
//   |grad_w L|^2 <= A * L + B   whenever |x| <= C,
// which each loss satisfies: square (4C^2, 0), logistic (0, C^2),
// hinge (0, C^2). These feed the analytic guarantee checkers.
struct LossConstants {
  double A = 0.0;
  double B = 0.0;
};

inline LossConstants assumption_constants(LossKind k, double C) {
  switch (k) {
    case LossKind::square: return {4.0 * C * C, 0.0};
    case LossKind::logistic: return {0.0, C * C};
    case LossKind::hinge: return {0.0, C * C};
  }
  return {};
}

// Classification losses require labels in {-1, +1}; square accepts any
// finite real target.
inline void validate_label(LossKind k, double y) {
  if (!std::isfinite(y)) throw std::invalid_argument("non-finite label");
  if (loss_is_classification(k) && y != 1.0 && y != -1.0)
    throw std::invalid_argument("classification label must be -1 or +1, got " +
                                std::to_string(y));
}

}  // namespace sparsegd

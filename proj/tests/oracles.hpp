#pragma once

// Independent reference implementations used only by tests. They share no
// code with the library on purpose: plain dense loops, textbook formulas.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sparsegd/example.hpp"

namespace oracles {

inline double loss_deriv(int loss /*0 square, 1 logistic, 2 hinge*/, double p,
                         double y) {
  if (loss == 0) return 2.0 * (p - y);
  if (loss == 1) return -y / (1.0 + std::exp(p * y));
  return p * y < 1.0 ? -y : 0.0;
}

// Dense gradient descent with no shrinkage of any kind: the reference for
// "g = 0 behaves like plain online GD".
inline std::vector<double> plain_gd(const sparsegd::Dataset& ds, int loss,
                                    double eta, std::uint64_t passes,
                                    std::uint64_t d) {
  std::vector<double> w(d, 0.0);
  for (std::uint64_t p = 0; p < passes; ++p) {
    for (const auto& ex : ds) {
      double pred = 0.0;
      for (const auto& [j, x] : ex.features) pred += w[j] * x;
      double dv = loss_deriv(loss, pred, ex.label);
      for (const auto& [j, x] : ex.features) w[j] -= eta * dv * x;
    }
  }
  return w;
}

// Quadratic-time AUC: count concordant positive/negative pairs, half for
// ties.
inline double brute_auc(const std::vector<double>& scores,
                        const std::vector<double>& labels) {
  double num = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t a = 0; a < scores.size(); ++a) {
    if (labels[a] != 1.0) continue;
    for (std::size_t b = 0; b < scores.size(); ++b) {
      if (labels[b] != -1.0) continue;
      ++pairs;
      if (scores[a] > scores[b])
        num += 1.0;
      else if (scores[a] == scores[b])
        num += 0.5;
    }
  }
  if (pairs == 0) throw std::invalid_argument("brute_auc: need both classes");
  return num / static_cast<double>(pairs);
}

// Gaussian elimination with partial pivoting; A is row-major n x n.
inline std::vector<double> solve_linear(std::vector<double> A,
                                        std::vector<double> b) {
  const std::size_t n = b.size();
  assert(A.size() == n * n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
    if (std::abs(A[piv * n + c]) < 1e-12)
      throw std::runtime_error("solve_linear: singular");
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(A[c * n + k], A[piv * n + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      double f = A[r * n + c] / A[c * n + c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) A[r * n + k] -= f * A[c * n + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= A[r * n + k] * x[k];
    x[r] = s / A[r * n + r];
  }
  return x;
}

// Unregularised least squares via the normal equations.
inline std::vector<double> least_squares(const sparsegd::Dataset& ds,
                                         std::uint64_t d) {
  std::vector<double> XtX(d * d, 0.0), Xty(d, 0.0);
  for (const auto& ex : ds) {
    for (const auto& [j, xj] : ex.features) {
      Xty[j] += xj * ex.label;
      for (const auto& [k, xk] : ex.features) XtX[j * d + k] += xj * xk;
    }
  }
  for (std::uint64_t j = 0; j < d; ++j) XtX[j * d + j] += 1e-10;  // ridge jitter
  return solve_linear(std::move(XtX), std::move(Xty));
}

inline double soft(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace oracles

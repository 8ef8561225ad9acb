#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace sparsegd {

// Shrinkage operators applied to individual weight coordinates. All of them
// move a value toward zero and never across it, except truncate_round which
// snaps small values to zero outright.

// Hard rounding: zero out anything with magnitude <= theta, keep the rest.
inline double truncate_round(double v, double theta) {
  return std::abs(v) <= theta ? 0.0 : v;
}

// Gravity-with-cap: values inside [-theta, theta] are pulled toward zero by
// alpha (clamping at zero); values beyond the cap are left alone. theta may
// be +inf, in which case every value is pulled.
inline double truncate_gravity(double v, double alpha, double theta) {
  if (v >= 0.0) {
    if (v <= theta) return std::max(0.0, v - alpha);
    return v;
  }
  if (v >= -theta) return std::min(0.0, v + alpha);
  return v;
}

// Uncapped pull toward zero.
inline double truncate_toward_zero(double v, double alpha) {
  return truncate_gravity(v, alpha, std::numeric_limits<double>::infinity());
}

// Shrinkage events fire every K-th trial with the accumulated amount K*g;
// off-schedule trials shrink by nothing.
inline double gravity_schedule(std::uint64_t trial, std::uint64_t K, double g) {
  return (K != 0 && trial % K == 0) ? static_cast<double>(K) * g : 0.0;
}

}  // namespace sparsegd

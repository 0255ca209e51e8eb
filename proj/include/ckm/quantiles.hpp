#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ckm {

// ceil(x) with a snap to the nearest integer when x sits within floating
// noise of it, so expressions like (n+1)*(1-alpha) that are integers in
// exact arithmetic do not round up spuriously.
inline Eigen::Index ceil_index(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) < 1e-9 * std::max(1.0, std::abs(x))) {
    return static_cast<Eigen::Index>(r);
  }
  return static_cast<Eigen::Index>(std::ceil(x));
}

// floor(x) with the same snap, for counts like N*fraction.
inline Eigen::Index floor_index(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) < 1e-9 * std::max(1.0, std::abs(x))) {
    return static_cast<Eigen::Index>(r);
  }
  return static_cast<Eigen::Index>(std::floor(x));
}

// Pinball (quantile) loss: tau*(y-q) above the prediction, (1-tau)*(q-y) below.
inline double pinball_loss(double y, double q, double tau) {
  const double diff = y - q;
  return diff >= 0 ? tau * diff : (tau - 1.0) * diff;
}

// tau-quantile of a sorted multiset: the ceil(tau*n)-th smallest element,
// clamped to the valid range. Minimizes total pinball loss over constants.
inline double sorted_quantile(const std::vector<double>& sorted, double tau) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty set");
  const auto n = static_cast<Eigen::Index>(sorted.size());
  Eigen::Index k = ceil_index(tau * static_cast<double>(n));
  k = std::clamp<Eigen::Index>(k, 1, n);
  return sorted[static_cast<std::size_t>(k - 1)];
}

inline double quantile(std::vector<double> values, double tau) {
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, tau);
}

}  // namespace ckm

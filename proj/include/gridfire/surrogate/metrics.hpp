#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>

#include "gridfire/core/error.hpp"

namespace gridfire::surrogate {

// Error measures of a regressor on held-out rows. Relative measures are
// empty when their normaliser is zero.
struct Metrics {
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> relative_mae;          // mae / mean(y)
  std::optional<double> relative_rmse_mean;    // rmse / mean(y)
  std::optional<double> relative_rmse_maxmin;  // rmse / (max(y) - min(y))
  std::size_t samples = 0;
};

inline Metrics compute_metrics(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.empty()) throw InvalidArgument("metrics need a non-empty test set");
  if (truth.size() != predicted.size()) throw InvalidArgument("prediction count mismatch");
  const double n = static_cast<double>(truth.size());
  double abs_sum = 0, sq_sum = 0, y_sum = 0;
  double lo = truth[0], hi = truth[0];
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predicted[i] - truth[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    y_sum += truth[i];
    lo = std::min(lo, truth[i]);
    hi = std::max(hi, truth[i]);
  }
  Metrics m;
  m.samples = truth.size();
  m.mae = abs_sum / n;
  m.rmse = std::sqrt(sq_sum / n);
  const double mean = y_sum / n;
  if (mean != 0.0) {
    m.relative_mae = m.mae / mean;
    m.relative_rmse_mean = m.rmse / mean;
  }
  if (hi > lo) m.relative_rmse_maxmin = m.rmse / (hi - lo);
  return m;
}

}  // namespace gridfire::surrogate

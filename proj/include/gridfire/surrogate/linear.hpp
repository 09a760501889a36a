#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "gridfire/core/error.hpp"
#include "gridfire/surrogate/tree.hpp"

namespace gridfire::surrogate {

struct LinearModel {
  Features weights{};
  double intercept = 0.0;
  double l1_penalty = 0.0;

  double predict_raw(const Features& x) const {
    double v = intercept;
    for (std::size_t j = 0; j < kFeatureCount; ++j) v += weights[j] * x[j];
    return v;
  }
  double predict(const Features& x) const { return std::clamp(predict_raw(x), 0.0, 1.0); }
};

struct LassoOptions {
  double tolerance = 1e-8;  // largest coefficient change of a sweep
  std::size_t max_sweeps = 100000;
};

// Objective of the L1 fit: (1/2n)*||y - Xw - b||^2 + penalty*||w||_1.
inline double lasso_objective(const TrainingSet& data, const LinearModel& m) {
  double sse = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data.y[i] - m.predict_raw(data.x[i]);
    sse += r * r;
  }
  double l1 = 0;
  for (double w : m.weights) l1 += std::abs(w);
  return sse / (2.0 * static_cast<double>(data.size())) + m.l1_penalty * l1;
}

// Penalty 0 solves ordinary least squares; a positive penalty runs cyclic
// coordinate descent on centred data with an unpenalized intercept.
inline LinearModel train_linear(const TrainingSet& data, double l1_penalty, const LassoOptions& opt = {}) {
  if (!(l1_penalty >= 0)) throw InvalidArgument("l1 penalty must be >= 0");
  const std::size_t n = data.size();
  if (n == 0) throw EmptyTrainingSet("empty training set");
  constexpr std::size_t p = kFeatureCount;
  LinearModel model;
  model.l1_penalty = l1_penalty;

  if (l1_penalty == 0.0) {
    Eigen::MatrixXd a(n, p + 1);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data.x[i][j];
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = 1.0;
      b(static_cast<Eigen::Index>(i)) = data.y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(p + 1)) throw SingularDesign("singular design matrix");
    const Eigen::VectorXd sol = qr.solve(b);
    for (std::size_t j = 0; j < p; ++j) model.weights[j] = sol(static_cast<Eigen::Index>(j));
    model.intercept = sol(static_cast<Eigen::Index>(p));
    return model;
  }

  const double nn = static_cast<double>(n);
  Features mean{};
  double ymean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) mean[j] += data.x[i][j] / nn;
    ymean += data.y[i] / nn;
  }
  std::vector<Features> xc(n);
  std::vector<double> resid(n);
  Features norm2{};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      xc[i][j] = data.x[i][j] - mean[j];
      norm2[j] += xc[i][j] * xc[i][j] / nn;
    }
    resid[i] = data.y[i] - ymean;
  }
  Features w{};
  for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double max_change = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (norm2[j] == 0.0) continue;
      double rho = 0;
      for (std::size_t i = 0; i < n; ++i) rho += xc[i][j] * (resid[i] + xc[i][j] * w[j]);
      rho /= nn;
      const double soft = std::copysign(std::max(std::abs(rho) - l1_penalty, 0.0), rho);
      const double updated = soft / norm2[j];
      const double delta = updated - w[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) resid[i] -= xc[i][j] * delta;
        w[j] = updated;
      }
      max_change = std::max(max_change, std::abs(delta));
    }
    if (max_change < opt.tolerance) break;
  }
  model.weights = w;
  model.intercept = ymean;
  for (std::size_t j = 0; j < p; ++j) model.intercept -= w[j] * mean[j];
  return model;
}

}  // namespace gridfire::surrogate

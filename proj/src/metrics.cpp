// SPDX-License-Identifier: Apache-2.0
#include "sew/metrics.hpp"

#include <string>

#include "sew/error.hpp"

namespace sew {
namespace {

void check_lengths(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
  if (x.size() != y.size()) {
    throw ConfigError("metric inputs differ in length: " + std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()));
  }
  if (x.size() < min_n) {
    throw ConfigError("metric needs at least " + std::to_string(min_n) + " samples, got " +
                      std::to_string(x.size()));
  }
}

}  // namespace

CccResult ccc_detailed(std::span<const double> x, std::span<const double> y, VarianceEstimator estimator) {
  check_lengths(x, y, 2);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    vx += dx * dx;
    vy += dy * dy;
    cxy += dx * dy;
  }
  const double denom_n = estimator == VarianceEstimator::kPopulation ? n : n - 1.0;
  vx /= denom_n;
  vy /= denom_n;
  cxy /= denom_n;
  const double denom = vx + vy + (mx - my) * (mx - my);
  if (denom == 0.0) return {0.0, true};
  return {2.0 * cxy / denom, false};
}

double ccc(std::span<const double> x, std::span<const double> y, VarianceEstimator estimator) {
  return ccc_detailed(x, y, estimator).value;
}

double binary_accuracy(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y, 1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.size(); ++i) hits += (x[i] > 0.0) == (y[i] > 0.0) ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(x.size());
}

EvalResult evaluate_predictions(std::span<const double> truth, std::span<const double> predictions,
                                VarianceEstimator estimator) {
  const CccResult c = ccc_detailed(truth, predictions, estimator);
  return {c.value, binary_accuracy(truth, predictions), truth.size(), c.degenerate};
}

}  // namespace sew

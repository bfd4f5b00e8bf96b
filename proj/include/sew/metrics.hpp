// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>

namespace sew {

enum class VarianceEstimator { kPopulation, kSample };

struct CccResult {
  double value = 0.0;
  bool degenerate = false;  // zero denominator; value reported as 0
};

/// Concordance correlation coefficient
///   2 cov(x, y) / (var(x) + var(y) + (mean(x) - mean(y))^2).
/// x holds the true labels, y the predictions. Throws ConfigError on a length
/// mismatch or fewer than two samples.
CccResult ccc_detailed(std::span<const double> x, std::span<const double> y,
                       VarianceEstimator estimator = VarianceEstimator::kPopulation);

double ccc(std::span<const double> x, std::span<const double> y,
           VarianceEstimator estimator = VarianceEstimator::kPopulation);

/// Percentage of samples whose class agrees, with classes negative [-1, 0]
/// and positive (0, 1]; zero counts as negative.
double binary_accuracy(std::span<const double> x, std::span<const double> y);

struct EvalResult {
  double ccc = 0.0;
  double binary_accuracy = 0.0;
  std::size_t n = 0;
  bool degenerate = false;
};

EvalResult evaluate_predictions(std::span<const double> truth, std::span<const double> predictions,
                                VarianceEstimator estimator = VarianceEstimator::kPopulation);

}  // namespace sew

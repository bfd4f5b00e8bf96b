// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "sew/matrix.hpp"

namespace sew {

/// Per-feature standardisation (zero mean, unit variance) over columns.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> stddev;  // constant features keep stddev 1

  static FeatureScaler fit(const Matrix& features);
  Matrix apply(const Matrix& features) const;
  std::size_t dim() const { return mean.size(); }
};

}  // namespace sew

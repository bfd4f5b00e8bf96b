// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "sew/error.hpp"
#include "sew/matrix.hpp"

namespace sew::kernels::detail {

inline void check_inner(std::size_t lhs, std::size_t rhs, const Matrix& a, const Matrix& b,
                        const char* op) {
  if (lhs != rhs) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape() + " and " +
                         b.shape());
  }
}

inline void check_bias(const Matrix& x, const Matrix& bias) {
  if (bias.cols() != 1 || bias.rows() != x.rows()) {
    throw DimensionError("add_bias: bias " + bias.shape() + " does not fit input " + x.shape());
  }
}

inline double sigmoid(double v) {
  // Split by sign so exp never overflows.
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace sew::kernels::detail

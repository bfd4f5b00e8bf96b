// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sew/matrix.hpp"

// Dense kernels used by the autodiff engine. The default namespace holds the
// OpenMP versions; sew::kernels::serial holds the plain reference loops the
// tests and the benchmark compare against.
//
// Each output element is produced by exactly one thread with the same
// summation order as the serial loop, so results do not depend on the
// thread count.

namespace sew::kernels {

/// Work (multiply-adds) below which kernels stay single-threaded.
inline constexpr std::size_t kParallelThreshold = 1 << 15;

Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix tanh(const Matrix& x);
Matrix sigmoid(const Matrix& x);
Matrix add_bias(const Matrix& x, const Matrix& bias);  // bias is rows x 1
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix row_sums(const Matrix& x);                      // rows x 1

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix tanh(const Matrix& x);
Matrix sigmoid(const Matrix& x);
Matrix add_bias(const Matrix& x, const Matrix& bias);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix row_sums(const Matrix& x);
}  // namespace serial

}  // namespace sew::kernels

// SPDX-License-Identifier: Apache-2.0
#include "sew/kernels.hpp"

#include <cmath>

#include "kernels_shape.hpp"

namespace sew::kernels {
namespace {

using Index = std::ptrdiff_t;

}  // namespace

// The i-k-j loop streams rows of b; out(i, j) still accumulates over k in
// ascending order, matching the serial dot-product loop bit for bit.
Matrix matmul(const Matrix& a, const Matrix& b) {
  detail::check_inner(a.cols(), b.rows(), a, b, "matmul");
  const Index m = static_cast<Index>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
  Matrix out(a.rows(), n);
  const double* ap = a.data().data();
  const double* bp = b.data().data();
  double* op = out.data().data();
#pragma omp parallel for schedule(static) if (a.rows() * inner * n > kParallelThreshold)
  for (Index i = 0; i < m; ++i) {
    double* orow = op + static_cast<std::size_t>(i) * n;
    const double* arow = ap + static_cast<std::size_t>(i) * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = arow[k];
      const double* brow = bp + k * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  detail::check_inner(a.rows(), b.rows(), a, b, "matmul_tn");
  const Index m = static_cast<Index>(a.cols());
  const std::size_t inner = a.rows();
  const std::size_t lda = a.cols();
  const std::size_t n = b.cols();
  Matrix out(a.cols(), n);
  const double* ap = a.data().data();
  const double* bp = b.data().data();
  double* op = out.data().data();
#pragma omp parallel for schedule(static) if (a.cols() * inner * n > kParallelThreshold)
  for (Index i = 0; i < m; ++i) {
    double* orow = op + static_cast<std::size_t>(i) * n;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aki = ap[k * lda + static_cast<std::size_t>(i)];
      const double* brow = bp + k * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  detail::check_inner(a.cols(), b.cols(), a, b, "matmul_nt");
  const Index m = static_cast<Index>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t n = b.rows();
  Matrix out(a.rows(), n);
  const double* ap = a.data().data();
  const double* bp = b.data().data();
  double* op = out.data().data();
#pragma omp parallel for schedule(static) if (a.rows() * inner * n > kParallelThreshold)
  for (Index i = 0; i < m; ++i) {
    const double* arow = ap + static_cast<std::size_t>(i) * inner;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = bp + j * inner;
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
      op[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
  return out;
}

Matrix tanh(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  const Index n = static_cast<Index>(x.size());
  const double* in = x.data().data();
  double* o = out.data().data();
#pragma omp parallel for schedule(static) if (x.size() > kParallelThreshold)
  for (Index i = 0; i < n; ++i) o[i] = std::tanh(in[i]);
  return out;
}

Matrix sigmoid(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  const Index n = static_cast<Index>(x.size());
  const double* in = x.data().data();
  double* o = out.data().data();
#pragma omp parallel for schedule(static) if (x.size() > kParallelThreshold)
  for (Index i = 0; i < n; ++i) o[i] = detail::sigmoid(in[i]);
  return out;
}

Matrix add_bias(const Matrix& x, const Matrix& bias) {
  detail::check_bias(x, bias);
  Matrix out = x;
  const Index rows = static_cast<Index>(x.rows());
  const std::size_t cols = x.cols();
  double* o = out.data().data();
#pragma omp parallel for schedule(static) if (x.size() > kParallelThreshold)
  for (Index r = 0; r < rows; ++r) {
    const double b = bias(static_cast<std::size_t>(r), 0);
    double* orow = o + static_cast<std::size_t>(r) * cols;
    for (std::size_t c = 0; c < cols; ++c) orow[c] += b;
  }
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out(a.rows(), a.cols());
  const Index n = static_cast<Index>(a.size());
  const double* ap = a.data().data();
  const double* bp = b.data().data();
  double* o = out.data().data();
#pragma omp parallel for schedule(static) if (a.size() > kParallelThreshold)
  for (Index i = 0; i < n; ++i) o[i] = ap[i] * bp[i];
  return out;
}

Matrix row_sums(const Matrix& x) {
  Matrix out(x.rows(), 1);
  const Index rows = static_cast<Index>(x.rows());
  const std::size_t cols = x.cols();
  const double* in = x.data().data();
#pragma omp parallel for schedule(static) if (x.size() > kParallelThreshold)
  for (Index r = 0; r < rows; ++r) {
    const double* row = in + static_cast<std::size_t>(r) * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c];
    out(static_cast<std::size_t>(r), 0) = acc;
  }
  return out;
}

}  // namespace sew::kernels

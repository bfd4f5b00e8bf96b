// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "kernels_shape.hpp"
#include "sew/kernels.hpp"

namespace sew::kernels::serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  detail::check_inner(a.cols(), b.rows(), a, b, "matmul");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  detail::check_inner(a.rows(), b.rows(), a, b, "matmul_tn");
  Matrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) acc += a(k, i) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  detail::check_inner(a.cols(), b.cols(), a, b, "matmul_nt");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(j, k);
      out(i, j) = acc;
    }
  return out;
}

Matrix tanh(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = std::tanh(x.data()[i]);
  return out;
}

Matrix sigmoid(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = detail::sigmoid(x.data()[i]);
  return out;
}

Matrix add_bias(const Matrix& x, const Matrix& bias) {
  detail::check_bias(x, bias);
  Matrix out = x;
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) += bias(r, 0);
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

Matrix row_sums(const Matrix& x) {
  Matrix out(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) acc += x(r, c);
    out(r, 0) = acc;
  }
  return out;
}

}  // namespace sew::kernels::serial

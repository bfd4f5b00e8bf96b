// SPDX-License-Identifier: Apache-2.0
#include "sew/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sew/error.hpp"

namespace sew::linalg {
namespace {

constexpr int kMaxSweeps = 100;

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) throw DimensionError(std::string(what) + ": matrix " + a.shape() + " is not square");
}

}  // namespace

bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  double scale = 1.0;
  for (const double v : a.data()) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol * scale) return false;
  return true;
}

SymmetricEigen symmetric_eigen(const Matrix& input) {
  require_square(input, "symmetric_eigen");
  const std::size_t n = input.rows();
  Matrix a = input;
  Matrix v = Matrix::identity(n);

  double total = 0.0;
  for (const double x : a.data()) total += x * x;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-32 * total || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = v(k, order[j]);
  }
  return out;
}

Svd svd(const Matrix& a) {
  if (a.rows() < a.cols()) throw DimensionError("svd: expected rows >= cols, got " + a.shape());
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix u = a;
  Matrix v = Matrix::identity(n);
  constexpr double kEps = 1e-15;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          alpha += u(k, p) * u(k, p);
          beta += u(k, q) * u(k, q);
          gamma += u(k, p) * u(k, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < m; ++k) {
          const double up = u(k, p);
          const double uq = u(k, q);
          u(k, p) = c * up - s * uq;
          u(k, q) = s * up + c * uq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vp = v(k, p);
          const double vq = v(k, q);
          v(k, p) = c * vp - s * vq;
          v(k, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    for (std::size_t k = 0; k < m; ++k) norm += u(k, j) * u(k, j);
    sigma[j] = std::sqrt(norm);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  Svd out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    const double s = sigma[src];
    out.singular_values[j] = s;
    for (std::size_t k = 0; k < m; ++k) out.u(k, j) = s > 0.0 ? u(k, src) / s : 0.0;
    for (std::size_t k = 0; k < n; ++k) out.v(k, j) = v(k, src);
  }
  return out;
}

Matrix inv_sqrt_from_eigen(const SymmetricEigen& eig) {
  const std::size_t n = eig.values.size();
  if (n > 0 && !(eig.values.front() > 0.0)) {
    std::ostringstream os;
    os << "matrix is not positive definite (smallest eigenvalue " << eig.values.front() << ")";
    throw ConditioningError(os.str());
  }
  Matrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 1.0 / std::sqrt(eig.values[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const double qik = eig.vectors(i, k) * w;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += qik * eig.vectors(j, k);
    }
  }
  return out;
}

Matrix matrix_inv_sqrt(const Matrix& a) {
  require_square(a, "matrix_inv_sqrt");
  if (!is_symmetric(a, 1e-10)) throw DimensionError("matrix_inv_sqrt: input is not symmetric");
  return inv_sqrt_from_eigen(symmetric_eigen(a));
}

}  // namespace sew::linalg

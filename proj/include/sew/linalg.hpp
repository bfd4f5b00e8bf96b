// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "sew/matrix.hpp"

namespace sew::linalg {

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column j pairs with values[j]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen symmetric_eigen(const Matrix& a);

struct Svd {
  Matrix u;                             // m x n, orthonormal columns where sigma > 0
  std::vector<double> singular_values;  // descending
  Matrix v;                             // n x n
};

/// Thin SVD (m >= n) by one-sided Hestenes-Jacobi rotations.
Svd svd(const Matrix& a);

/// Q * diag(1/sqrt(lambda)) * Q^T for symmetric positive definite `a`.
/// Throws ConditioningError (with the smallest eigenvalue) if `a` is not PD,
/// DimensionError if it is not square or not symmetric within 1e-10.
Matrix matrix_inv_sqrt(const Matrix& a);

/// Same, reusing an existing decomposition of `a`.
Matrix inv_sqrt_from_eigen(const SymmetricEigen& eig);

bool is_symmetric(const Matrix& a, double tol);

}  // namespace sew::linalg

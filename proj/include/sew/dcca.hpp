// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "sew/autodiff.hpp"
#include "sew/matrix.hpp"

namespace sew {

/// Covariance and canonical-correlation statistics of two d x p views.
struct CcaStats {
  Matrix sigma_s;   // self covariance of the stronger view, + r1 I
  Matrix sigma_w;   // self covariance of the weaker view, + r2 I
  Matrix sigma_sw;  // cross covariance
  Matrix t_matrix;  // sigma_s^-1/2 sigma_sw sigma_w^-1/2 (empty until computed)
  std::vector<double> singular_values;  // of t_matrix, descending
  std::size_t k = 0;
  double r1 = 0.0;
  double r2 = 0.0;

  double correlation() const;  // sum of the top-k singular values
};

struct CcaOptions {
  std::size_t k = 10;
  double r1 = 1e-4;
  double r2 = 1e-4;
};

/// Eigenvalue ratio below which a covariance counts as ill-conditioned.
inline constexpr double kMinConditionRatio = 1e-12;
/// Gap between sigma_k and sigma_{k+1} under which the gradient is reported
/// as ill-defined.
inline constexpr double kSingularValueTieGap = 1e-9;

/// Mean-centres both views per row and forms the (regularised) covariances.
/// Throws ConfigError if p < 2 or r < 0, DimensionError on shape mismatch.
CcaStats covariances(const Matrix& m_ss, const Matrix& m_sw, double r1, double r2);

/// covariances() plus T and its singular values.
CcaStats cca_stats(const Matrix& m_ss, const Matrix& m_sw, const CcaOptions& options);

/// Total correlation of the top-k canonical components, as a differentiable
/// node. The backward pass uses the closed-form Deep CCA gradient.
Var cca_correlation(Var m_ss, Var m_sw, const CcaOptions& options);

/// Alignment loss: -cca_correlation.
Var cca_alignment_loss(Var m_ss, Var m_sw, const CcaOptions& options);

/// Reference canonical correlations (descending, top k) computed through a
/// different route: the symmetric-definite generalized eigenproblem
///   S_xy S_yy^-1 S_yx a = rho^2 S_xx a.
/// x and y may have different row counts but share the sample count.
std::vector<double> classical_cca_oracle(const Matrix& x, const Matrix& y, std::size_t k,
                                         double r1 = 0.0, double r2 = 0.0);

}  // namespace sew

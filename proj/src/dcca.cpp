// SPDX-License-Identifier: Apache-2.0
#include "sew/dcca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sew/error.hpp"
#include "sew/kernels.hpp"
#include "sew/linalg.hpp"
#include "sew/log.hpp"

namespace sew {
namespace {

Matrix centered(const Matrix& m) {
  Matrix out = m;
  const double inv = 1.0 / static_cast<double>(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double mean = std::accumulate(m.row(r).begin(), m.row(r).end(), 0.0) * inv;
    for (double& v : out.row(r)) v -= mean;
  }
  return out;
}

void check_views(const Matrix& m_ss, const Matrix& m_sw, double r1, double r2) {
  require_same_shape(m_ss, m_sw, "cca");
  if (m_ss.cols() < 2) {
    throw ConfigError("cca: insufficient samples (p = " + std::to_string(m_ss.cols()) +
                      ", need p >= 2)");
  }
  if (r1 < 0.0 || r2 < 0.0) throw ConfigError("cca: regularisation constants must be >= 0");
}

void add_ridge(Matrix& m, double r) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += r;
}

// Inverse square root with the conditioning contract of the CCA path.
Matrix conditioned_inv_sqrt(const Matrix& sigma, const char* which, double r) {
  const linalg::SymmetricEigen eig = linalg::symmetric_eigen(sigma);
  const double lo = eig.values.front();
  const double hi = eig.values.back();
  if (!(lo > 0.0) || lo < kMinConditionRatio * hi) {
    std::ostringstream os;
    os << "cca: " << which << " is ill-conditioned (smallest eigenvalue " << lo << ", largest " << hi
       << ", regulariser " << r << "); use a regularisation constant > 0";
    throw ConditioningError(os.str());
  }
  return linalg::inv_sqrt_from_eigen(eig);
}

struct Forward {
  Matrix h_s;  // centred views
  Matrix h_w;
  Matrix inv_sqrt_s;
  Matrix inv_sqrt_w;
  CcaStats stats;
  linalg::Svd svd;
};

Forward forward(const Matrix& m_ss, const Matrix& m_sw, const CcaOptions& options) {
  check_views(m_ss, m_sw, options.r1, options.r2);
  const std::size_t d = m_ss.rows();
  if (options.k < 1 || options.k > d) {
    throw ConfigError("cca: component count k = " + std::to_string(options.k) + " must lie in [1, " +
                      std::to_string(d) + "]");
  }
  Forward f;
  f.h_s = centered(m_ss);
  f.h_w = centered(m_sw);
  const double scale = 1.0 / static_cast<double>(m_ss.cols() - 1);
  CcaStats& st = f.stats;
  st.k = options.k;
  st.r1 = options.r1;
  st.r2 = options.r2;
  st.sigma_sw = scale * kernels::matmul_nt(f.h_s, f.h_w);
  st.sigma_s = scale * kernels::matmul_nt(f.h_s, f.h_s);
  st.sigma_w = scale * kernels::matmul_nt(f.h_w, f.h_w);
  add_ridge(st.sigma_s, options.r1);
  add_ridge(st.sigma_w, options.r2);

  f.inv_sqrt_s = conditioned_inv_sqrt(st.sigma_s, "sigma_s", options.r1);
  f.inv_sqrt_w = conditioned_inv_sqrt(st.sigma_w, "sigma_w", options.r2);
  st.t_matrix = kernels::matmul(kernels::matmul(f.inv_sqrt_s, st.sigma_sw), f.inv_sqrt_w);
  f.svd = linalg::svd(st.t_matrix);
  st.singular_values = f.svd.singular_values;
  return f;
}

}  // namespace

double CcaStats::correlation() const {
  const std::size_t n = std::min(k, singular_values.size());
  return std::accumulate(singular_values.begin(), singular_values.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
}

CcaStats covariances(const Matrix& m_ss, const Matrix& m_sw, double r1, double r2) {
  check_views(m_ss, m_sw, r1, r2);
  const Matrix h_s = centered(m_ss);
  const Matrix h_w = centered(m_sw);
  const double scale = 1.0 / static_cast<double>(m_ss.cols() - 1);
  CcaStats st;
  st.r1 = r1;
  st.r2 = r2;
  st.sigma_sw = scale * kernels::matmul_nt(h_s, h_w);
  st.sigma_s = scale * kernels::matmul_nt(h_s, h_s);
  st.sigma_w = scale * kernels::matmul_nt(h_w, h_w);
  add_ridge(st.sigma_s, r1);
  add_ridge(st.sigma_w, r2);
  return st;
}

CcaStats cca_stats(const Matrix& m_ss, const Matrix& m_sw, const CcaOptions& options) {
  return forward(m_ss, m_sw, options).stats;
}

Var cca_correlation(Var m_ss, Var m_sw, const CcaOptions& options) {
  Forward f = forward(m_ss.value(), m_sw.value(), options);
  const std::size_t k = options.k;
  const std::size_t d = f.stats.singular_values.size();
  const double rho = f.stats.correlation();

  if (k < d && f.stats.singular_values[k - 1] - f.stats.singular_values[k] < kSingularValueTieGap) {
    log::warn("cca: singular values ", k, " and ", k + 1, " are tied (",
              f.stats.singular_values[k - 1], "); the gradient is not unique here");
  }

  Tape& tape = m_ss.tape();
  return tape.record(
      "cca_correlation", Matrix(1, 1, rho), {m_ss, m_sw},
      [m_ss, m_sw, k, f = std::move(f)](Tape& t, const Matrix& g) {
        const std::size_t d = f.svd.singular_values.size();
        const double p_scale = 1.0 / static_cast<double>(f.h_s.cols() - 1);
        const Matrix u_k = f.svd.u.columns(0, k);
        const Matrix v_k = f.svd.v.columns(0, k);
        Matrix u_k_d = u_k;
        Matrix v_k_d = v_k;
        for (std::size_t r = 0; r < d; ++r)
          for (std::size_t c = 0; c < k; ++c) {
            u_k_d(r, c) *= f.svd.singular_values[c];
            v_k_d(r, c) *= f.svd.singular_values[c];
          }
        // d rho / d sigma_sw
        const Matrix delta_sw = kernels::matmul(
            kernels::matmul(f.inv_sqrt_s, kernels::matmul_nt(u_k, v_k)), f.inv_sqrt_w);
        // d rho / d sigma_s and d rho / d sigma_w
        const Matrix delta_ss = -0.5 * kernels::matmul(
            kernels::matmul(f.inv_sqrt_s, kernels::matmul_nt(u_k_d, u_k)), f.inv_sqrt_s);
        const Matrix delta_ww = -0.5 * kernels::matmul(
            kernels::matmul(f.inv_sqrt_w, kernels::matmul_nt(v_k_d, v_k)), f.inv_sqrt_w);

        const double s = g(0, 0) * p_scale;
        if (t.requires_grad(m_ss)) {
          Matrix grad = 2.0 * kernels::matmul(delta_ss, f.h_s) + kernels::matmul(delta_sw, f.h_w);
          grad *= s;
          t.accumulate(m_ss, centered(grad));
        }
        if (t.requires_grad(m_sw)) {
          Matrix grad = 2.0 * kernels::matmul(delta_ww, f.h_w) + kernels::matmul_tn(delta_sw, f.h_s);
          grad *= s;
          t.accumulate(m_sw, centered(grad));
        }
      });
}

Var cca_alignment_loss(Var m_ss, Var m_sw, const CcaOptions& options) {
  return scalar_mul(cca_correlation(m_ss, m_sw, options), -1.0);
}

std::vector<double> classical_cca_oracle(const Matrix& x, const Matrix& y, std::size_t k, double r1,
                                         double r2) {
  using Eigen::MatrixXd;
  if (x.cols() != y.cols()) {
    throw DimensionError("classical_cca_oracle: sample counts differ (" + x.shape() + " vs " + y.shape() + ")");
  }
  if (x.cols() < 2) throw ConfigError("classical_cca_oracle: need at least 2 samples");
  if (k < 1 || k > std::min(x.rows(), y.rows())) {
    throw ConfigError("classical_cca_oracle: k out of range");
  }
  const auto to_eigen = [](const Matrix& m) {
    MatrixXd e(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) e(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
    return e;
  };
  MatrixXd ex = to_eigen(x);
  MatrixXd ey = to_eigen(y);
  ex.colwise() -= ex.rowwise().mean();
  ey.colwise() -= ey.rowwise().mean();
  const double n1 = static_cast<double>(x.cols() - 1);
  MatrixXd sxx = ex * ex.transpose() / n1;
  MatrixXd syy = ey * ey.transpose() / n1;
  const MatrixXd sxy = ex * ey.transpose() / n1;
  sxx.diagonal().array() += r1;
  syy.diagonal().array() += r2;

  const auto check = [](const MatrixXd& s, const char* which) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || lo < kMinConditionRatio * hi) {
      std::ostringstream os;
      os << "classical_cca_oracle: " << which << " covariance is singular (smallest eigenvalue " << lo << ")";
      throw ConditioningError(os.str());
    }
  };
  check(sxx, "x");
  check(syy, "y");

  const Eigen::LLT<MatrixXd> syy_chol(syy);
  MatrixXd lhs = sxy * syy_chol.solve(sxy.transpose());
  lhs = 0.5 * (lhs + lhs.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(lhs, sxx, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw ConditioningError("classical_cca_oracle: eigensolver failed");

  std::vector<double> rho(static_cast<std::size_t>(ges.eigenvalues().size()));
  for (std::size_t i = 0; i < rho.size(); ++i) {
    rho[i] = std::sqrt(std::max(0.0, ges.eigenvalues()(static_cast<Eigen::Index>(i))));
  }
  std::sort(rho.begin(), rho.end(), std::greater<>());
  rho.resize(k);
  return rho;
}

}  // namespace sew

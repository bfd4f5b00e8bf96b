// SPDX-License-Identifier: Apache-2.0
#include "sew/optim.hpp"

#include <cmath>

#include "sew/error.hpp"

namespace sew {

SgdState::SgdState(SgdOptions options, std::span<Parameter* const> params) : options_(options) {
  if (!(options.lr > 0.0)) throw ConfigError("sgd: lr must be > 0");
  if (!(options.momentum >= 0.0 && options.momentum < 1.0)) {
    throw ConfigError("sgd: momentum must lie in [0, 1)");
  }
  if (!(options.weight_decay >= 0.0)) throw ConfigError("sgd: weight_decay must be >= 0");
  velocity_.reserve(params.size());
  for (const Parameter* p : params) velocity_.emplace_back(p->value.rows(), p->value.cols());
}

void sgd_step(std::span<Parameter* const> params, SgdState& state) {
  if (params.size() != state.velocity_.size()) {
    throw DimensionError("sgd_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(state.velocity_.size()) + " velocity buffers");
  }
  for (const Parameter* p : params) {
    require_same_shape(p->value, p->grad, "sgd_step");
    if (!p->grad.all_finite()) {
      throw NumericError("sgd_step: non-finite gradient for parameter '" + p->name + "'");
    }
  }
  const auto& [lr, momentum, wd] = state.options_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    Matrix& v = state.velocity_[i];
    require_same_shape(p.value, v, "sgd_step velocity");
    auto value = p.value.data();
    auto grad = p.grad.data();
    auto vel = v.data();
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j] + wd * value[j];
      vel[j] = momentum * vel[j] + g;
      value[j] -= lr * vel[j];
    }
  }
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params)
    for (const double g : p->grad.data()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (Parameter* p : params) p->grad *= scale;
  }
  return norm;
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace sew

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "sew/autodiff.hpp"

namespace sew {

struct SgdOptions {
  double lr = 0.001;
  double momentum = 0.7;
  double weight_decay = 1e-4;
};

/// SGD with heavy-ball momentum and L2 weight decay:
///   g' = grad + weight_decay * param
///   v  = momentum * v + g'
///   param -= lr * v
class SgdState {
 public:
  /// Throws ConfigError unless lr > 0, 0 <= momentum < 1, weight_decay >= 0.
  SgdState(SgdOptions options, std::span<Parameter* const> params);

  const SgdOptions& options() const { return options_; }
  const std::vector<Matrix>& velocity() const { return velocity_; }

 private:
  friend void sgd_step(std::span<Parameter* const> params, SgdState& state);

  SgdOptions options_;
  std::vector<Matrix> velocity_;
};

/// Applies one update using each Parameter::grad. If any gradient is
/// non-finite nothing is modified and NumericError is thrown.
void sgd_step(std::span<Parameter* const> params, SgdState& state);

/// Rescales gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

void zero_grads(std::span<Parameter* const> params);

}  // namespace sew

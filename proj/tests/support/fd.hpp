// SPDX-License-Identifier: Apache-2.0
// Central finite differences over Parameter entries, used as the oracle for
// every analytic gradient. The five-point stencil
//   f'(x) ~ [8(f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))] / 12h
// has O(h^4) truncation error, so a fairly large h keeps the round-off term
// (~eps |f| / h) near 1e-13. With the three-point rule at h = 1e-6 that term
// is ~1e-10, which swamps entries whose true gradient is exactly zero (biases
// feeding a mean-centring op).
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sew/autodiff.hpp"

namespace sew::testing {

struct GradCheck {
  std::vector<double> rel_errors;  // one per scalar parameter entry
  double max_rel = 0.0;

  double fraction_below(double tol) const {
    if (rel_errors.empty()) return 1.0;
    const auto ok = std::count_if(rel_errors.begin(), rel_errors.end(), [tol](double e) { return e < tol; });
    return static_cast<double>(ok) / static_cast<double>(rel_errors.size());
  }
};

/// |a - n| / max(|a|, |n|, floor); the floor keeps entries whose true
/// gradient is ~0 from reporting huge relative errors on round-off.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// `loss` builds the scalar loss on the tape it is given.
using LossFn = std::function<Var(Tape&)>;

inline double eval_loss(const LossFn& loss) {
  Tape tape(false);
  return loss(tape).value().scalar();
}

inline GradCheck check_gradients(const LossFn& loss, const std::vector<Parameter*>& params, double h = 1e-3) {
  Gradients grads;
  {
    Tape tape;
    grads = tape.backward(loss(tape));
  }
  GradCheck out;
  for (Parameter* p : params) {
    const Matrix analytic = grads.of(*p);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      double& x = p->value.data()[i];
      const double saved = x;
      const auto at = [&](double offset) {
        x = saved + offset;
        return eval_loss(loss);
      };
      const double numeric = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
      x = saved;
      const double e = relative_error(analytic.data()[i], numeric);
      out.rel_errors.push_back(e);
      out.max_rel = std::max(out.max_rel, e);
    }
  }
  return out;
}

}  // namespace sew::testing

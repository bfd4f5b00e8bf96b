// SPDX-License-Identifier: Apache-2.0
#include "sew/autodiff.hpp"

#include <cmath>

#include "sew/error.hpp"
#include "sew/kernels.hpp"

namespace sew {

Parameter::Parameter(std::string n, Matrix v)
    : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

void Parameter::zero_grad() { grad = Matrix(value.rows(), value.cols()); }

Matrix Gradients::of(const Parameter& p) const {
  if (auto it = grads_.find(&p); it != grads_.end()) return it->second;
  return Matrix(p.value.rows(), p.value.cols());
}

void Gradients::store_into(std::span<Parameter* const> params) const {
  for (Parameter* p : params) p->grad = of(*p);
}

const Matrix& Var::value() const { return tape().value(id_); }
const Matrix& Var::grad() const { return tape().grad(id_); }

Tape& Var::tape() const {
  if (tape_ == nullptr) throw ContractError("use of an unbound Var");
  return *tape_;
}

Var Tape::push(Node node) {
  if (node.requires_grad) node.grad = Matrix(node.value.rows(), node.value.cols());
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owner(Var v) const {
  if (&v.tape() != this) throw ContractError("operands belong to different tapes");
}

Var Tape::constant(Matrix value) {
  if (!value.all_finite()) throw NumericError("constant input contains NaN or Inf");
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::leaf(Matrix value) {
  if (!value.all_finite()) throw NumericError("leaf input contains NaN or Inf");
  Node n;
  n.value = std::move(value);
  n.requires_grad = recording_;
  return push(std::move(n));
}

Var Tape::param(const Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  if (!p.value.all_finite()) throw NumericError("parameter '" + p.name + "' contains NaN or Inf");
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = recording_;
  Var v = push(std::move(n));
  param_nodes_.emplace(&p, v.id());
  return v;
}

Var Tape::record(const char* op, Matrix value, std::vector<Var> parents, BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError(std::string(op) + " produced a non-finite value");
  }
  Node n;
  n.value = std::move(value);
  n.parents.reserve(parents.size());
  for (const Var& p : parents) {
    check_owner(p);
    n.parents.push_back(p.id());
    n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

void Tape::accumulate(Var target, const Matrix& grad) {
  check_owner(target);
  Node& n = nodes_[target.id()];
  if (!n.requires_grad) return;
  n.grad += grad;
}

Gradients Tape::backward(Var loss) {
  check_owner(loss);
  if (backward_done_) throw ContractError("backward called twice on the same tape");
  const Node& root = nodes_[loss.id()];
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ContractError("backward requires a scalar loss, got " + root.value.shape());
  }
  backward_done_ = true;
  Gradients out;
  if (!root.requires_grad) return out;

  // Only nodes the loss depends on are visited.
  std::vector<char> reachable(nodes_.size(), 0);
  reachable[loss.id()] = 1;
  nodes_[loss.id()].grad(0, 0) = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    if (!reachable[i]) continue;
    Node& n = nodes_[i];
    if (!n.requires_grad) continue;
    for (const std::size_t p : n.parents) reachable[p] = 1;
    if (n.backward) {
      // Copy: the callback may touch other nodes but never appends.
      const Matrix g = n.grad;
      n.backward(*this, g);
    }
  }
  for (std::size_t i = 0; i <= loss.id(); ++i) {
    const Node& n = nodes_[i];
    if (n.param != nullptr && reachable[i]) out.grads_.emplace(n.param, n.grad);
  }
  return out;
}

namespace {

Tape& common_tape(Var a, Var b) {
  Tape& t = a.tape();
  if (&b.tape() != &t) throw ContractError("operands belong to different tapes");
  return t;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = common_tape(a, b);
  Matrix out = kernels::matmul(a.value(), b.value());
  return t.record("matmul", std::move(out), {a, b}, [a, b](Tape& tape, const Matrix& g) {
    if (tape.requires_grad(a)) tape.accumulate(a, kernels::matmul_nt(g, b.value()));
    if (tape.requires_grad(b)) tape.accumulate(b, kernels::matmul_tn(a.value(), g));
  });
}

Var add_bias(Var x, Var bias) {
  Tape& t = common_tape(x, bias);
  Matrix out = kernels::add_bias(x.value(), bias.value());
  return t.record("add_bias", std::move(out), {x, bias}, [x, bias](Tape& tape, const Matrix& g) {
    tape.accumulate(x, g);
    tape.accumulate(bias, kernels::row_sums(g));
  });
}

Var tanh(Var x) {
  Matrix out = kernels::tanh(x.value());
  return x.tape().record("tanh", out, {x}, [x, out](Tape& tape, const Matrix& g) {
    Matrix d(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = out.data()[i];
      d.data()[i] = g.data()[i] * (1.0 - y * y);
    }
    tape.accumulate(x, d);
  });
}

Var sigmoid(Var x) {
  Matrix out = kernels::sigmoid(x.value());
  return x.tape().record("sigmoid", out, {x}, [x, out](Tape& tape, const Matrix& g) {
    Matrix d(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = out.data()[i];
      d.data()[i] = g.data()[i] * y * (1.0 - y);
    }
    tape.accumulate(x, d);
  });
}

Var elementwise_add(Var a, Var b) {
  Tape& t = common_tape(a, b);
  require_same_shape(a.value(), b.value(), "elementwise_add");
  return t.record("elementwise_add", a.value() + b.value(), {a, b},
                  [a, b](Tape& tape, const Matrix& g) {
                    tape.accumulate(a, g);
                    tape.accumulate(b, g);
                  });
}

Var elementwise_sub(Var a, Var b) {
  Tape& t = common_tape(a, b);
  require_same_shape(a.value(), b.value(), "elementwise_sub");
  return t.record("elementwise_sub", a.value() - b.value(), {a, b},
                  [a, b](Tape& tape, const Matrix& g) {
                    tape.accumulate(a, g);
                    tape.accumulate(b, -1.0 * g);
                  });
}

Var elementwise_mul(Var a, Var b) {
  Tape& t = common_tape(a, b);
  Matrix out = kernels::hadamard(a.value(), b.value());
  return t.record("elementwise_mul", std::move(out), {a, b}, [a, b](Tape& tape, const Matrix& g) {
    if (tape.requires_grad(a)) tape.accumulate(a, kernels::hadamard(g, b.value()));
    if (tape.requires_grad(b)) tape.accumulate(b, kernels::hadamard(g, a.value()));
  });
}

Var scalar_mul(Var x, double s) {
  return x.tape().record("scalar_mul", s * x.value(), {x},
                         [x, s](Tape& tape, const Matrix& g) { tape.accumulate(x, s * g); });
}

Var scalar_add(Var x, double s) {
  Matrix out = x.value();
  for (double& v : out.data()) v += s;
  return x.tape().record("scalar_add", std::move(out), {x},
                         [x](Tape& tape, const Matrix& g) { tape.accumulate(x, g); });
}

Var sum(Var x) {
  double acc = 0.0;
  for (const double v : x.value().data()) acc += v;
  return x.tape().record("sum", Matrix(1, 1, acc), {x}, [x](Tape& tape, const Matrix& g) {
    tape.accumulate(x, Matrix(x.rows(), x.cols(), g(0, 0)));
  });
}

namespace {

Matrix center_rows(const Matrix& m) {
  Matrix out = m;
  if (m.cols() == 0) return out;
  const double inv = 1.0 / static_cast<double>(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double mean = 0.0;
    for (const double v : m.row(r)) mean += v;
    mean *= inv;
    for (double& v : out.row(r)) v -= mean;
  }
  return out;
}

}  // namespace

Var mean_center_rows(Var x) {
  // Centering is a symmetric projection, so the backward rule is centering too.
  return x.tape().record("mean_center_rows", center_rows(x.value()), {x},
                         [x](Tape& tape, const Matrix& g) { tape.accumulate(x, center_rows(g)); });
}

Var mse_loss(Var pred, const Matrix& target) {
  require_same_shape(pred.value(), target, "mse_loss");
  if (target.empty()) throw DimensionError("mse_loss: empty operands");
  const Matrix diff = pred.value() - target;
  const double n = static_cast<double>(diff.size());
  double acc = 0.0;
  for (const double v : diff.data()) acc += v * v;
  return pred.tape().record("mse_loss", Matrix(1, 1, acc / n), {pred},
                            [pred, diff, n](Tape& tape, const Matrix& g) {
                              tape.accumulate(pred, (2.0 * g(0, 0) / n) * diff);
                            });
}

}  // namespace sew

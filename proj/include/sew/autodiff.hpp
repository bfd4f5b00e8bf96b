// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sew/matrix.hpp"

namespace sew {

/// A trainable matrix and its gradient accumulator.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Matrix value);

  void zero_grad();

  std::string name;
  Matrix value;
  Matrix grad;
};

class Tape;

/// Gradients of a loss w.r.t. the parameters bound on a tape.
class Gradients {
 public:
  /// Gradient for `p`; zeros of the right shape if the loss does not reach it.
  Matrix of(const Parameter& p) const;
  bool contains(const Parameter& p) const { return grads_.count(&p) != 0; }
  std::size_t size() const { return grads_.size(); }
  /// Overwrites Parameter::grad for each parameter in `params`.
  void store_into(std::span<Parameter* const> params) const;

 private:
  friend class Tape;
  std::unordered_map<const Parameter*, Matrix> grads_;
};

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape& tape() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so walking the
/// node list backwards is a reverse topological order. A tape is built for
/// one step and discarded; backward may be called once.
class Tape {
 public:
  /// Receives the gradient of the loss w.r.t. the node's output and pushes
  /// contributions into its parents through accumulate().
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  /// A non-recording tape evaluates forward only (inference).
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// A free input whose gradient is kept on the node (used by tests).
  Var leaf(Matrix value);
  /// Binds a model parameter. Repeated binds of the same Parameter return the
  /// same node. The parameter is read, never written, by the tape.
  Var param(const Parameter& p);

  /// Appends an operation node. Throws NumericError if `value` is not finite.
  Var record(const char* op, Matrix value, std::vector<Var> parents, BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1, propagates, and returns the gradient of every
  /// bound parameter the loss reaches. `loss` must be 1x1.
  Gradients backward(Var loss);

  void accumulate(Var target, const Matrix& grad);

  const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
  const Matrix& grad(std::size_t id) const { return nodes_.at(id).grad; }
  bool requires_grad(Var v) const { return nodes_.at(v.id()).requires_grad; }
  bool recording() const { return recording_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    const Parameter* param = nullptr;
    bool requires_grad = false;
  };

  Var push(Node node);
  void check_owner(Var v) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool recording_;
  bool backward_done_ = false;
};

// Differentiable operations. All operands must live on the same tape.

Var matmul(Var a, Var b);
/// x (rows x batch) plus a rows x 1 bias broadcast over columns.
Var add_bias(Var x, Var bias);
Var tanh(Var x);
Var sigmoid(Var x);
Var elementwise_add(Var a, Var b);
Var elementwise_sub(Var a, Var b);
Var elementwise_mul(Var a, Var b);
Var scalar_mul(Var x, double s);
Var scalar_add(Var x, double s);
Var sum(Var x);
/// Subtracts each row's mean across columns (samples).
Var mean_center_rows(Var x);
/// Mean over all entries of (pred - target)^2.
Var mse_loss(Var pred, const Matrix& target);

}  // namespace sew

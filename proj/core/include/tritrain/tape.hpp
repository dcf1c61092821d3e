// Copyright 2026 The tritrain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reverse-mode differentiation over a linear tape.
//
// Every primitive appends one node holding its forward value and a closure
// that pushes the node's gradient into its parents. Nodes are appended in
// evaluation order, so a reverse sweep over the tape is a valid topological
// order. A tape is single-use: backward() may run once, after which the tape
// must be discarded and the forward pass rebuilt.

#ifndef TRITRAIN_TAPE_HPP_
#define TRITRAIN_TAPE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tritrain/rng.hpp"
#include "tritrain/tensor.hpp"

namespace tritrain {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Constant input; no gradient is tracked for it.
  Var input(Tensor value);

  /// Trainable leaf. backward() accumulates into p.grad; p must outlive the tape.
  Var parameter(Parameter& p);

  /// Read-only leaf over a frozen parameter (inference).
  Var parameter(const Parameter& p);

  /// Populates the gradient of every trainable parameter reachable from loss.
  /// loss must hold exactly one element. Throws if called a second time.
  void backward(Var loss);

  /// Hash of the piecewise-linear regime of the recorded forward pass: ReLU
  /// sign patterns and max-pool argmax positions. Two evaluations with the
  /// same signature lie in the same smooth piece of the function.
  std::uint64_t activation_signature() const { return signature_; }

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  // Used by primitives.
  const Tensor& value(std::size_t i) const;
  bool needs_grad(std::size_t i) const { return nodes_[i].needs_grad; }
  Tensor& grad(std::size_t i);
  Var record(Tensor value, std::span<const Var> parents, BackwardFn backward);
  void note_regime(std::uint64_t hash);

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    Tensor* grad_target = nullptr;
    bool needs_grad = false;
    bool grad_touched = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::uint64_t signature_ = 0x84222325cbf29ce4ULL;
  bool consumed_ = false;
};

// Primitives. Each validates shapes and throws ShapeError naming both operands.

/// y = xW + b. x is (n x d_in) or a length-d_in vector, W is (d_in x d_out),
/// b is (d_out). A vector input yields a vector output.
Var affine(Var x, Var weight, Var bias);

/// max(0, x) elementwise; the subgradient at 0 is 0.
Var relu(Var x);

/// Valid 1-D convolution. x is (len x d), filters (k x w x d), bias (k);
/// output is ((len - w + 1) x k). Requires len >= w.
Var conv1d_valid(Var x, Var filters, Var bias);

/// Columnwise maximum of a (len x k) tensor. Ties go to the earliest row.
Var max_over_time(Var x);

/// Mean over the rows of a (n x d) tensor, giving a length-d vector.
Var mean_rows(Var x);

/// Concatenation of vectors in argument order.
Var concat(std::span<const Var> parts);

/// Inverted dropout. In train mode each element is zeroed with probability
/// rate and survivors are scaled by 1/(1 - rate); otherwise the identity.
Var dropout(Var x, double rate, Rng& rng, bool train_mode);

/// -log softmax(logits)[label] with max subtraction. Result has shape {1}.
Var softmax_cross_entropy(Var logits, int label);

/// 0.5 * sum(x^2).
Var half_squared_norm(Var x);

/// Sum of all elements.
Var sum(Var x);

/// Stable softmax of a logit vector.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace tritrain

#endif  // TRITRAIN_TAPE_HPP_

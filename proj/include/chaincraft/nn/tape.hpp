// Copyright 2026 The ChainCraft Authors
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

#ifndef CHAINCRAFT_NN_TAPE_HPP_
#define CHAINCRAFT_NN_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "chaincraft/nn/parameter_set.hpp"
#include "chaincraft/nn/real_array.hpp"

namespace chaincraft::nn {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  const RealArray& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode recording of a fixed set of array operations. A tape covers
// one forward pass; Backward() may be called once, after which gradients of
// every parameter that took part are accumulated into Parameter::grad.
//
// With record_gradients=false the tape only evaluates forward values.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(RealArray value);
  // Leaf for a trainable parameter. Repeated calls with the same parameter
  // return the same node, so its gradient is accumulated exactly once.
  Var Param(Parameter& param);

  void Backward(Var loss);

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  const RealArray& value(Var v) const;
  // Gradient of the last Backward() loss with respect to `v`. Zero-filled if
  // nothing flowed into it.
  RealArray grad(Var v) const;

  // Operation plumbing.
  bool RequiresGrad(std::size_t id) const { return nodes_[id].requires_grad; }
  const RealArray& ValueAt(std::size_t id) const { return nodes_[id].value; }
  const RealArray& GradAt(std::size_t id) const { return nodes_[id].grad; }
  // Gradient buffer for `id`, allocated on first use.
  RealArray& MutableGrad(std::size_t id);
  Var Emit(RealArray value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var Emit(RealArray value, std::span<const Var> inputs, BackwardFn fn);

 private:
  struct Node {
    RealArray value;
    RealArray grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  void CheckOwned(Var v) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool record_;
  bool backward_done_ = false;
};

// Operations. All inputs must live on the same tape. 2-D operations treat
// an array as [dim(0) x remaining].

// x[N x I] * w[I x O] + b[O]
Var Linear(Var x, Var w, Var b);
// Same-padding 2-D convolution, odd square kernel.
// x[N x C x H x W], w[O x C x K x K], b[O] -> [N x O x H x W]
Var Conv2d(Var x, Var w, Var b);

Var Relu(Var x);
Var Tanh(Var x);
Var Sigmoid(Var x);
Var Exp(Var x);
Var Square(Var x);

Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var x, double factor);
Var AddConstant(Var x, double constant);

Var ConcatCols(std::span<const Var> parts);
Var SliceCols(Var x, std::size_t begin, std::size_t count);
Var ConcatRows(std::span<const Var> parts);
Var SliceRows(Var x, std::size_t begin, std::size_t count);
Var GatherRows(Var x, std::span<const std::size_t> rows);
Var Reshape(Var x, Shape shape);

// Row-wise log-softmax of [N x K].
Var LogSoftmax(Var x);
// out[n] = x[n, index[n]] -> [N x 1]
Var GatherCols(Var x, std::span<const int> index);
// sum_i weights[i] * x[i] -> scalar; weights are constants.
Var Dot(Var x, const RealArray& weights);
Var Sum(Var x);

}  // namespace chaincraft::nn

#endif  // CHAINCRAFT_NN_TAPE_HPP_

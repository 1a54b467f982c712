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

#ifndef CHAINCRAFT_NN_OPTIMIZER_HPP_
#define CHAINCRAFT_NN_OPTIMIZER_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "chaincraft/nn/parameter_set.hpp"

namespace chaincraft::nn {

enum class OptimizerKind { kAdam, kSgd };

struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global-norm gradient clipping threshold; <= 0 disables.
  double max_grad_norm = 40.0;
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // Applies one update from the accumulated gradients, then zeroes them.
  virtual void Step(ParameterSet& params) = 0;
  virtual void set_learning_rate(double lr) = 0;
  virtual double learning_rate() const = 0;
};

struct AdamMoments {
  RealArray first;
  RealArray second;
};

class Adam : public Optimizer {
 public:
  explicit Adam(const OptimizerOptions& options) : options_(options) {}

  void Step(ParameterSet& params) override;
  void set_learning_rate(double lr) override { options_.learning_rate = lr; }
  double learning_rate() const override { return options_.learning_rate; }

  std::uint64_t step_count() const { return step_count_; }
  const std::map<std::string, AdamMoments>& moments() const { return moments_; }

 private:
  OptimizerOptions options_;
  std::uint64_t step_count_ = 0;
  std::map<std::string, AdamMoments> moments_;
};

class Sgd : public Optimizer {
 public:
  explicit Sgd(double learning_rate) : learning_rate_(learning_rate) {}

  void Step(ParameterSet& params) override;
  void set_learning_rate(double lr) override { learning_rate_ = lr; }
  double learning_rate() const override { return learning_rate_; }

 private:
  double learning_rate_;
};

std::unique_ptr<Optimizer> MakeOptimizer(const OptimizerOptions& options);

}  // namespace chaincraft::nn

#endif  // CHAINCRAFT_NN_OPTIMIZER_HPP_

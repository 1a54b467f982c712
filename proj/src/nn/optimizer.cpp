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

#include "chaincraft/nn/optimizer.hpp"

#include <cmath>

namespace chaincraft::nn {

void Adam::Step(ParameterSet& params) {
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double correction1 = 1.0 - std::pow(options_.beta1, t);
  const double correction2 = 1.0 - std::pow(options_.beta2, t);
  for (auto& [name, param] : params) {
    auto [it, inserted] = moments_.try_emplace(name);
    if (inserted) {
      it->second.first = RealArray(param.value.shape());
      it->second.second = RealArray(param.value.shape());
    }
    RealArray& m = it->second.first;
    RealArray& v = it->second.second;
    for (std::size_t i = 0; i < param.value.size(); ++i) {
      const double g = param.grad[i];
      m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g;
      v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      param.value[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
  params.ZeroGrad();
}

void Sgd::Step(ParameterSet& params) {
  for (auto& [name, param] : params) {
    for (std::size_t i = 0; i < param.value.size(); ++i) {
      param.value[i] -= learning_rate_ * param.grad[i];
    }
  }
  params.ZeroGrad();
}

std::unique_ptr<Optimizer> MakeOptimizer(const OptimizerOptions& options) {
  if (options.kind == OptimizerKind::kSgd) {
    return std::make_unique<Sgd>(options.learning_rate);
  }
  return std::make_unique<Adam>(options);
}

}  // namespace chaincraft::nn

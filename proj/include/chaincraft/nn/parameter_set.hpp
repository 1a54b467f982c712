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

#ifndef CHAINCRAFT_NN_PARAMETER_SET_HPP_
#define CHAINCRAFT_NN_PARAMETER_SET_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chaincraft/nn/real_array.hpp"

namespace chaincraft::nn {

struct Parameter {
  RealArray value;
  RealArray grad;
};

// Named parameters with matching gradient accumulators. Iteration order is
// lexicographic by name, which fixes the checkpoint layout.
class ParameterSet {
 public:
  // Adds a parameter with a zero gradient of the same shape. Names are unique.
  Parameter& Add(const std::string& name, RealArray value);

  bool Contains(const std::string& name) const;
  Parameter& Get(const std::string& name);
  const Parameter& Get(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t ScalarCount() const;
  std::vector<std::string> Names() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void ZeroGrad();
  double GradNorm() const;
  // Scales gradients so the global L2 norm is at most max_norm; returns the
  // norm before clipping.
  double ClipGradNorm(double max_norm);

  // Copies values of every name present in both sets. Shapes must agree.
  void CopyValuesFrom(const ParameterSet& other);

  // FNV-1a over names and raw value bytes; used to assert "unchanged".
  std::uint64_t ValueHash() const;

  bool operator==(const ParameterSet& other) const;

 private:
  std::map<std::string, Parameter> params_;
};

}  // namespace chaincraft::nn

#endif  // CHAINCRAFT_NN_PARAMETER_SET_HPP_

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

#include "chaincraft/nn/parameter_set.hpp"

#include <cmath>
#include <cstring>

#include "chaincraft/errors.hpp"

namespace chaincraft::nn {

Parameter& ParameterSet::Add(const std::string& name, RealArray value) {
  if (params_.contains(name)) {
    throw ConfigurationError("duplicate parameter name: " + name);
  }
  Parameter param;
  param.grad = RealArray(value.shape());
  param.value = std::move(value);
  return params_.emplace(name, std::move(param)).first->second;
}

bool ParameterSet::Contains(const std::string& name) const {
  return params_.contains(name);
}

Parameter& ParameterSet::Get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigurationError("unknown parameter: " + name);
  return it->second;
}

const Parameter& ParameterSet::Get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigurationError("unknown parameter: " + name);
  return it->second;
}

std::size_t ParameterSet::ScalarCount() const {
  std::size_t count = 0;
  for (const auto& [name, param] : params_) count += param.value.size();
  return count;
}

std::vector<std::string> ParameterSet::Names() const {
  std::vector<std::string> names;
  names.reserve(params_.size());
  for (const auto& [name, param] : params_) names.push_back(name);
  return names;
}

void ParameterSet::ZeroGrad() {
  for (auto& [name, param] : params_) param.grad.Fill(0.0);
}

double ParameterSet::GradNorm() const {
  double sum = 0.0;
  for (const auto& [name, param] : params_) {
    for (double g : param.grad.data()) sum += g * g;
  }
  return std::sqrt(sum);
}

double ParameterSet::ClipGradNorm(double max_norm) {
  const double norm = GradNorm();
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& [name, param] : params_) {
      for (double& g : param.grad.data()) g *= scale;
    }
  }
  return norm;
}

void ParameterSet::CopyValuesFrom(const ParameterSet& other) {
  for (auto& [name, param] : params_) {
    auto it = other.params_.find(name);
    if (it == other.params_.end()) continue;
    if (it->second.value.shape() != param.value.shape()) {
      throw ConfigurationError("parameter " + name + " shape mismatch: " +
                               ShapeString(param.value.shape()) + " vs " +
                               ShapeString(it->second.value.shape()));
    }
    param.value = it->second.value;
  }
}

std::uint64_t ParameterSet::ValueHash() const {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](const void* bytes, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= p[i];
      hash *= 1099511628211ULL;
    }
  };
  for (const auto& [name, param] : params_) {
    mix(name.data(), name.size());
    mix(param.value.data().data(), param.value.size() * sizeof(double));
  }
  return hash;
}

bool ParameterSet::operator==(const ParameterSet& other) const {
  if (params_.size() != other.params_.size()) return false;
  auto a = params_.begin();
  auto b = other.params_.begin();
  for (; a != params_.end(); ++a, ++b) {
    if (a->first != b->first) return false;
    if (a->second.value.shape() != b->second.value.shape()) return false;
    if (std::memcmp(a->second.value.data().data(), b->second.value.data().data(),
                    a->second.value.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace chaincraft::nn

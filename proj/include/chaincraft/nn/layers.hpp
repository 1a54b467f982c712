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

#ifndef CHAINCRAFT_NN_LAYERS_HPP_
#define CHAINCRAFT_NN_LAYERS_HPP_

#include <random>
#include <string>

#include "chaincraft/nn/parameter_set.hpp"
#include "chaincraft/nn/tape.hpp"

namespace chaincraft::nn {

using Rng = std::mt19937_64;

// Parameter construction. Dense and conv weights are uniform in
// +-1/sqrt(fan_in); biases start at zero.
void AddLinear(ParameterSet& params, const std::string& name, std::size_t in,
               std::size_t out, Rng& rng);
void AddConv(ParameterSet& params, const std::string& name, std::size_t in_channels,
             std::size_t out_channels, std::size_t kernel, Rng& rng);
// Input weights uniform, recurrent weights orthogonal per gate, forget-gate
// bias 1.
void AddLstm(ParameterSet& params, const std::string& name, std::size_t in,
             std::size_t hidden, Rng& rng);
void AddResidualBlock(ParameterSet& params, const std::string& name,
                      std::size_t channels, std::size_t convs, Rng& rng);

// Forward builders; inputs are checked for non-finite values.
Var LinearLayer(Tape& tape, ParameterSet& params, const std::string& name, Var x);
Var ConvLayer(Tape& tape, ParameterSet& params, const std::string& name, Var x);
// x + F(x) where F = (relu -> conv) repeated `convs` times.
Var ResidualBlock(Tape& tape, ParameterSet& params, const std::string& name, Var x,
                  std::size_t convs);

struct LstmVars {
  Var h;
  Var c;
};

// One LSTM step: gates = [x, h] W + b split as (input, forget, cell, output).
LstmVars LstmStep(Tape& tape, ParameterSet& params, const std::string& name, Var x,
                  LstmVars state);

// Random orthogonal n x n matrix (row-major).
std::vector<double> RandomOrthogonal(std::size_t n, Rng& rng);

}  // namespace chaincraft::nn

#endif  // CHAINCRAFT_NN_LAYERS_HPP_

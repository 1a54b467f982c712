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

#include "chaincraft/nn/layers.hpp"

#include <Eigen/QR>
#include <cmath>

#include "chaincraft/errors.hpp"

namespace chaincraft::nn {
namespace {

RealArray UniformArray(Shape shape, double bound, Rng& rng) {
  RealArray out(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : out.data()) v = dist(rng);
  return out;
}

}  // namespace

std::vector<double> RandomOrthogonal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd gaussian(n, n);
  for (Eigen::Index r = 0; r < gaussian.rows(); ++r) {
    for (Eigen::Index c = 0; c < gaussian.cols(); ++c) gaussian(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign fix so the distribution is uniform over the orthogonal group.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  }
  std::vector<double> out(n * n);
  for (std::size_t r2 = 0; r2 < n; ++r2) {
    for (std::size_t c = 0; c < n; ++c) {
      out[r2 * n + c] = q(static_cast<Eigen::Index>(r2), static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

void AddLinear(ParameterSet& params, const std::string& name, std::size_t in,
               std::size_t out, Rng& rng) {
  params.Add(name + "/w", UniformArray({in, out}, 1.0 / std::sqrt(double(in)), rng));
  params.Add(name + "/b", RealArray({out}));
}

void AddConv(ParameterSet& params, const std::string& name, std::size_t in_channels,
             std::size_t out_channels, std::size_t kernel, Rng& rng) {
  const double fan_in = double(in_channels * kernel * kernel);
  params.Add(name + "/w", UniformArray({out_channels, in_channels, kernel, kernel},
                                       1.0 / std::sqrt(fan_in), rng));
  params.Add(name + "/b", RealArray({out_channels}));
}

void AddLstm(ParameterSet& params, const std::string& name, std::size_t in,
             std::size_t hidden, Rng& rng) {
  const std::size_t gates = 4 * hidden;
  RealArray w({in + hidden, gates});
  std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(double(in)),
                                              1.0 / std::sqrt(double(in)));
  for (std::size_t r = 0; r < in; ++r) {
    for (std::size_t c = 0; c < gates; ++c) w.at(r, c) = dist(rng);
  }
  for (std::size_t gate = 0; gate < 4; ++gate) {
    const std::vector<double> q = RandomOrthogonal(hidden, rng);
    for (std::size_t r = 0; r < hidden; ++r) {
      for (std::size_t c = 0; c < hidden; ++c) {
        w.at(in + r, gate * hidden + c) = q[r * hidden + c];
      }
    }
  }
  RealArray b({gates});
  for (std::size_t c = hidden; c < 2 * hidden; ++c) b[c] = 1.0;
  params.Add(name + "/w", std::move(w));
  params.Add(name + "/b", std::move(b));
}

void AddResidualBlock(ParameterSet& params, const std::string& name,
                      std::size_t channels, std::size_t convs, Rng& rng) {
  for (std::size_t i = 0; i < convs; ++i) {
    AddConv(params, name + "/conv" + std::to_string(i), channels, channels, 3, rng);
  }
}

Var LinearLayer(Tape& tape, ParameterSet& params, const std::string& name, Var x) {
  RequireFinite(x.value(), name.c_str());
  return Linear(x, tape.Param(params.Get(name + "/w")), tape.Param(params.Get(name + "/b")));
}

Var ConvLayer(Tape& tape, ParameterSet& params, const std::string& name, Var x) {
  RequireFinite(x.value(), name.c_str());
  return Conv2d(x, tape.Param(params.Get(name + "/w")), tape.Param(params.Get(name + "/b")));
}

Var ResidualBlock(Tape& tape, ParameterSet& params, const std::string& name, Var x,
                  std::size_t convs) {
  Var h = x;
  for (std::size_t i = 0; i < convs; ++i) {
    h = ConvLayer(tape, params, name + "/conv" + std::to_string(i), Relu(h));
  }
  if (h.shape() != x.shape()) {
    throw ConfigurationError("ResidualBlock " + name + ": channel mismatch " +
                             ShapeString(x.shape()) + " vs " + ShapeString(h.shape()));
  }
  return Add(x, h);
}

LstmVars LstmStep(Tape& tape, ParameterSet& params, const std::string& name, Var x,
                  LstmVars state) {
  RequireFinite(x.value(), name.c_str());
  const std::size_t hidden = state.h.value().cols();
  const Parameter& w = params.Get(name + "/w");
  if (w.value.dim(1) != 4 * hidden || w.value.dim(0) != x.value().cols() + hidden ||
      state.c.value().shape() != state.h.value().shape() ||
      state.h.value().rows() != x.value().rows()) {
    throw ConfigurationError("LstmStep " + name + ": input " + ShapeString(x.shape()) +
                             ", state " + ShapeString(state.h.shape()) + ", weights " +
                             ShapeString(w.value.shape()));
  }
  const Var parts[] = {x, state.h};
  Var gates = LinearLayer(tape, params, name, ConcatCols(parts));
  Var input_gate = Sigmoid(SliceCols(gates, 0, hidden));
  Var forget_gate = Sigmoid(SliceCols(gates, hidden, hidden));
  Var cell_input = Tanh(SliceCols(gates, 2 * hidden, hidden));
  Var output_gate = Sigmoid(SliceCols(gates, 3 * hidden, hidden));
  Var c = Add(Mul(forget_gate, state.c), Mul(input_gate, cell_input));
  Var h = Mul(output_gate, Tanh(c));
  return {h, c};
}

}  // namespace chaincraft::nn

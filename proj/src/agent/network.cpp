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

#include "chaincraft/agent/network.hpp"

#include <algorithm>
#include <cstring>

#include "chaincraft/errors.hpp"

namespace chaincraft::agent {
namespace {

using nn::RealArray;
using nn::Tape;
using nn::Var;

std::size_t Size(int v) { return static_cast<std::size_t>(v); }

void RequireState(const RecurrentState& state, std::size_t batch, std::size_t hidden) {
  const nn::Shape want = {batch, hidden};
  if (state.h.shape() != want || state.c.shape() != want) {
    throw ConfigurationError("recurrent state has shape " + nn::ShapeString(state.h.shape()) +
                             ", expected " + nn::ShapeString(want));
  }
}

}  // namespace

void NetworkConfig::Validate() const {
  auto positive = [](int v, const char* what) {
    if (v <= 0) throw ConfigurationError(std::string("network.") + what + " must be positive");
  };
  positive(channels, "channels");
  positive(spatial_units, "spatial_units");
  positive(lstm_hidden, "lstm_hidden");
  positive(view_side, "view_side");
  if (residual_blocks < 0) throw ConfigurationError("network.residual_blocks must be >= 0");
  positive(convs_per_block, "convs_per_block");
  if (nonspatial_units.empty()) throw ConfigurationError("network.nonspatial_units is empty");
  for (int u : nonspatial_units) positive(u, "nonspatial_units");
  if (inventory_subnet) {
    if (inventory_units.empty()) throw ConfigurationError("network.inventory_units is empty");
    for (int u : inventory_units) positive(u, "inventory_units");
  }
}

RecurrentState RecurrentState::Zero(std::size_t batch, std::size_t hidden) {
  return {RealArray({batch, hidden}), RealArray({batch, hidden})};
}

RecurrentState RecurrentState::Row(std::size_t b) const {
  const std::size_t hidden = h.cols();
  RecurrentState out = Zero(1, hidden);
  std::copy_n(h.data().begin() + b * hidden, hidden, out.h.data().begin());
  std::copy_n(c.data().begin() + b * hidden, hidden, out.c.data().begin());
  return out;
}

RecurrentState RecurrentState::Stack(std::span<const RecurrentState> rows) {
  if (rows.empty()) throw UsageError("RecurrentState::Stack: no rows");
  const std::size_t hidden = rows[0].h.cols();
  std::size_t total = 0;
  for (const auto& r : rows) {
    if (r.h.cols() != hidden) throw ConfigurationError("RecurrentState::Stack: hidden mismatch");
    total += r.batch();
  }
  RecurrentState out = Zero(total, hidden);
  std::size_t offset = 0;
  for (const auto& r : rows) {
    std::copy(r.h.data().begin(), r.h.data().end(), out.h.data().begin() + offset);
    std::copy(r.c.data().begin(), r.c.data().end(), out.c.data().begin() + offset);
    offset += r.h.data().size();
  }
  return out;
}

ComposedDistribution NetworkOutput::Distribution(std::size_t row) const {
  if (!has_policy()) throw UsageError("network output has no policy heads");
  ComposedDistribution d;
  for (int h = 0; h < env::kHeadCount; ++h) {
    const RealArray& lp = head_log_probs[h].value();
    const std::size_t k = lp.cols();
    d.log_probs[h].assign(lp.data().begin() + row * k, lp.data().begin() + (row + 1) * k);
  }
  return d;
}

double NetworkOutput::Value(std::size_t row) const {
  if (!has_value()) throw UsageError("network output has no value head");
  return values.value().data()[row];
}

AgentNetwork::AgentNetwork(const NetworkConfig& config, NetworkRole role, std::string prefix,
                           std::uint64_t seed)
    : config_(config), role_(role), prefix_(std::move(prefix)) {
  config_.Validate();
  nn::Rng rng(seed);
  const std::size_t side = Size(config_.view_side);
  const std::size_t cells = side * side;
  if (config_.encoder == EncoderKind::kResidual) {
    const std::size_t ch = Size(config_.channels);
    nn::AddConv(params_, Name("spatial/stem"), env::kTileKinds, ch, 3, rng);
    for (int b = 0; b < config_.residual_blocks; ++b) {
      nn::AddResidualBlock(params_, Name("spatial/block" + std::to_string(b)), ch,
                           Size(config_.convs_per_block), rng);
    }
    nn::AddLinear(params_, Name("spatial/proj"), ch * cells, Size(config_.spatial_units), rng);
  } else {
    nn::AddLinear(params_, Name("spatial/dense"), env::kTileKinds * cells,
                  Size(config_.spatial_units), rng);
  }
  std::size_t in = kNonSpatialSize;
  for (std::size_t i = 0; i < config_.nonspatial_units.size(); ++i) {
    const std::size_t out = Size(config_.nonspatial_units[i]);
    nn::AddLinear(params_, Name("nonspatial/dense" + std::to_string(i)), in, out, rng);
    in = out;
  }
  const std::size_t trunk_in = Size(config_.spatial_units) + in;
  nn::AddLstm(params_, Name("lstm"), trunk_in, hidden(), rng);
  if (has_policy()) {
    std::size_t inventory_out = 0;
    if (config_.inventory_subnet) {
      std::size_t inv_in = kInventorySize;
      for (std::size_t i = 0; i < config_.inventory_units.size(); ++i) {
        const std::size_t out = Size(config_.inventory_units[i]);
        nn::AddLinear(params_, Name("inventory/dense" + std::to_string(i)), inv_in, out, rng);
        inv_in = out;
      }
      inventory_out = inv_in;
    }
    for (int h = 0; h < env::kHeadCount; ++h) {
      const std::size_t head_in = hidden() + (UsesInventory(h) ? inventory_out : 0);
      nn::AddLinear(params_, Name(std::string("head/") + env::kHeadNames[h]), head_in,
                    Size(env::kHeadSizes[h]), rng);
    }
  }
  if (has_value()) nn::AddLinear(params_, Name("value"), hidden(), 1, rng);
}

Var AgentNetwork::EncodeSpatial(Tape& tape, const FeatureBatch& features) {
  const std::size_t n = features.rows();
  const std::size_t side = Size(config_.view_side);
  const nn::Shape want = {n, std::size_t{env::kTileKinds}, side, side};
  if (features.spatial.shape() != want) {
    throw ConfigurationError("spatial features have shape " +
                             nn::ShapeString(features.spatial.shape()) + ", expected " +
                             nn::ShapeString(want));
  }
  Var x = tape.Constant(features.spatial);
  if (config_.encoder == EncoderKind::kResidual) {
    x = nn::ConvLayer(tape, params_, Name("spatial/stem"), x);
    for (int b = 0; b < config_.residual_blocks; ++b) {
      x = nn::ResidualBlock(tape, params_, Name("spatial/block" + std::to_string(b)), x,
                            Size(config_.convs_per_block));
    }
    x = nn::Relu(x);
    x = nn::Reshape(x, {n, Size(config_.channels) * side * side});
    return nn::Relu(nn::LinearLayer(tape, params_, Name("spatial/proj"), x));
  }
  x = nn::Reshape(x, {n, env::kTileKinds * side * side});
  return nn::Relu(nn::LinearLayer(tape, params_, Name("spatial/dense"), x));
}

NetworkOutput AgentNetwork::Forward(Tape& tape, const FeatureBatch& features, std::size_t steps,
                                    const RecurrentState& initial_state) {
  const std::size_t rows = features.rows();
  if (steps == 0 || rows == 0 || rows % steps != 0) {
    throw ConfigurationError("Forward: feature rows must be a positive multiple of steps");
  }
  const std::size_t batch = rows / steps;
  RequireState(initial_state, batch, hidden());
  if (features.nonspatial.shape() != nn::Shape{rows, kNonSpatialSize} ||
      features.inventory.shape() != nn::Shape{rows, kInventorySize}) {
    throw ConfigurationError("Forward: non-spatial or inventory feature shape mismatch");
  }

  Var spatial = EncodeSpatial(tape, features);
  Var ns = tape.Constant(features.nonspatial);
  for (std::size_t i = 0; i < config_.nonspatial_units.size(); ++i) {
    ns = nn::Relu(
        nn::LinearLayer(tape, params_, Name("nonspatial/dense" + std::to_string(i)), ns));
  }
  const Var joined_parts[] = {spatial, ns};
  Var joined = nn::ConcatCols(joined_parts);

  nn::LstmVars state{tape.Constant(initial_state.h), tape.Constant(initial_state.c)};
  std::vector<Var> outputs;
  outputs.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Var x = steps == 1 ? joined : nn::SliceRows(joined, t * batch, batch);
    state = nn::LstmStep(tape, params_, Name("lstm"), x, state);
    outputs.push_back(state.h);
  }
  Var core = steps == 1 ? outputs[0] : nn::ConcatRows(outputs);

  NetworkOutput out;
  out.steps = steps;
  out.batch = batch;
  out.final_state = {state.h.value(), state.c.value()};
  if (has_policy()) {
    Var inventory;
    if (config_.inventory_subnet) {
      inventory = tape.Constant(features.inventory);
      for (std::size_t i = 0; i < config_.inventory_units.size(); ++i) {
        inventory = nn::Relu(nn::LinearLayer(
            tape, params_, Name("inventory/dense" + std::to_string(i)), inventory));
      }
    }
    for (int h = 0; h < env::kHeadCount; ++h) {
      Var head_in = core;
      if (inventory.valid() && UsesInventory(h)) {
        const Var parts[] = {core, inventory};
        head_in = nn::ConcatCols(parts);
      }
      Var logits =
          nn::LinearLayer(tape, params_, Name(std::string("head/") + env::kHeadNames[h]), head_in);
      out.head_log_probs[h] = nn::LogSoftmax(logits);
    }
  }
  if (has_value()) out.values = nn::LinearLayer(tape, params_, Name("value"), core);
  return out;
}

StepResult AgentNetwork::Step(const FeatureBatch& features, const RecurrentState& state) {
  Tape tape(false);
  NetworkOutput out = Forward(tape, features, 1, state);
  StepResult result;
  result.state = std::move(out.final_state);
  if (out.has_policy()) {
    result.distributions.reserve(out.batch);
    for (std::size_t b = 0; b < out.batch; ++b) result.distributions.push_back(out.Distribution(b));
  }
  if (out.has_value()) {
    const auto v = out.values.value().data();
    result.values.assign(v.begin(), v.end());
  }
  return result;
}

std::size_t AgentNetwork::LoadMatching(const nn::ParameterSet& source) {
  std::size_t copied = 0;
  for (auto& [name, param] : params_) {
    if (!source.Contains(name)) continue;
    const auto& other = source.Get(name).value;
    if (other.shape() != param.value.shape()) {
      throw ConfigurationError("checkpoint parameter " + name + " has shape " +
                               nn::ShapeString(other.shape()) + ", expected " +
                               nn::ShapeString(param.value.shape()));
    }
    param.value = other;
    ++copied;
  }
  return copied;
}

}  // namespace chaincraft::agent

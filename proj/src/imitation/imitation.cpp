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

#include "chaincraft/imitation/imitation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "chaincraft/errors.hpp"
#include "chaincraft/nn/checkpoint.hpp"

namespace chaincraft::imitation {
namespace {

using agent::AgentNetwork;
using agent::RecurrentState;
using nn::RealArray;
using nn::Var;

struct SliceLoss {
  Var loss;
  std::size_t valid_steps = 0;
  agent::NetworkOutput output;
};

SliceLoss BuildLoss(nn::Tape& tape, AgentNetwork& actor, std::span<const EpisodeSlice> slices,
                    std::vector<RecurrentState>& states,
                    const std::array<double, env::kHeadCount>& head_weights) {
  if (slices.empty()) throw UsageError("supervised update: empty batch");
  if (!actor.has_policy()) throw UsageError("supervised update: network has no policy heads");
  if (states.size() != slices.size()) throw UsageError("supervised update: one state per slice");
  const std::size_t batch = slices.size();
  std::size_t steps = 0;
  for (const auto& s : slices) {
    if (s.episode == nullptr || s.length == 0 || s.begin + s.length > s.episode->length()) {
      throw UsageError("supervised update: slice outside its episode");
    }
    steps = std::max(steps, s.length);
  }
  std::vector<const env::Observation*> obs(steps * batch);
  std::vector<env::ComposedAction> actions(steps * batch, env::NoOp());
  std::vector<double> mask(steps * batch, 0.0);
  std::size_t valid = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t b = 0; b < batch; ++b) {
      const EpisodeSlice& s = slices[b];
      const std::size_t row = t * batch + b;
      const std::size_t index = s.begin + std::min(t, s.length - 1);
      obs[row] = &s.episode->records[index].observation;
      if (t < s.length) {
        actions[row] = s.episode->records[index].action;
        mask[row] = 1.0;
        ++valid;
      }
    }
  }
  const agent::FeatureBatch features = agent::Featurize(obs);
  SliceLoss out;
  out.output = actor.Forward(tape, features, steps, RecurrentState::Stack(states));
  out.valid_steps = valid;
  std::vector<int> index(actions.size());
  for (int h = 0; h < env::kHeadCount; ++h) {
    if (head_weights[h] == 0.0) continue;
    for (std::size_t i = 0; i < actions.size(); ++i) index[i] = actions[i][h];
    RealArray coeff({actions.size(), 1});
    for (std::size_t i = 0; i < actions.size(); ++i) {
      coeff.data()[i] = -head_weights[h] * mask[i] / static_cast<double>(valid);
    }
    Var term = nn::Dot(nn::GatherCols(out.output.head_log_probs[h], index), coeff);
    out.loss = out.loss.valid() ? nn::Add(out.loss, term) : term;
  }
  if (!out.loss.valid()) out.loss = tape.Constant(RealArray::Scalar(0.0));
  for (std::size_t b = 0; b < batch; ++b) states[b] = out.output.final_state.Row(b);
  return out;
}

std::string HeadAccuracyColumns() {
  std::string s;
  for (const char* name : env::kHeadNames) s += std::string(",acc_") + name;
  return s;
}

}  // namespace

void PretrainConfig::Validate() const {
  if (epochs < 0) throw ConfigurationError("pretrain.epochs must be >= 0");
  if (!(learning_rate >= 0.0)) throw ConfigurationError("pretrain.learning_rate must be >= 0");
  if (batch_size < 1) throw ConfigurationError("pretrain.batch_size must be >= 1");
  if (bptt_window < 1) throw ConfigurationError("pretrain.bptt_window must be >= 1");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw ConfigurationError("pretrain.holdout_fraction must be in [0, 1)");
  }
  for (double w : head_weights) {
    if (!(w >= 0.0)) throw ConfigurationError("pretrain.head_weights must be >= 0");
  }
}

double SupervisedUpdate(AgentNetwork& actor, nn::Optimizer& optimizer,
                        std::span<const EpisodeSlice> slices, std::vector<RecurrentState>& states,
                        const std::array<double, env::kHeadCount>& head_weights,
                        double max_grad_norm) {
  nn::Tape tape;
  actor.params().ZeroGrad();
  SliceLoss built = BuildLoss(tape, actor, slices, states, head_weights);
  const double loss = built.loss.value().data()[0];
  tape.Backward(built.loss);
  if (max_grad_norm > 0.0) actor.params().ClipGradNorm(max_grad_norm);
  optimizer.Step(actor.params());
  return loss;
}

double SupervisedLoss(AgentNetwork& actor, std::span<const EpisodeSlice> slices,
                      std::vector<RecurrentState>& states,
                      const std::array<double, env::kHeadCount>& head_weights) {
  nn::Tape tape(false);
  return BuildLoss(tape, actor, slices, states, head_weights).loss.value().data()[0];
}

HoldoutAccuracy EvaluateAccuracy(AgentNetwork& actor,
                                 std::span<const demo::SubsampledEpisode* const> episodes) {
  HoldoutAccuracy acc;
  std::size_t joint = 0;
  std::array<std::size_t, env::kHeadCount> correct{};
  for (const auto* episode : episodes) {
    if (episode->length() == 0) continue;
    std::vector<const env::Observation*> obs;
    for (const auto& r : episode->records) obs.push_back(&r.observation);
    nn::Tape tape(false);
    const auto out =
        actor.Forward(tape, agent::Featurize(obs), obs.size(), actor.InitialState(1));
    for (std::size_t t = 0; t < obs.size(); ++t) {
      const env::ComposedAction predicted = out.Distribution(t).Greedy();
      bool all = true;
      for (int h = 0; h < env::kHeadCount; ++h) {
        const bool ok = predicted[h] == episode->records[t].action[h];
        correct[h] += ok;
        all = all && ok;
      }
      joint += all;
      ++acc.steps;
    }
  }
  if (acc.steps > 0) {
    const double n = static_cast<double>(acc.steps);
    for (int h = 0; h < env::kHeadCount; ++h) acc.per_head[h] = correct[h] / n;
    acc.joint = joint / n;
  }
  return acc;
}

void CheckDatasetCompatible(const demo::Dataset& dataset, const agent::NetworkConfig& network) {
  const std::size_t cells =
      static_cast<std::size_t>(network.view_side) * static_cast<std::size_t>(network.view_side);
  for (const auto& episode : dataset) {
    for (const auto& r : episode.records) {
      if (!r.action.IsValid()) {
        throw ConfigurationError("dataset action does not fit the network's action heads");
      }
      if (r.observation.view.size() != cells) {
        throw ConfigurationError("dataset view size " + std::to_string(r.observation.view.size()) +
                                 " does not match network view_side " +
                                 std::to_string(network.view_side));
      }
    }
  }
}

PretrainResult Pretrain(const demo::Dataset& dataset, const agent::NetworkConfig& network,
                        const PretrainConfig& config, const PretrainOutputs& outputs) {
  config.Validate();
  std::vector<const demo::SubsampledEpisode*> usable;
  for (const auto& e : dataset) {
    if (e.length() > 0) usable.push_back(&e);
  }
  if (usable.empty()) throw UsageError("pretrain: dataset has no non-empty episodes");
  CheckDatasetCompatible(dataset, network);

  std::mt19937_64 rng(config.seed);
  AgentNetwork actor(network, agent::NetworkRole::kActor, "actor/", rng());
  nn::OptimizerOptions opt_options;
  opt_options.learning_rate = config.learning_rate;
  auto optimizer = nn::MakeOptimizer(opt_options);

  std::shuffle(usable.begin(), usable.end(), rng);
  std::size_t holdout = static_cast<std::size_t>(
      std::floor(config.holdout_fraction * static_cast<double>(usable.size())));
  holdout = std::min(holdout, usable.size() - 1);
  const std::vector<const demo::SubsampledEpisode*> held(usable.begin(),
                                                         usable.begin() + holdout);
  std::vector<const demo::SubsampledEpisode*> train(usable.begin() + holdout, usable.end());

  PretrainResult result;
  result.train_episodes = train.size();
  result.holdout_episodes = held.size();

  std::ofstream csv;
  if (!outputs.directory.empty()) {
    std::filesystem::create_directories(outputs.directory);
    nlohmann::json manifest = {
        {"kind", "pretrain"},
        {"epochs", config.epochs},
        {"learning_rate", config.learning_rate},
        {"batch_size", config.batch_size},
        {"bptt_window", config.bptt_window},
        {"holdout_fraction", config.holdout_fraction},
        {"max_grad_norm", config.max_grad_norm},
        {"head_weights", config.head_weights},
        {"seed", config.seed},
        {"train_episodes", train.size()},
        {"holdout_episodes", held.size()},
        {"inventory_subnet", network.inventory_subnet},
    };
    std::ofstream(outputs.directory / "pretrain.json") << manifest.dump(2) << "\n";
    csv.open(outputs.directory / "epochs.csv");
    csv << "epoch,loss,updates,holdout_joint" << HeadAccuracyColumns() << "\n";
  }

  // Whole-episode loss at initialization, for progress reporting.
  {
    std::vector<EpisodeSlice> slices;
    for (const auto* e : train) slices.push_back({e, 0, e->length()});
    std::vector<RecurrentState> states(slices.size(), actor.InitialState(1));
    result.initial_loss = SupervisedLoss(actor, slices, states, config.head_weights);
  }

  const auto window = static_cast<std::size_t>(config.bptt_window);
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < train.size(); start += batch_size) {
      const std::size_t end = std::min(train.size(), start + batch_size);
      std::vector<const demo::SubsampledEpisode*> group(train.begin() + start,
                                                        train.begin() + end);
      std::vector<RecurrentState> carried(group.size(), actor.InitialState(1));
      std::size_t longest = 0;
      for (const auto* e : group) longest = std::max(longest, e->length());
      for (std::size_t begin = 0; begin < longest; begin += window) {
        std::vector<EpisodeSlice> slices;
        std::vector<std::size_t> members;
        std::vector<RecurrentState> states;
        for (std::size_t i = 0; i < group.size(); ++i) {
          if (group[i]->length() <= begin) continue;
          slices.push_back({group[i], begin, std::min(window, group[i]->length() - begin)});
          members.push_back(i);
          states.push_back(carried[i]);
        }
        loss_sum += SupervisedUpdate(actor, *optimizer, slices, states, config.head_weights,
                                     config.max_grad_norm);
        ++stats.updates;
        for (std::size_t k = 0; k < members.size(); ++k) carried[members[k]] = states[k];
      }
    }
    stats.train_loss = stats.updates > 0 ? loss_sum / stats.updates : 0.0;
    stats.holdout = EvaluateAccuracy(actor, held);
    result.epochs.push_back(stats);
    if (csv.is_open()) {
      csv << epoch << ',' << stats.train_loss << ',' << stats.updates << ','
          << stats.holdout.joint;
      for (double a : stats.holdout.per_head) csv << ',' << a;
      csv << "\n" << std::flush;
      nn::SaveCheckpoint(outputs.directory / "latest.ckpt", actor.params());
    }
    if (outputs.on_epoch) outputs.on_epoch(stats);
  }
  if (!outputs.directory.empty()) {
    nn::SaveCheckpoint(outputs.directory / "final.ckpt", actor.params());
  }
  result.params = actor.params();
  return result;
}

}  // namespace chaincraft::imitation

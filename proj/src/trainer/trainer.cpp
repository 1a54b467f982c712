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

#include "chaincraft/trainer/trainer.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

#include "chaincraft/errors.hpp"
#include "chaincraft/log.hpp"
#include "chaincraft/nn/checkpoint.hpp"
#include "chaincraft/seeding.hpp"

namespace chaincraft::trainer {
namespace {

using agent::AgentNetwork;
using agent::NetworkRole;
using agent::RecurrentState;
using nn::RealArray;
using nn::Var;

bool StartsWith(const std::string& s, const std::string& prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

constexpr const char* kMetricsHeader =
    "update,frames,warmup,online,replayed,policy_gradient,value,entropy,policy_cloning,"
    "value_cloning,total,actor_grad_norm,critic_grad_norm,mean_rho,buffer_size,"
    "buffer_written,return_ema";

void WriteMetricsRow(std::ostream& out, const UpdateMetrics& m) {
  out << m.update << ',' << m.frames << ',' << (m.warmup ? 1 : 0) << ',' << m.online << ','
      << m.replayed << ',' << m.policy_gradient << ',' << m.value << ',' << m.entropy << ','
      << m.policy_cloning << ',' << m.value_cloning << ',' << m.total << ','
      << m.actor_grad_norm << ',' << m.critic_grad_norm << ',' << m.mean_rho << ','
      << m.buffer_size << ',' << m.buffer_written << ',' << m.return_ema << '\n';
}

}  // namespace

std::string AblationFlags::Label() const {
  if (!er && !sac && !ac && !cl) return "IMPALA";
  std::string s;
  if (er) s += "+ER";
  if (sac) s += "+SAC";
  if (ac) s += "+AC";
  if (cl) s += "+CL";
  return s;
}

void TrainerConfig::Normalize() {
  if (replay_ratio < 0) throw ConfigurationError("trainer.replay_ratio must be >= 0");
  if (frame_budget < 1) throw ConfigurationError("trainer.frame_budget must be >= 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw ConfigurationError("trainer.warmup_fraction must be in [0, 1]");
  }
  if (actors < 1) throw ConfigurationError("trainer.actors must be >= 1");
  if (segment_length < 1) throw ConfigurationError("trainer.segment_length must be >= 1");
  if (batch_segments < 1) throw ConfigurationError("trainer.batch_segments must be >= 1");
  if (replay_capacity < 1) throw ConfigurationError("trainer.replay_capacity must be >= 1");
  if (queue_capacity < 1) throw ConfigurationError("trainer.queue_capacity must be >= 1");
  if (!(discount >= 0.0 && discount <= 1.0)) {
    throw ConfigurationError("trainer.discount must be in [0, 1]");
  }
  if (!(c_bar > 0.0) || !(rho_bar >= c_bar)) {
    throw ConfigurationError("trainer.rho_bar >= trainer.c_bar > 0 required");
  }
  if (!(learning_rate >= 0.0)) throw ConfigurationError("trainer.learning_rate must be >= 0");
  if (curve_points < 1) throw ConfigurationError("trainer.curve_points must be >= 1");
  if (flags.cl && !flags.er) {
    LogWarning("trainer.flags.cl requires trainer.flags.er; disabling CL");
    flags.cl = false;
  }
}

int TrainerConfig::OnlinePerBatch() const {
  if (!flags.er) return batch_segments;
  return std::max(1, batch_segments / (replay_ratio + 1));
}

std::int64_t TrainerConfig::WarmupFrames() const {
  if (!flags.sac) return 0;
  return static_cast<std::int64_t>(std::llround(warmup_fraction * static_cast<double>(frame_budget)));
}

void SnapshotSource::Publish(std::shared_ptr<const PolicySnapshot> snapshot) {
  std::lock_guard lock(mutex_);
  current_ = std::move(snapshot);
}

std::shared_ptr<const PolicySnapshot> SnapshotSource::Get() const {
  std::lock_guard lock(mutex_);
  return current_;
}

std::uint64_t SnapshotSource::version() const {
  std::lock_guard lock(mutex_);
  return current_ ? current_->version : 0;
}

bool FrameBudget::TryReserve(int frames) {
  std::int64_t used = used_.load();
  while (true) {
    if (used + frames > total_) return false;
    if (used_.compare_exchange_weak(used, used + frames)) return true;
  }
}

void FrameBudget::Refund(int frames) { used_.fetch_sub(frames); }

void EpisodeLedger::Add(const EpisodeRecord& record) {
  std::lock_guard lock(mutex_);
  records_.push_back(record);
}

std::vector<EpisodeRecord> EpisodeLedger::Snapshot() const {
  std::lock_guard lock(mutex_);
  return records_;
}

void RunActor(const ActorOptions& options, const SnapshotSource& snapshots,
              const env::EnvConfig& env_config, FrameBudget& budget,
              BoundedQueue<replay::SegmentPtr>& sink, EpisodeLedger* episodes) {
  const auto actor_key = static_cast<std::uint64_t>(options.actor_id);
  std::mt19937_64 rng(DeriveSeed(options.seed, {actor_key, 1}));
  std::shared_ptr<const PolicySnapshot> snapshot;
  AgentNetwork actor_net;
  std::optional<AgentNetwork> critic_net;

  env::WorldState world;
  bool in_episode = false;
  std::uint64_t episode_index = 0;
  std::uint64_t episode_id = 0;
  double episode_return = 0.0;
  RecurrentState actor_state;
  RecurrentState critic_state;
  const auto length = static_cast<std::size_t>(options.segment_length);

  for (int produced = 0; options.max_segments < 0 || produced < options.max_segments;
       ++produced) {
    auto latest = snapshots.Get();
    if (!latest) throw UsageError("RunActor: no snapshot published");
    if (latest != snapshot) {
      snapshot = latest;
      actor_net = snapshot->actor;
      critic_net = snapshot->critic;
    }
    if (!in_episode) {
      const std::uint64_t seed = DeriveSeed(options.seed, {actor_key, 2, episode_index});
      world = env::Reset(seed, env_config);
      episode_id = (actor_key << 40) | episode_index;
      ++episode_index;
      in_episode = true;
      episode_return = 0.0;
      actor_state = actor_net.InitialState();
      if (critic_net) critic_state = critic_net->InitialState();
    }

    replay::TrajectorySegment segment;
    segment.actor_state = actor_state;
    segment.critic_state = critic_state;
    segment.episode_id = episode_id;
    segment.actor_id = options.actor_id;
    segment.policy_version = snapshot->version;
    segment.steps.reserve(length);
    bool out_of_budget = false;
    while (segment.steps.size() < length) {
      replay::SegmentStep step;
      step.observation = env::Observe(world);
      const agent::FeatureBatch features = agent::Featurize(step.observation);
      agent::StepResult act = actor_net.Step(features, actor_state);
      if (critic_net) {
        agent::StepResult value = critic_net->Step(features, critic_state);
        step.behavior_value = value.values[0];
        critic_state = std::move(value.state);
      } else {
        step.behavior_value = act.values[0];
      }
      actor_state = std::move(act.state);
      const agent::ComposedDistribution& dist = act.distributions[0];
      step.action = dist.Sample(rng);
      const int multiplier = step.action.multiplier();
      if (!budget.TryReserve(multiplier)) {
        out_of_budget = true;
        break;
      }
      const env::StepOutcome outcome = env::Step(world, step.action);
      if (outcome.frames < multiplier) budget.Refund(multiplier - outcome.frames);
      step.reward = outcome.reward;
      step.done = outcome.done;
      step.frames = outcome.frames;
      step.behavior_log_probs = dist.Flat();
      episode_return += outcome.reward;
      segment.steps.push_back(std::move(step));
      if (outcome.done) {
        in_episode = false;
        if (episodes) episodes->Add({budget.used(), episode_return, world.milestones});
        break;
      }
    }
    if (segment.steps.empty()) return;
    segment.bootstrap_observation = env::Observe(world);
    replay::PadSegment(segment, length);
    if (!sink.Push(std::make_shared<const replay::TrajectorySegment>(std::move(segment)))) return;
    if (out_of_budget) return;
  }
}

Learner::Learner(const TrainerConfig& config, const agent::NetworkConfig& network,
                 const nn::ParameterSet* initial_policy)
    : config_(config) {
  config_.Normalize();
  const std::uint64_t base = DeriveSeed(config_.seed, {0x1EA7});
  if (config_.flags.sac) {
    actor_ = AgentNetwork(network, NetworkRole::kActor, "actor/", DeriveSeed(base, {1}));
    critic_.emplace(network, NetworkRole::kCritic, "critic/", DeriveSeed(base, {2}));
  } else {
    actor_ = AgentNetwork(network, NetworkRole::kShared, "actor/", DeriveSeed(base, {1}));
  }
  if (initial_policy != nullptr) {
    std::size_t policy_params = 0;
    for (const auto& [name, p] : actor_.params()) {
      if (!StartsWith(name, "actor/value")) ++policy_params;
    }
    nn::ParameterSet policy_only;
    for (const auto& [name, p] : *initial_policy) {
      if (StartsWith(name, "actor/") && !StartsWith(name, "actor/value")) {
        policy_only.Add(name, p.value);
      }
    }
    const std::size_t copied = actor_.LoadMatching(policy_only);
    if (copied != policy_params) {
      throw ConfigurationError("initial checkpoint provides " + std::to_string(copied) + " of " +
                               std::to_string(policy_params) + " policy parameters");
    }
  }
  nn::OptimizerOptions options;
  options.learning_rate = config_.learning_rate;
  actor_optimizer_ = nn::MakeOptimizer(options);
  if (critic_) critic_optimizer_ = nn::MakeOptimizer(options);
}

std::shared_ptr<const PolicySnapshot> Learner::MakeSnapshot() const {
  auto snapshot = std::make_shared<PolicySnapshot>();
  snapshot->actor = actor_;
  snapshot->critic = critic_;
  snapshot->version = version_;
  return snapshot;
}

nn::ParameterSet Learner::AllParameters() const {
  nn::ParameterSet all;
  for (const auto& [name, p] : actor_.params()) all.Add(name, p.value);
  if (critic_) {
    for (const auto& [name, p] : critic_->params()) all.Add(name, p.value);
  }
  return all;
}

UpdateMetrics Learner::Update(const replay::MixedBatch& batch, bool warmup) {
  if (batch.size() == 0) throw UsageError("Learner::Update: empty batch");
  const bool sac = config_.flags.sac;
  warmup = warmup && sac;
  const std::size_t b_count = batch.size();
  const auto length = static_cast<std::size_t>(config_.segment_length);
  const std::size_t rows = length * b_count;

  std::vector<const env::Observation*> observations((length + 1) * b_count);
  std::vector<RecurrentState> actor_states;
  std::vector<RecurrentState> critic_states;
  for (std::size_t b = 0; b < b_count; ++b) {
    const auto& seg = *batch.segments[b];
    replay::ValidateSegment(seg, length);
    for (std::size_t t = 0; t <= length; ++t) observations[t * b_count + b] = &seg.ObservationAt(t);
    actor_states.push_back(seg.actor_state);
    if (sac) critic_states.push_back(seg.critic_state);
  }
  const agent::FeatureBatch features = agent::Featurize(observations);

  nn::Tape tape;
  nn::Tape frozen(false);
  nn::Tape& actor_tape = warmup ? frozen : tape;
  actor_.params().ZeroGrad();
  if (critic_) critic_->params().ZeroGrad();

  agent::NetworkOutput actor_out =
      actor_.Forward(actor_tape, features, length + 1, RecurrentState::Stack(actor_states));
  Var all_values =
      sac ? critic_->Forward(tape, features, length + 1, RecurrentState::Stack(critic_states))
                .values
          : actor_out.values;
  rl::HeadLogProbs head_lps;
  for (int h = 0; h < env::kHeadCount; ++h) {
    head_lps[h] = nn::SliceRows(actor_out.head_log_probs[h], 0, rows);
  }
  Var values = nn::SliceRows(all_values, 0, rows);

  std::vector<env::ComposedAction> actions(rows);
  std::vector<double> mask(rows, 0.0);
  std::vector<double> replay_mask(rows, 0.0);
  std::vector<rl::SampleSource> sources(rows);
  std::vector<double> behavior_values(rows, 0.0);
  std::vector<double> behavior_lp(rows, 0.0);
  RealArray replay_log_probs({rows, std::size_t{env::kActionLogits}});
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t b = 0; b < b_count; ++b) {
      const auto& seg = *batch.segments[b];
      const auto& step = seg.steps[t];
      const std::size_t row = t * b_count + b;
      actions[row] = step.action;
      sources[row] = batch.sources[b];
      behavior_values[row] = step.behavior_value;
      std::copy(step.behavior_log_probs.begin(), step.behavior_log_probs.end(),
                replay_log_probs.data().begin() + row * env::kActionLogits);
      std::size_t offset = 0;
      double lp = 0.0;
      for (int h = 0; h < env::kHeadCount; ++h) {
        lp += step.behavior_log_probs[offset + static_cast<std::size_t>(step.action[h])];
        offset += static_cast<std::size_t>(env::kHeadSizes[h]);
      }
      behavior_lp[row] = lp;
      if (t < seg.valid_length) {
        mask[row] = 1.0;
        if (batch.sources[b] == rl::SampleSource::kReplay) replay_mask[row] = 1.0;
      }
    }
  }
  Var joint = rl::JointLogProb(head_lps, actions);
  const auto target_lp = joint.value().data();
  const auto value_data = all_values.value().data();

  UpdateMetrics metrics;
  metrics.warmup = warmup;
  metrics.online = batch.CountOf(rl::SampleSource::kOnline);
  metrics.replayed = batch.CountOf(rl::SampleSource::kReplay);
  std::vector<double> targets(rows, 0.0), advantages(rows, 0.0), rhos(rows, 0.0);
  double rho_sum = 0.0;
  std::size_t valid_rows = 0;
  for (std::size_t b = 0; b < b_count; ++b) {
    const auto& seg = *batch.segments[b];
    const std::size_t n = seg.valid_length;
    rl::VTraceInput in;
    in.rho_bar = config_.rho_bar;
    in.c_bar = config_.c_bar;
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t row = t * b_count + b;
      in.rewards.push_back(seg.steps[t].reward * config_.reward_scale);
      in.discounts.push_back(seg.steps[t].done ? 0.0 : config_.discount);
      in.behavior_log_probs.push_back(behavior_lp[row]);
      in.target_log_probs.push_back(target_lp[row]);
      in.values.push_back(value_data[row]);
      if (batch.sources[b] == rl::SampleSource::kOnline && seg.policy_version == version_) {
        ++metrics.on_policy_rows;
        metrics.on_policy_max_error =
            std::max(metrics.on_policy_max_error, std::abs(target_lp[row] - behavior_lp[row]));
      }
    }
    in.bootstrap_value = value_data[n * b_count + b];
    const rl::VTraceResult result = rl::VTrace(in);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t row = t * b_count + b;
      targets[row] = result.targets[t];
      advantages[row] = result.advantages[t];
      rhos[row] = result.rhos[t];
      rho_sum += result.rhos[t];
      ++valid_rows;
    }
  }
  metrics.mean_rho = valid_rows > 0 ? rho_sum / static_cast<double>(valid_rows) : 0.0;

  rl::LossComponents components;
  if (!warmup) {
    components.policy_gradient =
        rl::PolicyGradientLoss(joint, rhos, advantages, mask, config_.flags.ac);
    components.negative_entropy = rl::NegativeEntropy(head_lps, mask);
  }
  components.value = rl::ValueLoss(values, targets, mask);
  const bool clear = config_.flags.cl && config_.flags.er &&
                     std::any_of(replay_mask.begin(), replay_mask.end(),
                                 [](double m) { return m != 0.0; });
  if (clear) {
    rl::ClearTerms terms = rl::ClearLosses(head_lps, replay_log_probs, values, behavior_values,
                                           sources, replay_mask, config_.kl_direction);
    metrics.policy_cloning = terms.policy_cloning.value().data()[0];
    metrics.value_cloning = terms.value_cloning.value().data()[0];
    if (!warmup) components.policy_cloning = terms.policy_cloning;
    components.value_cloning = terms.value_cloning;
  }
  Var total = rl::TotalLoss(tape, components, config_.loss_weights);
  if (components.policy_gradient.valid()) {
    metrics.policy_gradient = components.policy_gradient.value().data()[0];
    metrics.entropy = -components.negative_entropy.value().data()[0];
  }
  metrics.value = components.value.value().data()[0];
  metrics.total = total.value().data()[0];
  if (!std::isfinite(metrics.total)) throw NumericError("learner loss is not finite");

  tape.Backward(total);
  if (!warmup) {
    metrics.actor_grad_norm = config_.max_grad_norm > 0.0
                                  ? actor_.params().ClipGradNorm(config_.max_grad_norm)
                                  : actor_.params().GradNorm();
    actor_optimizer_->Step(actor_.params());
  }
  if (critic_) {
    metrics.critic_grad_norm = config_.max_grad_norm > 0.0
                                   ? critic_->params().ClipGradNorm(config_.max_grad_norm)
                                   : critic_->params().GradNorm();
    critic_optimizer_->Step(critic_->params());
  }
  ++version_;
  metrics.update = ++updates_;
  return metrics;
}

std::vector<std::pair<std::int64_t, double>> LearningCurve(
    const std::vector<EpisodeRecord>& episodes, std::int64_t budget, int points) {
  if (points < 1 || budget < 1) throw UsageError("LearningCurve: invalid bins");
  std::vector<double> sum(static_cast<std::size_t>(points), 0.0);
  std::vector<int> count(static_cast<std::size_t>(points), 0);
  for (const auto& e : episodes) {
    auto bin = static_cast<std::size_t>(
        std::min<std::int64_t>(points - 1, std::max<std::int64_t>(0, (e.end_frame - 1) * points / budget)));
    sum[bin] += e.episode_return;
    ++count[bin];
  }
  std::vector<std::pair<std::int64_t, double>> curve;
  for (int i = 0; i < points; ++i) {
    const std::int64_t end = budget * (i + 1) / points;
    const auto k = static_cast<std::size_t>(i);
    curve.emplace_back(end, count[k] > 0 ? sum[k] / count[k]
                                         : std::numeric_limits<double>::quiet_NaN());
  }
  return curve;
}

TrainResult Train(const TrainerConfig& raw_config, const agent::NetworkConfig& network,
                  const env::EnvConfig& env_config, const nn::ParameterSet* initial_policy,
                  const TrainOutputs& outputs) {
  TrainerConfig config = raw_config;
  config.Normalize();
  env_config.Validate();
  Learner learner(config, network, initial_policy);
  SnapshotSource snapshots;
  snapshots.Publish(learner.MakeSnapshot());
  FrameBudget budget(config.frame_budget);
  BoundedQueue<replay::SegmentPtr> queue(static_cast<std::size_t>(config.queue_capacity));
  EpisodeLedger ledger;
  std::optional<replay::ReplayBuffer> buffer;
  if (config.flags.er) {
    buffer.emplace(static_cast<std::size_t>(config.replay_capacity),
                   static_cast<std::size_t>(config.segment_length));
  }

  std::ofstream csv;
  if (!outputs.directory.empty()) {
    std::filesystem::create_directories(outputs.directory);
    csv.open(outputs.directory / "metrics.csv");
    csv << kMetricsHeader << '\n';
  }

  std::atomic<int> running{config.actors};
  std::mutex error_mutex;
  std::exception_ptr actor_error;
  std::vector<std::thread> threads;
  for (int i = 0; i < config.actors; ++i) {
    threads.emplace_back([&, i] {
      try {
        ActorOptions options;
        options.actor_id = i;
        options.seed = config.seed;
        options.segment_length = config.segment_length;
        RunActor(options, snapshots, env_config, budget, queue, &ledger);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!actor_error) actor_error = std::current_exception();
        queue.Close();
      }
      if (--running == 0) queue.Close();
    });
  }

  TrainResult result;
  std::mt19937_64 rng(DeriveSeed(config.seed, {0x5A3D}));
  const std::int64_t warmup_frames = config.WarmupFrames();
  std::int64_t consumed = 0;
  double return_ema = 0.0;
  std::size_t episodes_seen = 0;
  bool warmup_closed = false;
  result.warmup_actor_hash_before = learner.actor().params().ValueHash();
  try {
    while (true) {
      std::vector<replay::SegmentPtr> online =
          queue.PopUpTo(static_cast<std::size_t>(config.OnlinePerBatch()));
      if (online.empty()) break;
      const bool warmup = consumed < warmup_frames;
      if (!warmup && !warmup_closed) {
        result.warmup_actor_hash_after = learner.actor().params().ValueHash();
        warmup_closed = true;
      }
      for (const auto& seg : online) consumed += seg->Frames();
      replay::MixedBatch batch;
      if (buffer) {
        batch = replay::ComposeBatch(online, config.replay_ratio, &*buffer, rng);
      } else {
        batch.segments = online;
        batch.sources.assign(online.size(), rl::SampleSource::kOnline);
      }
      UpdateMetrics m = learner.Update(batch, warmup);
      if (m.warmup) ++result.warmup_updates;
      if (m.on_policy_rows > 0) {
        ++result.on_policy_segments;
        result.on_policy_max_rho_error =
            std::max(result.on_policy_max_rho_error, m.on_policy_max_error);
      }
      if (buffer) {
        for (auto& seg : online) buffer->Push(seg);
        m.buffer_size = buffer->size();
        m.buffer_written = buffer->total_written();
      }
      snapshots.Publish(learner.MakeSnapshot());
      const auto finished = ledger.Snapshot();
      for (; episodes_seen < finished.size(); ++episodes_seen) {
        const double r = finished[episodes_seen].episode_return;
        return_ema = episodes_seen == 0 ? r : 0.95 * return_ema + 0.05 * r;
      }
      m.frames = consumed;
      m.return_ema = return_ema;
      if (csv.is_open()) WriteMetricsRow(csv, m);
      if (outputs.on_update) outputs.on_update(m);
      result.metrics.push_back(m);
    }
  } catch (...) {
    queue.Close();
    for (auto& t : threads) t.join();
    throw;
  }
  for (auto& t : threads) t.join();
  if (actor_error) std::rethrow_exception(actor_error);
  if (!warmup_closed) result.warmup_actor_hash_after = learner.actor().params().ValueHash();

  result.params = learner.AllParameters();
  result.episodes = ledger.Snapshot();
  result.frames_used = budget.used();
  if (!outputs.directory.empty()) {
    nn::SaveCheckpoint(outputs.directory / "final.ckpt", result.params);
    std::ofstream curve(outputs.directory / "curve.csv");
    curve << "frame,mean_return\n";
    for (const auto& [frame, value] :
         LearningCurve(result.episodes, config.frame_budget, config.curve_points)) {
      curve << frame << ',';
      if (std::isfinite(value)) curve << value;
      curve << '\n';
    }
  }
  return result;
}

}  // namespace chaincraft::trainer

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

#include "chaincraft/rl/losses.hpp"

#include <algorithm>
#include <cmath>

#include "chaincraft/errors.hpp"

namespace chaincraft::rl {
namespace {

using nn::RealArray;
using nn::Var;

// 1/count on rows with a nonzero mask, 0 elsewhere.
std::vector<double> MeanWeights(std::span<const double> mask) {
  std::size_t count = 0;
  for (double m : mask) count += m != 0.0;
  std::vector<double> w(mask.size(), 0.0);
  if (count == 0) return w;
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < mask.size(); ++i) w[i] = mask[i] != 0.0 ? inv : 0.0;
  return w;
}

void RequireRows(Var x, std::size_t rows, const char* what) {
  if (x.value().rows() != rows || x.value().cols() != 1) {
    throw UsageError(std::string(what) + ": expected a [" + std::to_string(rows) + " x 1] input");
  }
}

}  // namespace

std::vector<double> VTraceResult::ClippedAdvantages() const {
  std::vector<double> out(advantages.size());
  std::transform(advantages.begin(), advantages.end(), out.begin(),
                 [](double a) { return std::max(a, 0.0); });
  return out;
}

VTraceResult VTrace(const VTraceInput& in) {
  const std::size_t t_len = in.rewards.size();
  if (t_len == 0) throw UsageError("VTrace: empty sequence");
  if (in.discounts.size() != t_len || in.behavior_log_probs.size() != t_len ||
      in.target_log_probs.size() != t_len || in.values.size() != t_len) {
    throw UsageError("VTrace: sequence length mismatch");
  }
  if (!(in.c_bar > 0.0) || !(in.rho_bar >= in.c_bar)) {
    throw UsageError("VTrace: truncation levels must satisfy rho_bar >= c_bar > 0");
  }
  VTraceResult out;
  out.targets.resize(t_len);
  out.advantages.resize(t_len);
  out.rhos.resize(t_len);
  std::vector<double> cs(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    const double ratio = std::exp(in.target_log_probs[t] - in.behavior_log_probs[t]);
    out.rhos[t] = std::min(in.rho_bar, ratio);
    cs[t] = std::min(in.c_bar, ratio);
  }
  // v_t - V(s_t) accumulated backwards.
  double next_correction = 0.0;
  for (std::size_t i = t_len; i-- > 0;) {
    const double next_value = i + 1 < t_len ? in.values[i + 1] : in.bootstrap_value;
    const double delta =
        out.rhos[i] * (in.rewards[i] + in.discounts[i] * next_value - in.values[i]);
    const double correction = delta + in.discounts[i] * cs[i] * next_correction;
    out.targets[i] = in.values[i] + correction;
    next_correction = correction;
  }
  for (std::size_t t = 0; t < t_len; ++t) {
    const double next_target = t + 1 < t_len ? out.targets[t + 1] : in.bootstrap_value;
    out.advantages[t] = in.rewards[t] + in.discounts[t] * next_target - in.values[t];
  }
  return out;
}

Var JointLogProb(const HeadLogProbs& head_log_probs, std::span<const env::ComposedAction> actions) {
  Var total;
  std::vector<int> index(actions.size());
  for (int h = 0; h < env::kHeadCount; ++h) {
    for (std::size_t i = 0; i < actions.size(); ++i) index[i] = actions[i][h];
    Var lp = nn::GatherCols(head_log_probs[h], index);
    total = total.valid() ? nn::Add(total, lp) : lp;
  }
  return total;
}

Var PolicyGradientLoss(Var action_log_probs, std::span<const double> rhos,
                       std::span<const double> advantages, std::span<const double> mask,
                       bool clip_advantage) {
  const std::size_t n = mask.size();
  if (rhos.size() != n || advantages.size() != n) {
    throw UsageError("PolicyGradientLoss: length mismatch");
  }
  RequireRows(action_log_probs, n, "PolicyGradientLoss");
  const std::vector<double> mean = MeanWeights(mask);
  RealArray coeff({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    const double a = clip_advantage ? std::max(advantages[i], 0.0) : advantages[i];
    coeff.data()[i] = -rhos[i] * a * mean[i];
  }
  return nn::Dot(action_log_probs, coeff);
}

Var ValueLoss(Var values, std::span<const double> targets, std::span<const double> mask) {
  const std::size_t n = mask.size();
  if (targets.size() != n) throw UsageError("ValueLoss: length mismatch");
  RequireRows(values, n, "ValueLoss");
  const std::vector<double> mean = MeanWeights(mask);
  RealArray target({n, 1}, std::vector<double>(targets.begin(), targets.end()));
  RealArray coeff({n, 1});
  for (std::size_t i = 0; i < n; ++i) coeff.data()[i] = 0.5 * mean[i];
  Var diff = nn::Sub(values, values.tape()->Constant(std::move(target)));
  return nn::Dot(nn::Square(diff), coeff);
}

Var NegativeEntropy(const HeadLogProbs& head_log_probs, std::span<const double> mask) {
  const std::vector<double> mean = MeanWeights(mask);
  Var total;
  for (int h = 0; h < env::kHeadCount; ++h) {
    Var lp = head_log_probs[h];
    const std::size_t k = lp.value().cols();
    if (lp.value().rows() != mask.size()) throw UsageError("NegativeEntropy: row mismatch");
    RealArray coeff({mask.size(), k});
    for (std::size_t i = 0; i < mask.size(); ++i) {
      std::fill_n(coeff.data().begin() + i * k, k, mean[i]);
    }
    Var term = nn::Dot(nn::Mul(nn::Exp(lp), lp), coeff);
    total = total.valid() ? nn::Add(total, term) : term;
  }
  return total;
}

ClearTerms ClearLosses(const HeadLogProbs& current_log_probs, const RealArray& replay_log_probs,
                       Var current_values, std::span<const double> replay_values,
                       std::span<const SampleSource> sources, std::span<const double> mask,
                       agent::KlDirection direction) {
  const std::size_t n = mask.size();
  if (sources.size() != n || replay_values.size() != n) {
    throw UsageError("ClearLosses: length mismatch");
  }
  if (replay_log_probs.shape() != nn::Shape{n, std::size_t{env::kActionLogits}}) {
    throw UsageError("ClearLosses: replay log-probabilities must be [N x 44]");
  }
  RequireRows(current_values, n, "ClearLosses");
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] == 0.0) continue;
    if (sources[i] != SampleSource::kReplay) {
      throw UsageError("ClearLosses: cloning terms apply to replay samples only");
    }
    any = true;
  }
  if (!any) throw UsageError("ClearLosses: no replay samples selected");
  const std::vector<double> mean = MeanWeights(mask);
  nn::Tape& tape = *current_values.tape();

  Var kl;
  std::size_t offset = 0;
  for (int h = 0; h < env::kHeadCount; ++h) {
    Var lq = current_log_probs[h];
    const std::size_t k = static_cast<std::size_t>(env::kHeadSizes[h]);
    if (lq.value().rows() != n || lq.value().cols() != k) {
      throw UsageError("ClearLosses: head structure mismatch");
    }
    RealArray lp({n, k});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        lp.data()[i * k + j] = replay_log_probs.data()[i * env::kActionLogits + offset + j];
      }
    }
    offset += k;
    Var term;
    if (direction == agent::KlDirection::kReplayToCurrent) {
      // sum p (log p - log q): the entropy part is a constant shift.
      RealArray coeff({n, k});
      double constant = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          const double lpij = lp.data()[i * k + j];
          const double p = std::exp(lpij);
          coeff.data()[i * k + j] = -p * mean[i];
          if (p > 0.0) constant += mean[i] * p * lpij;
        }
      }
      term = nn::AddConstant(nn::Dot(lq, coeff), constant);
    } else {
      RealArray coeff({n, k});
      for (std::size_t i = 0; i < n; ++i) {
        std::fill_n(coeff.data().begin() + i * k, k, mean[i]);
      }
      Var diff = nn::Sub(lq, tape.Constant(std::move(lp)));
      term = nn::Dot(nn::Mul(nn::Exp(lq), diff), coeff);
    }
    kl = kl.valid() ? nn::Add(kl, term) : term;
  }

  RealArray stored({n, 1}, std::vector<double>(replay_values.begin(), replay_values.end()));
  RealArray coeff({n, 1}, mean);
  Var diff = nn::Sub(current_values, tape.Constant(std::move(stored)));
  return {kl, nn::Dot(nn::Square(diff), coeff)};
}

Var TotalLoss(nn::Tape& tape, const LossComponents& c, const LossWeights& w) {
  Var total;
  auto add = [&](Var term, double weight) {
    if (!term.valid() || weight == 0.0) return;
    Var scaled = weight == 1.0 ? term : nn::Scale(term, weight);
    total = total.valid() ? nn::Add(total, scaled) : scaled;
  };
  add(c.policy_gradient, w.policy_gradient);
  add(c.value, w.value);
  add(c.negative_entropy, w.entropy);
  add(c.policy_cloning, w.policy_cloning);
  add(c.value_cloning, w.value_cloning);
  return total.valid() ? total : tape.Constant(RealArray({1}, 0.0));
}

}  // namespace chaincraft::rl

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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "chaincraft/demo/demos.hpp"
#include "chaincraft/env/expert.hpp"
#include "chaincraft/errors.hpp"

namespace chaincraft::demo {
namespace {

using env::ComposedAction;
using env::MakeAction;

DemoEpisode FromActions(const std::vector<ComposedAction>& actions, int granularity = 30) {
  DemoEpisode e;
  e.turn_granularity_deg = granularity;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    DemoFrame f;
    f.observation.frame = static_cast<std::int32_t>(i);
    f.action = actions[i];
    e.frames.push_back(f);
  }
  return e;
}

std::vector<int> Multipliers(const SubsampledEpisode& s) {
  std::vector<int> out;
  for (const auto& r : s.records) out.push_back(r.action.multiplier());
  return out;
}

// Random episode biased towards runs, turns and no-ops.
DemoEpisode RandomEpisode(std::mt19937_64& rng, std::size_t length, int granularity) {
  std::vector<ComposedAction> actions;
  std::uniform_int_distribution<int> kind(0, 5);
  std::uniform_int_distribution<int> run(1, 20);
  while (actions.size() < length) {
    ComposedAction a;
    switch (kind(rng)) {
      case 0: a = env::NoOp(); break;
      case 1: a = MakeAction(env::kTurn, 1 + static_cast<int>(rng() % 2)); break;
      default: a = env::RandomAction(rng); a[env::kStep] = 0; break;
    }
    const int n = run(rng);
    for (int i = 0; i < n && actions.size() < length; ++i) actions.push_back(a);
  }
  return FromActions(actions, granularity);
}

TEST(GenerateDemos, NoiseFreeEpisodesScoreMaximum) {
  const auto demos = GenerateDemos(10, 3, env::EnvConfig{}, DemoOptions{});
  ASSERT_EQ(demos.size(), 10u);
  for (const auto& d : demos) {
    EXPECT_EQ(d.episode_return, 259.0);
    EXPECT_TRUE(ReplayMatches(d, env::EnvConfig{}));
  }
}

TEST(GenerateDemos, ZeroCountRejected) {
  EXPECT_THROW(GenerateDemos(0, 1, env::EnvConfig{}, DemoOptions{}), ConfigurationError);
}

TEST(GenerateDemos, Deterministic) {
  DemoOptions o;
  o.noise_level = 0.3;
  const auto a = GenerateDemos(3, 11, env::EnvConfig{}, o);
  const auto b = GenerateDemos(3, 11, env::EnvConfig{}, o);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(Subsample(a[i], {}), Subsample(b[i], {}));
    EXPECT_EQ(a[i].episode_return, b[i].episode_return);
  }
}

TEST(Subsample, IdenticalRunQuantisedDown) {
  const auto s = Subsample(FromActions(std::vector<ComposedAction>(5, MakeAction(env::kMine, 1))), {});
  EXPECT_EQ(Multipliers(s), (std::vector<int>{4, 1}));
  const auto s11 = Subsample(FromActions(std::vector<ComposedAction>(11, MakeAction(env::kMine, 1))), {});
  EXPECT_EQ(Multipliers(s11), (std::vector<int>{8, 2, 1}));
}

TEST(Subsample, NoOpsOnlyGivesEmpty) {
  EXPECT_TRUE(Subsample(FromActions(std::vector<ComposedAction>(7, env::NoOp())), {}).records.empty());
}

TEST(Subsample, FineTurnsAccumulate) {
  const auto s = Subsample(
      FromActions(std::vector<ComposedAction>(3, MakeAction(env::kTurn, env::kTurnRight)), 10), {});
  ASSERT_EQ(s.records.size(), 1u);
  EXPECT_EQ(s.records[0].action, MakeAction(env::kTurn, env::kTurnRight));
}

TEST(Subsample, ExcludedHeadStripped) {
  SubsampleConfig c;
  c.excluded_heads = {env::kEquip};
  ComposedAction both = MakeAction(env::kMine, 1);
  both[env::kEquip] = 3;
  const auto s = Subsample(FromActions({MakeAction(env::kEquip, 2), both}), c);
  ASSERT_EQ(s.records.size(), 1u);
  EXPECT_EQ(s.records[0].action, MakeAction(env::kMine, 1));
}

TEST(Subsample, TruncationKeepsPrefix) {
  SubsampleConfig c;
  c.truncation = 3;
  std::vector<ComposedAction> actions;
  for (int i = 0; i < 6; ++i) actions.push_back(MakeAction(env::kCraft, 1 + i));
  SubsampleStats stats;
  const auto s = Subsample(FromActions(actions), c, &stats);
  ASSERT_EQ(s.records.size(), 3u);
  EXPECT_EQ(s.records[2].action[env::kCraft], 3);
  EXPECT_EQ(stats.dropped_truncation, 3u);
}

TEST(Subsample, ConservationAndBoundsOnRandomEpisodes) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    const int granularity = (i % 2 == 0) ? 30 : 10;
    const DemoEpisode e = RandomEpisode(rng, 50 + rng() % 3000, granularity);
    SubsampleStats stats;
    const auto s = Subsample(e, {}, &stats);
    std::size_t multipliers = 0;
    for (const auto& r : s.records) {
      multipliers += static_cast<std::size_t>(r.action.multiplier());
      EXPECT_FALSE(r.action.IsNoOp());
    }
    EXPECT_EQ(multipliers, stats.emitted_frames);
    EXPECT_EQ(multipliers + stats.dropped_noop + stats.dropped_excluded + stats.dropped_turn +
                  stats.dropped_truncation,
              e.frames.size());
    EXPECT_LE(s.records.size(), std::min<std::size_t>(e.frames.size(), 2000));
  }
}

TEST(Subsample, Idempotent) {
  std::mt19937_64 rng(18);
  for (int i = 0; i < 30; ++i) {
    const auto once = Subsample(RandomEpisode(rng, 400, 30), {});
    EXPECT_EQ(Subsample(once, {}), once);
  }
}

TEST(Dataset, RoundTrip) {
  DemoOptions o;
  o.noise_level = 0.2;
  Dataset data;
  for (const auto& e : GenerateDemos(4, 5, env::EnvConfig{}, o)) data.push_back(Subsample(e, {}));
  std::stringstream buffer;
  WriteDataset(buffer, data);
  EXPECT_EQ(ReadDataset(buffer), data);
}

TEST(Dataset, EmptyAndCorrupt) {
  std::stringstream empty;
  WriteDataset(empty, {});
  EXPECT_TRUE(ReadDataset(empty).empty());
  std::stringstream buffer;
  WriteDataset(buffer, {});
  std::string bytes = buffer.str();
  bytes[0] = 'X';
  std::stringstream corrupt(bytes);
  EXPECT_THROW(ReadDataset(corrupt), FormatError);
}

}  // namespace
}  // namespace chaincraft::demo

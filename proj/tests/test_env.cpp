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
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "chaincraft/env/chaincraft.hpp"
#include "chaincraft/env/expert.hpp"
#include "chaincraft/errors.hpp"

namespace chaincraft::env {
namespace {

// Places a tile directly in front of the agent.
void PutAhead(WorldState& s, Tile tile) {
  auto [dr, dc] = FacingDelta(s.facing);
  s.MutableAt(s.row + dr, s.col + dc) = tile;
}

Tile Ahead(const WorldState& s) {
  auto [dr, dc] = FacingDelta(s.facing);
  return s.At(s.row + dr, s.col + dc);
}

WorldState OpenWorld(std::uint64_t seed = 1) {
  WorldState s = Reset(seed, EnvConfig{});
  s.row = s.rows / 2;
  s.col = s.cols / 2;
  s.facing = Facing::kNorth;
  return s;
}

void SetMilestones(WorldState& s, int upto) {
  for (int k = 0; k <= upto; ++k) s.milestones |= 1U << k;
}

double RunExpert(std::uint64_t seed, const EnvConfig& config, std::vector<MilestoneEvent>* events) {
  WorldState s = Reset(seed, config);
  double total = 0.0;
  while (!s.done) {
    const StepOutcome o = Step(s, PlannerAction(s));
    total += o.reward;
    if (events) events->insert(events->end(), o.events.begin(), o.events.end());
  }
  return total;
}

TEST(Milestones, TableMatchesRewardIndices) {
  const double expected[] = {1, 2, 4, 4, 8, 16, 32, 64, 128};
  for (int k = 0; k < kMilestoneCount; ++k) {
    EXPECT_EQ(MilestoneTable()[static_cast<std::size_t>(k)].reward, expected[k]);
    for (int p : MilestoneTable()[static_cast<std::size_t>(k)].prerequisites) EXPECT_LT(p, k);
  }
  EXPECT_EQ(MaxEpisodeReturn(), 259.0);
}

TEST(Reset, SameSeedIsBitIdentical) {
  EXPECT_EQ(Reset(42, EnvConfig{}), Reset(42, EnvConfig{}));
  EXPECT_NE(Reset(42, EnvConfig{}).grid, Reset(43, EnvConfig{}).grid);
}

TEST(Reset, DiamondRarerThanIron) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const WorldState s = Reset(seed, EnvConfig{});
    if (s.Count(Tile::kDiamondOre) < s.Count(Tile::kIronOre)) ++ok;
  }
  EXPECT_GE(ok, 990);
}

TEST(Reset, ZeroTreeDensityRejected) {
  EnvConfig c;
  c.tree_density = 0.0;
  EXPECT_THROW(Reset(1, c), ConfigurationError);
}

TEST(Reset, AgentStartsOnEmptyInteriorTile) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const WorldState s = Reset(seed, EnvConfig{});
    EXPECT_EQ(s.At(s.row, s.col), Tile::kEmpty);
    EXPECT_EQ(s.previous_action, NoOp());
  }
}

TEST(Step, MiningTreeGivesFirstMilestone) {
  WorldState s = OpenWorld();
  PutAhead(s, Tile::kTree);
  for (int i = 1; i < kMineTicks[0]; ++i) EXPECT_EQ(Step(s, MakeAction(kMine, 1)).reward, 0.0);
  const StepOutcome o = Step(s, MakeAction(kMine, 1));
  EXPECT_EQ(o.reward, 1.0);
  ASSERT_EQ(o.events.size(), 1u);
  EXPECT_EQ(o.events[0].milestone, 0);
  EXPECT_EQ(s.inventory[static_cast<std::size_t>(Item::kLog)], 1);
}

TEST(Step, MiningDiamondEndsEpisodeWith128) {
  WorldState s = OpenWorld();
  SetMilestones(s, 7);
  s.inventory[static_cast<std::size_t>(Item::kIronPickaxe)] = 1;
  s.equipped = Item::kIronPickaxe;
  PutAhead(s, Tile::kDiamondOre);
  ComposedAction mine = MakeAction(kMine, 1);
  mine[kStep] = 3;  // multiplier 8
  const StepOutcome o = Step(s, mine);
  EXPECT_EQ(o.reward, 128.0);
  EXPECT_TRUE(o.done);
}

TEST(Step, InterruptedMiningStartsOver) {
  WorldState s = OpenWorld();
  PutAhead(s, Tile::kTree);
  for (int i = 1; i < kMineTicks[0]; ++i) Step(s, MakeAction(kMine, 1));
  Step(s, NoOp());
  for (int i = 1; i < kMineTicks[0]; ++i) EXPECT_EQ(Step(s, MakeAction(kMine, 1)).reward, 0.0);
  EXPECT_EQ(Ahead(s), Tile::kTree);
  EXPECT_EQ(Step(s, MakeAction(kMine, 1)).reward, 1.0);
}

TEST(Step, CraftWithoutInputsIsNoOp) {
  WorldState s = OpenWorld();
  const auto before = s.inventory;
  const StepOutcome o =
      Step(s, MakeAction(kCraft, ActionItemIndex(Item::kWoodenPickaxe)));
  EXPECT_EQ(o.reward, 0.0);
  EXPECT_EQ(s.inventory, before);
}

TEST(Step, StoneNeedsPickaxe) {
  WorldState s = OpenWorld();
  PutAhead(s, Tile::kStone);
  ComposedAction mine = MakeAction(kMine, 1);
  mine[kStep] = 3;
  Step(s, mine);
  EXPECT_EQ(s.inventory[static_cast<std::size_t>(Item::kCobblestone)], 0);
  EXPECT_EQ(Ahead(s), Tile::kStone);
}

TEST(Step, AfterDoneIsUsageError) {
  EnvConfig c;
  c.max_frames = 1;
  WorldState s = Reset(3, c);
  Step(s, NoOp());
  EXPECT_TRUE(s.done);
  EXPECT_THROW(Step(s, NoOp()), UsageError);
}

TEST(Step, InvalidActionIsUsageError) {
  WorldState s = OpenWorld();
  ComposedAction a;
  a[kCraft] = 10;
  EXPECT_THROW(Step(s, a), UsageError);
}

TEST(Step, MultiplierEqualsRepeatedSteps) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    WorldState a = Reset(static_cast<std::uint64_t>(trial), EnvConfig{});
    for (int warm = 0; warm < 20 && !a.done; ++warm) Step(a, ScriptedExpert(a, 0.5, rng));
    if (a.done) continue;
    WorldState b = a;
    ComposedAction action = RandomAction(rng);
    const int m = action.multiplier();
    const StepOutcome big = Step(a, action);
    ComposedAction single = action;
    single[kStep] = 0;
    double reward = 0.0;
    for (int i = 0; i < m && !b.done; ++i) reward += Step(b, single).reward;
    b.previous_action = action;
    EXPECT_EQ(a, b);
    EXPECT_EQ(big.reward, reward);
  }
}

TEST(Invariants, RandomRolloutsKeepStateValid) {
  std::mt19937_64 rng(6);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    WorldState s = Reset(seed, EnvConfig{});
    double total = 0.0;
    std::set<int> seen;
    while (!s.done) {
      const StepOutcome o = Step(s, RandomAction(rng));
      total += o.reward;
      for (const auto& e : o.events) {
        EXPECT_TRUE(seen.insert(e.milestone).second);
        for (int p : MilestoneTable()[static_cast<std::size_t>(e.milestone)].prerequisites)
          EXPECT_TRUE(seen.count(p));
      }
      EXPECT_LE(s.frame, s.config.max_frames);
      EXPECT_EQ(s.At(s.row, s.col), Tile::kEmpty);
      for (int n : s.inventory) EXPECT_GE(n, 0);
    }
    double expected = 0.0;
    for (int k : seen) expected += MilestoneTable()[static_cast<std::size_t>(k)].reward;
    EXPECT_EQ(total, expected);
  }
}

TEST(Expert, NoiseFreeRolloutsScore259) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::vector<MilestoneEvent> events;
    EXPECT_EQ(RunExpert(seed, EnvConfig{}, &events), 259.0) << "seed " << seed;
    ASSERT_FALSE(events.empty());
    EXPECT_EQ(events.back().milestone, kTerminalMilestone);
  }
}

TEST(Expert, DeterministicWithoutNoise) {
  std::mt19937_64 r1(1), r2(1);
  WorldState a = Reset(9, EnvConfig{}), b = Reset(9, EnvConfig{});
  while (!a.done) {
    const ComposedAction x = ScriptedExpert(a, 0.0, r1);
    const ComposedAction y = ScriptedExpert(b, 0.0, r2);
    ASSERT_EQ(x, y);
    Step(a, x);
    Step(b, y);
  }
}

TEST(Expert, FullNoiseIsUniformPerHead) {
  const WorldState s = OpenWorld();
  std::mt19937_64 rng(7);
  constexpr int kDraws = 100000;
  std::array<std::vector<int>, kHeadCount> counts;
  for (int h = 0; h < kHeadCount; ++h) counts[h].assign(kHeadSizes[h], 0);
  for (int i = 0; i < kDraws; ++i) {
    const ComposedAction a = ScriptedExpert(s, 1.0, rng);
    for (int h = 0; h < kHeadCount; ++h) ++counts[h][static_cast<std::size_t>(a[h])];
  }
  for (int h = 0; h < kHeadCount; ++h) {
    const double expected = double(kDraws) / kHeadSizes[h];
    double chi2 = 0.0;
    for (int c : counts[h]) chi2 += (c - expected) * (c - expected) / expected;
    boost::math::chi_squared dist(kHeadSizes[h] - 1);
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01) << kHeadNames[h];
  }
}

TEST(Observation, ViewIsEgocentric) {
  WorldState s = OpenWorld();
  PutAhead(s, Tile::kTree);
  const int r = s.config.view_radius;
  const int side = 2 * r + 1;
  Observation o = Observe(s);
  EXPECT_EQ(o.view[static_cast<std::size_t>((r - 1) * side + r)], static_cast<std::uint8_t>(Tile::kTree));
  // Turning right twice puts the tree behind.
  Step(s, MakeAction(kTurn, kTurnRight));
  Step(s, MakeAction(kTurn, kTurnRight));
  o = Observe(s);
  EXPECT_EQ(o.view[static_cast<std::size_t>((r + 1) * side + r)], static_cast<std::uint8_t>(Tile::kTree));
}

TEST(EpisodeLog, JsonLine) {
  const std::string line = EpisodeLogJson({3, 3.0, 10, {{1, 0}, {4, 1}}});
  EXPECT_EQ(line, R"({"events":[{"frame":1,"milestone":0},{"frame":4,"milestone":1}],"frames":10,"return":3.0,"seed":3})");
}

}  // namespace
}  // namespace chaincraft::env

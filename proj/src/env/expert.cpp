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

#include "chaincraft/env/expert.hpp"

#include <array>
#include <deque>
#include <optional>

#include "chaincraft/errors.hpp"

namespace chaincraft::env {
namespace {

using MaybeAction = std::optional<ComposedAction>;

int Have(const WorldState& s, Item item) { return s.inventory[static_cast<std::size_t>(item)]; }

// Turn that brings `facing` towards absolute direction `target`.
ComposedAction TurnTowards(Facing facing, Facing target) {
  const int diff = (static_cast<int>(target) - static_cast<int>(facing) + 4) % 4;
  return MakeAction(kTurn, diff == 3 ? kTurnLeft : kTurnRight);
}

// Next action towards mining the nearest tile of `kind`.
ComposedAction GoMine(const WorldState& s, Tile kind) {
  // Adjacent target: face it and mine.
  auto [fr, fc] = FacingDelta(s.facing);
  if (s.At(s.row + fr, s.col + fc) == kind) return MakeAction(kMine, 1);
  for (int d = 0; d < 4; ++d) {
    auto [dr, dc] = FacingDelta(static_cast<Facing>(d));
    if (s.At(s.row + dr, s.col + dc) == kind) {
      return TurnTowards(s.facing, static_cast<Facing>(d));
    }
  }
  // BFS over empty tiles to the nearest cell adjacent to `kind`.
  const int n = s.rows * s.cols;
  std::vector<int> first_dir(static_cast<std::size_t>(n), -1);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<std::pair<int, int>> queue{{s.row, s.col}};
  seen[static_cast<std::size_t>(s.row * s.cols + s.col)] = 1;
  while (!queue.empty()) {
    auto [r, c] = queue.front();
    queue.pop_front();
    const int here = first_dir[static_cast<std::size_t>(r * s.cols + c)];
    for (int d = 0; d < 4; ++d) {
      auto [dr, dc] = FacingDelta(static_cast<Facing>(d));
      const int nr = r + dr, nc = c + dc;
      if (s.At(nr, nc) != Tile::kEmpty) continue;
      const auto idx = static_cast<std::size_t>(nr * s.cols + nc);
      if (seen[idx]) continue;
      seen[idx] = 1;
      const int dir = here < 0 ? d : here;
      first_dir[idx] = dir;
      for (int d2 = 0; d2 < 4; ++d2) {
        auto [er, ec] = FacingDelta(static_cast<Facing>(d2));
        if (s.At(nr + er, nc + ec) == kind) {
          const auto target = static_cast<Facing>(dir);
          if (target == s.facing) return MakeAction(kMove, kMoveForward);
          return TurnTowards(s.facing, target);
        }
      }
      queue.emplace_back(nr, nc);
    }
  }
  // Nothing reachable: wander forward (or turn if blocked).
  if (s.At(s.row + fr, s.col + fc) == Tile::kEmpty) return MakeAction(kMove, kMoveForward);
  return MakeAction(kTurn, kTurnRight);
}

MaybeAction Obtain(const WorldState& s, Item item, int count);

MaybeAction EnsureTool(const WorldState& s, Item pickaxe) {
  const int needed = PickaxeTier(pickaxe);
  if (PickaxeTier(s.equipped) >= needed) return std::nullopt;
  for (Item p : {Item::kWoodenPickaxe, Item::kStonePickaxe, Item::kIronPickaxe}) {
    if (PickaxeTier(p) >= needed && Have(s, p) > 0) {
      return MakeAction(kEquip, ActionItemIndex(p));
    }
  }
  return Obtain(s, pickaxe, 1);
}

MaybeAction Obtain(const WorldState& s, Item item, int count) {
  if (Have(s, item) >= count) return std::nullopt;
  switch (item) {
    case Item::kLog:
      return GoMine(s, Tile::kTree);
    case Item::kCobblestone:
      if (auto a = EnsureTool(s, Item::kWoodenPickaxe)) return a;
      return GoMine(s, Tile::kStone);
    case Item::kIronOre:
      if (auto a = EnsureTool(s, Item::kStonePickaxe)) return a;
      return GoMine(s, Tile::kIronOre);
    case Item::kDiamond:
      if (auto a = EnsureTool(s, Item::kIronPickaxe)) return a;
      return GoMine(s, Tile::kDiamondOre);
    case Item::kIronIngot:
      if (auto a = Obtain(s, Item::kFurnace, 1)) return a;
      if (auto a = Obtain(s, Item::kIronOre, 1)) return a;
      return MakeAction(kSmelt, ActionItemIndex(Item::kIronIngot));
    default:
      break;
  }
  const Recipe* recipe = FindCraftRecipe(item);
  if (recipe == nullptr) throw UsageError("expert: no way to obtain item");
  for (auto [input, n] : recipe->inputs) {
    if (auto a = Obtain(s, input, n)) return a;
  }
  if (recipe->needs_table) {
    if (auto a = Obtain(s, Item::kCraftingTable, 1)) return a;
  }
  return MakeAction(kCraft, ActionItemIndex(item));
}

}  // namespace

ComposedAction PlannerAction(const WorldState& state) {
  if (auto a = Obtain(state, Item::kDiamond, 1)) return *a;
  return NoOp();
}

ComposedAction RandomAction(std::mt19937_64& rng) {
  ComposedAction action;
  for (int h = 0; h < kHeadCount; ++h) {
    action[h] = std::uniform_int_distribution<int>(0, kHeadSizes[h] - 1)(rng);
  }
  return action;
}

ComposedAction ScriptedExpert(const WorldState& state, double noise_level,
                              std::mt19937_64& rng) {
  if (state.done) throw UsageError("expert: episode already finished");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < noise_level) return RandomAction(rng);
  return PlannerAction(state);
}

}  // namespace chaincraft::env

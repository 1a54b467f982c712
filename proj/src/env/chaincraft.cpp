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

#include "chaincraft/env/chaincraft.hpp"

#include <algorithm>
#include <deque>
#include <nlohmann/json.hpp>
#include <random>

#include "chaincraft/errors.hpp"

namespace chaincraft::env {

const char* ItemName(Item item) {
  static constexpr std::array<const char*, kItemCount> kNames = {
      "log",         "planks",   "stick",    "crafting_table", "wooden_pickaxe",
      "cobblestone", "stone_pickaxe", "furnace", "iron_ore", "iron_ingot",
      "iron_pickaxe", "diamond"};
  return kNames[static_cast<std::size_t>(item)];
}

int ActionItemIndex(Item item) {
  for (std::size_t i = 0; i < kActionItems.size(); ++i) {
    if (kActionItems[i] == item) return static_cast<int>(i) + 1;
  }
  return 0;
}

bool ComposedAction::IsNoOp() const { return ActiveHeadCount() == 0; }

bool ComposedAction::SameAtomic(const ComposedAction& other) const {
  for (int h = 0; h < kHeadCount; ++h) {
    if (h != kStep && heads[h] != other.heads[h]) return false;
  }
  return true;
}

int ComposedAction::ActiveHeadCount() const {
  int count = 0;
  for (int h = 0; h < kHeadCount; ++h) count += (h != kStep && heads[h] != 0);
  return count;
}

bool ComposedAction::IsValid() const {
  for (int h = 0; h < kHeadCount; ++h) {
    if (heads[h] < 0 || heads[h] >= kHeadSizes[h]) return false;
  }
  return true;
}

ComposedAction NoOp() { return ComposedAction{}; }

ComposedAction MakeAction(int head, int value, int multiplier_index) {
  ComposedAction action;
  action[head] = value;
  action[kStep] = multiplier_index;
  return action;
}

int MultiplierIndex(int multiplier) {
  for (std::size_t i = 0; i < kStepMultipliers.size(); ++i) {
    if (kStepMultipliers[i] == multiplier) return static_cast<int>(i);
  }
  return -1;
}

const std::array<Milestone, kMilestoneCount>& MilestoneTable() {
  static const std::array<Milestone, kMilestoneCount> kTable = {{
      {Item::kLog, 1.0, {}},
      {Item::kPlanks, 2.0, {0}},
      {Item::kStick, 4.0, {1}},
      {Item::kCraftingTable, 4.0, {1}},
      {Item::kWoodenPickaxe, 8.0, {1, 2, 3}},
      {Item::kCobblestone, 16.0, {4}},
      {Item::kStonePickaxe, 32.0, {2, 3, 5}},
      {Item::kIronIngot, 64.0, {5, 6}},
      {Item::kDiamond, 128.0, {7}},
  }};
  return kTable;
}

int MilestoneForItem(Item item) {
  const auto& table = MilestoneTable();
  for (int i = 0; i < kMilestoneCount; ++i) {
    if (table[static_cast<std::size_t>(i)].item == item) return i;
  }
  return -1;
}

double MaxEpisodeReturn() {
  double total = 0.0;
  for (const auto& m : MilestoneTable()) total += m.reward;
  return total;
}

const std::vector<Recipe>& CraftRecipes() {
  static const std::vector<Recipe> kRecipes = {
      {Item::kPlanks, 4, {{Item::kLog, 1}}, false},
      {Item::kStick, 4, {{Item::kPlanks, 2}}, false},
      {Item::kCraftingTable, 1, {{Item::kPlanks, 4}}, false},
      {Item::kWoodenPickaxe, 1, {{Item::kPlanks, 3}, {Item::kStick, 2}}, true},
      {Item::kStonePickaxe, 1, {{Item::kCobblestone, 3}, {Item::kStick, 2}}, true},
      {Item::kFurnace, 1, {{Item::kCobblestone, 3}}, true},
      {Item::kIronPickaxe, 1, {{Item::kIronIngot, 1}, {Item::kStick, 2}}, true},
  };
  return kRecipes;
}

const Recipe* FindCraftRecipe(Item item) {
  for (const Recipe& r : CraftRecipes()) {
    if (r.output == item) return &r;
  }
  return nullptr;
}

void EnvConfig::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigurationError("env." + what); };
  if (grid_size < 7) fail("grid_size must be >= 7");
  if (view_radius < 1) fail("view_radius must be >= 1");
  if (max_frames < 1) fail("max_frames must be >= 1");
  auto density = [&](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) {
      fail(std::string(name) + " must be in (0, 1] (chain unreachable otherwise)");
    }
  };
  density(tree_density, "tree_density");
  density(stone_density, "stone_density");
  density(iron_density, "iron_density");
  density(diamond_ratio, "diamond_ratio");
  if (wall_density < 0.0 || wall_density >= 1.0) fail("wall_density must be in [0, 1)");
  if (lava && (lava_density < 0.0 || lava_density >= 1.0)) {
    fail("lava_density must be in [0, 1)");
  }
  const double total = tree_density + stone_density + iron_density * (1.0 + diamond_ratio) +
                       wall_density + (lava ? lava_density : 0.0);
  if (total >= 0.9) fail("resource densities leave no room to move");
  if (turn_granularity_deg <= 0 || turn_granularity_deg > 30 ||
      30 % turn_granularity_deg != 0) {
    fail("turn_granularity_deg must divide 30");
  }
}

Tile WorldState::At(int r, int c) const {
  if (r < 0 || c < 0 || r >= rows || c >= cols) return Tile::kWall;
  return grid[static_cast<std::size_t>(r * cols + c)];
}

int WorldState::Count(Tile tile) const {
  return static_cast<int>(std::count(grid.begin(), grid.end(), tile));
}

int Observation::view_side() const {
  int side = 0;
  while (side * side < static_cast<int>(view.size())) ++side;
  return side;
}

std::pair<int, int> FacingDelta(Facing facing) {
  switch (facing) {
    case Facing::kNorth: return {-1, 0};
    case Facing::kEast: return {0, 1};
    case Facing::kSouth: return {1, 0};
    case Facing::kWest: return {0, -1};
  }
  return {0, 0};
}

int PickaxeTier(std::optional<Item> item) {
  if (!item) return 0;
  switch (*item) {
    case Item::kWoodenPickaxe: return 1;
    case Item::kStonePickaxe: return 2;
    case Item::kIronPickaxe: return 3;
    default: return 0;
  }
}

namespace {

Facing RotateClockwise(Facing f) { return static_cast<Facing>((static_cast<int>(f) + 1) % 4); }
Facing RotateCounterClockwise(Facing f) {
  return static_cast<Facing>((static_cast<int>(f) + 3) % 4);
}

struct Minimums {
  int trees = 4;
  int stones = 6;
  int iron = 1;
  int diamonds = 1;
};

// Resource tiles that touch the empty region reachable from the start.
std::array<int, kTileKinds> AccessibleCounts(const WorldState& s) {
  std::vector<char> seen(s.grid.size(), 0);
  std::deque<std::pair<int, int>> queue{{s.row, s.col}};
  seen[static_cast<std::size_t>(s.row * s.cols + s.col)] = 1;
  std::vector<char> touched(s.grid.size(), 0);
  std::array<int, kTileKinds> counts{};
  while (!queue.empty()) {
    auto [r, c] = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      auto [dr, dc] = FacingDelta(static_cast<Facing>(d));
      const int nr = r + dr, nc = c + dc;
      if (nr < 0 || nc < 0 || nr >= s.rows || nc >= s.cols) continue;
      const auto idx = static_cast<std::size_t>(nr * s.cols + nc);
      const Tile t = s.grid[idx];
      if (t == Tile::kEmpty) {
        if (!seen[idx]) {
          seen[idx] = 1;
          queue.emplace_back(nr, nc);
        }
      } else if (!touched[idx]) {
        touched[idx] = 1;
        ++counts[static_cast<std::size_t>(t)];
      }
    }
  }
  return counts;
}

bool GenerateOnce(WorldState& s, std::mt19937_64& rng) {
  const EnvConfig& cfg = s.config;
  s.rows = s.cols = cfg.grid_size;
  s.grid.assign(static_cast<std::size_t>(s.rows * s.cols), Tile::kEmpty);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double diamond_density = cfg.iron_density * cfg.diamond_ratio;
  std::vector<std::pair<int, int>> interior;
  for (int r = 0; r < s.rows; ++r) {
    for (int c = 0; c < s.cols; ++c) {
      if (r == 0 || c == 0 || r == s.rows - 1 || c == s.cols - 1) {
        s.MutableAt(r, c) = Tile::kWall;
        continue;
      }
      interior.emplace_back(r, c);
      double u = unit(rng);
      Tile t = Tile::kEmpty;
      if ((u -= cfg.tree_density) < 0) {
        t = Tile::kTree;
      } else if ((u -= cfg.stone_density) < 0) {
        t = Tile::kStone;
      } else if ((u -= cfg.iron_density) < 0) {
        t = Tile::kIronOre;
      } else if ((u -= diamond_density) < 0) {
        t = Tile::kDiamondOre;
      } else if ((u -= cfg.wall_density) < 0) {
        t = Tile::kWall;
      } else if (cfg.lava && (u -= cfg.lava_density) < 0) {
        t = Tile::kLava;
      }
      s.MutableAt(r, c) = t;
    }
  }
  const Minimums minimums;
  auto top_up = [&](Tile tile, int wanted) {
    std::uniform_int_distribution<std::size_t> pick(0, interior.size() - 1);
    for (int guard = 0; s.Count(tile) < wanted && guard < 10000; ++guard) {
      auto [r, c] = interior[pick(rng)];
      if (s.At(r, c) == Tile::kEmpty) s.MutableAt(r, c) = tile;
    }
  };
  top_up(Tile::kTree, minimums.trees);
  top_up(Tile::kStone, minimums.stones);
  top_up(Tile::kIronOre, minimums.iron);
  top_up(Tile::kDiamondOre, minimums.diamonds);

  std::vector<std::pair<int, int>> empties;
  for (auto [r, c] : interior) {
    if (s.At(r, c) == Tile::kEmpty) empties.emplace_back(r, c);
  }
  if (empties.empty()) return false;
  std::uniform_int_distribution<std::size_t> pick(0, empties.size() - 1);
  std::tie(s.row, s.col) = empties[pick(rng)];
  s.facing = static_cast<Facing>(std::uniform_int_distribution<int>(0, 3)(rng));

  if (s.Count(Tile::kDiamondOre) >= s.Count(Tile::kIronOre)) return false;
  const auto access = AccessibleCounts(s);
  return access[static_cast<std::size_t>(Tile::kTree)] >= minimums.trees - 1 &&
         access[static_cast<std::size_t>(Tile::kStone)] >= minimums.stones &&
         access[static_cast<std::size_t>(Tile::kIronOre)] >= minimums.iron &&
         access[static_cast<std::size_t>(Tile::kDiamondOre)] >= minimums.diamonds;
}

void AwardMilestones(WorldState& s, StepOutcome& outcome) {
  const auto& table = MilestoneTable();
  for (int k = 0; k < kMilestoneCount; ++k) {
    if (s.HasMilestone(k)) continue;
    const Milestone& m = table[static_cast<std::size_t>(k)];
    if (s.inventory[static_cast<std::size_t>(m.item)] > 0) {
      s.milestones |= 1U << k;
      outcome.reward += m.reward;
      outcome.events.push_back({s.frame, k});
      if (k == kTerminalMilestone) s.done = true;
    }
  }
}

void ApplyTurn(WorldState& s, int turn) {
  if (turn == kTurnNone) return;
  const int g = s.config.turn_granularity_deg;
  s.rotation_accumulator += (turn == kTurnRight) ? g : -g;
  if (s.rotation_accumulator >= 30) {
    s.facing = RotateClockwise(s.facing);
    s.rotation_accumulator -= 30;
  } else if (s.rotation_accumulator <= -30) {
    s.facing = RotateCounterClockwise(s.facing);
    s.rotation_accumulator += 30;
  }
}

void ApplyMove(WorldState& s, int move) {
  if (move == kMoveNone) return;
  auto [fr, fc] = FacingDelta(s.facing);
  auto [rr, rc] = FacingDelta(RotateClockwise(s.facing));
  int dr = 0, dc = 0;
  switch (move) {
    case kMoveForward: dr = fr; dc = fc; break;
    case kMoveBack: dr = -fr; dc = -fc; break;
    case kMoveLeft: dr = -rr; dc = -rc; break;
    case kMoveRight: dr = rr; dc = rc; break;
    default: break;
  }
  const Tile target = s.At(s.row + dr, s.col + dc);
  if (target == Tile::kEmpty) {
    s.row += dr;
    s.col += dc;
  } else if (target == Tile::kLava) {
    s.row += dr;
    s.col += dc;
    s.dead = true;
    s.done = true;
  }
}

void ResetMining(WorldState& s) {
  s.mine_row = s.mine_col = -1;
  s.mine_progress = 0;
}

void ApplyMine(WorldState& s) {
  auto [dr, dc] = FacingDelta(s.facing);
  const int r = s.row + dr, c = s.col + dc;
  if (r <= 0 || c <= 0 || r >= s.rows - 1 || c >= s.cols - 1) {
    ResetMining(s);
    return;
  }
  const int tier = PickaxeTier(s.equipped);
  Tile& tile = s.MutableAt(r, c);
  std::optional<Item> yield;
  int ticks = 0;
  switch (tile) {
    case Tile::kTree: yield = Item::kLog; ticks = kMineTicks[0]; break;
    case Tile::kStone: if (tier >= 1) yield = Item::kCobblestone; ticks = kMineTicks[1]; break;
    case Tile::kIronOre: if (tier >= 2) yield = Item::kIronOre; ticks = kMineTicks[2]; break;
    case Tile::kDiamondOre: if (tier >= 3) yield = Item::kDiamond; ticks = kMineTicks[3]; break;
    default: break;
  }
  if (!yield) {
    ResetMining(s);
    return;
  }
  if (s.mine_row != r || s.mine_col != c) {
    s.mine_row = r;
    s.mine_col = c;
    s.mine_progress = 0;
  }
  if (++s.mine_progress < ticks) return;
  ++s.inventory[static_cast<std::size_t>(*yield)];
  tile = Tile::kEmpty;
  ResetMining(s);
}

bool HasInputs(const WorldState& s, const Recipe& r) {
  if (r.needs_table && s.inventory[static_cast<std::size_t>(Item::kCraftingTable)] == 0) {
    return false;
  }
  for (auto [item, n] : r.inputs) {
    if (s.inventory[static_cast<std::size_t>(item)] < n) return false;
  }
  return true;
}

void ApplyCraft(WorldState& s, int value) {
  if (value == 0) return;
  const Recipe* r = FindCraftRecipe(kActionItems[static_cast<std::size_t>(value - 1)]);
  if (r == nullptr || !HasInputs(s, *r)) return;
  for (auto [item, n] : r->inputs) s.inventory[static_cast<std::size_t>(item)] -= n;
  s.inventory[static_cast<std::size_t>(r->output)] += r->output_count;
}

void ApplySmelt(WorldState& s, int value) {
  if (value == 0) return;
  if (kActionItems[static_cast<std::size_t>(value - 1)] != Item::kIronIngot) return;
  auto& inv = s.inventory;
  if (inv[static_cast<std::size_t>(Item::kFurnace)] == 0 ||
      inv[static_cast<std::size_t>(Item::kIronOre)] == 0) {
    return;
  }
  --inv[static_cast<std::size_t>(Item::kIronOre)];
  ++inv[static_cast<std::size_t>(Item::kIronIngot)];
}

void ApplyEquip(WorldState& s, int value) {
  if (value == 0) return;
  const Item item = kActionItems[static_cast<std::size_t>(value - 1)];
  if (PickaxeTier(item) == 0) return;
  if (s.inventory[static_cast<std::size_t>(item)] == 0) return;
  s.equipped = item;
}

}  // namespace

WorldState Reset(std::uint64_t seed, const EnvConfig& config) {
  config.Validate();
  WorldState state;
  state.config = config;
  state.seed = seed;
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 200; ++attempt) {
    if (GenerateOnce(state, rng)) return state;
  }
  throw ConfigurationError("env: could not generate a solvable map for seed " +
                           std::to_string(seed));
}

StepOutcome Step(WorldState& s, const ComposedAction& action) {
  if (s.done) throw UsageError("env: step after episode end");
  if (!action.IsValid()) throw UsageError("env: action head value out of range");
  StepOutcome outcome;
  const int repeats = action.multiplier();
  for (int i = 0; i < repeats && !s.done; ++i) {
    ++s.frame;
    ++outcome.frames;
    ApplyTurn(s, action[kTurn]);
    ApplyMove(s, action[kMove]);
    if (!s.done) {
      if (action[kMine] != 0) {
        ApplyMine(s);
      } else {
        ResetMining(s);
      }
      AwardMilestones(s, outcome);
      ApplyCraft(s, action[kCraft]);
      AwardMilestones(s, outcome);
      ApplySmelt(s, action[kSmelt]);
      AwardMilestones(s, outcome);
      ApplyEquip(s, action[kEquip]);
    }
    if (s.frame >= s.config.max_frames) s.done = true;
  }
  s.previous_action = action;
  outcome.done = s.done;
  return outcome;
}

Observation Observe(const WorldState& s) {
  Observation obs;
  const int r = s.config.view_radius;
  const int side = 2 * r + 1;
  obs.view.resize(static_cast<std::size_t>(side * side));
  auto [fr, fc] = FacingDelta(s.facing);
  auto [rr, rc] = FacingDelta(static_cast<Facing>((static_cast<int>(s.facing) + 1) % 4));
  for (int i = 0; i < side; ++i) {
    const int ahead = r - i;
    for (int j = 0; j < side; ++j) {
      const int right = j - r;
      const int wr = s.row + ahead * fr + right * rr;
      const int wc = s.col + ahead * fc + right * rc;
      obs.view[static_cast<std::size_t>(i * side + j)] =
          static_cast<std::uint8_t>(s.At(wr, wc));
    }
  }
  for (int k = 0; k < kItemCount; ++k) {
    obs.inventory[static_cast<std::size_t>(k)] = static_cast<std::uint16_t>(
        std::min(s.inventory[static_cast<std::size_t>(k)], 65535));
  }
  obs.equipped = static_cast<std::uint8_t>(PickaxeTier(s.equipped));
  obs.frame = s.frame;
  obs.max_frames = s.config.max_frames;
  obs.previous_action = s.previous_action;
  return obs;
}

std::string EpisodeLogJson(const EpisodeLog& log) {
  nlohmann::json j;
  j["seed"] = log.seed;
  j["return"] = log.episode_return;
  j["frames"] = log.frames;
  j["events"] = nlohmann::json::array();
  for (const auto& e : log.events) {
    j["events"].push_back({{"frame", e.frame}, {"milestone", e.milestone}});
  }
  return j.dump();
}

}  // namespace chaincraft::env

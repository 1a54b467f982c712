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

#ifndef CHAINCRAFT_ENV_CHAINCRAFT_HPP_
#define CHAINCRAFT_ENV_CHAINCRAFT_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace chaincraft::env {

enum class Tile : std::uint8_t {
  kEmpty = 0,
  kTree,
  kStone,
  kIronOre,
  kDiamondOre,
  kWall,
  kLava,
};
inline constexpr int kTileKinds = 7;

enum class Item : std::uint8_t {
  kLog = 0,
  kPlanks,
  kStick,
  kCraftingTable,
  kWoodenPickaxe,
  kCobblestone,
  kStonePickaxe,
  kFurnace,
  kIronOre,
  kIronIngot,
  kIronPickaxe,
  kDiamond,
};
inline constexpr int kItemCount = 12;

const char* ItemName(Item item);

enum class Facing : std::uint8_t { kNorth = 0, kEast, kSouth, kWest };

// ---------------------------------------------------------------------------
// Composed action space. Every head has an inactive value at index 0.

enum Head : int { kMove = 0, kTurn, kMine, kCraft, kSmelt, kEquip, kStep };
inline constexpr int kHeadCount = 7;
inline constexpr std::array<int, kHeadCount> kHeadSizes = {5, 3, 2, 10, 10, 10, 4};
inline constexpr std::array<const char*, kHeadCount> kHeadNames = {
    "move", "turn", "mine", "craft", "smelt", "equip", "step"};
inline constexpr int kActionLogits = 44;  // sum of kHeadSizes

enum MoveValue : int { kMoveNone = 0, kMoveForward, kMoveBack, kMoveLeft, kMoveRight };
// Left is the -30 degree camera rotation, right the +30 degree one.
enum TurnValue : int { kTurnNone = 0, kTurnLeft, kTurnRight };
inline constexpr std::array<int, 4> kStepMultipliers = {1, 2, 4, 8};
inline constexpr int kMaxStepMultiplier = 8;

// Items addressed by the craft/smelt/equip heads (value k -> entry k-1).
inline constexpr std::array<Item, 9> kActionItems = {
    Item::kPlanks,       Item::kStick,     Item::kCraftingTable,
    Item::kWoodenPickaxe, Item::kCobblestone, Item::kStonePickaxe,
    Item::kFurnace,      Item::kIronIngot, Item::kIronPickaxe};
int ActionItemIndex(Item item);  // 1..9, or 0 if not addressable

struct ComposedAction {
  std::array<int, kHeadCount> heads{};

  int& operator[](int head) { return heads[static_cast<std::size_t>(head)]; }
  int operator[](int head) const { return heads[static_cast<std::size_t>(head)]; }

  int multiplier() const { return kStepMultipliers[static_cast<std::size_t>(heads[kStep])]; }
  // True when every head except the step multiplier is inactive.
  bool IsNoOp() const;
  // Equal on every head except the step multiplier.
  bool SameAtomic(const ComposedAction& other) const;
  // Heads other than kStep that are active.
  int ActiveHeadCount() const;
  bool IsValid() const;

  bool operator==(const ComposedAction& other) const = default;
};

ComposedAction NoOp();
ComposedAction MakeAction(int head, int value, int multiplier_index = 0);
int MultiplierIndex(int multiplier);  // inverse of kStepMultipliers, -1 if absent

// ---------------------------------------------------------------------------
// Milestones

struct Milestone {
  Item item;
  double reward;
  std::vector<int> prerequisites;  // milestone indices
};
inline constexpr int kMilestoneCount = 9;
inline constexpr int kTerminalMilestone = 8;
const std::array<Milestone, kMilestoneCount>& MilestoneTable();
int MilestoneForItem(Item item);  // -1 if the item is not a milestone
double MaxEpisodeReturn();

struct Recipe {
  Item output;
  int output_count;
  std::vector<std::pair<Item, int>> inputs;
  bool needs_table;
};
const std::vector<Recipe>& CraftRecipes();
const Recipe* FindCraftRecipe(Item item);

// ---------------------------------------------------------------------------
// World

struct EnvConfig {
  int grid_size = 16;
  int view_radius = 2;
  int max_frames = 2000;
  double tree_density = 0.06;
  double stone_density = 0.12;
  double iron_density = 0.05;
  // Diamond ore density as a fraction of iron ore density.
  double diamond_ratio = 0.25;
  double wall_density = 0.0;
  bool lava = false;
  double lava_density = 0.02;
  // Degrees added per turn frame; facing changes once 30 degrees accumulate.
  int turn_granularity_deg = 30;

  void Validate() const;  // throws ConfigurationError
  bool operator==(const EnvConfig&) const = default;
};

struct WorldState {
  EnvConfig config;
  std::uint64_t seed = 0;
  int rows = 0;
  int cols = 0;
  std::vector<Tile> grid;
  int row = 0;
  int col = 0;
  Facing facing = Facing::kNorth;
  std::array<int, kItemCount> inventory{};
  std::optional<Item> equipped;
  int frame = 0;
  int rotation_accumulator = 0;
  // Consecutive mining ticks spent on the tile at (mine_row, mine_col).
  int mine_row = -1;
  int mine_col = -1;
  int mine_progress = 0;
  std::uint32_t milestones = 0;  // bit k set once milestone k was rewarded
  bool done = false;
  bool dead = false;
  ComposedAction previous_action;

  Tile At(int r, int c) const;
  Tile& MutableAt(int r, int c) { return grid[static_cast<std::size_t>(r * cols + c)]; }
  int Count(Tile tile) const;
  bool HasMilestone(int index) const { return (milestones >> index) & 1U; }

  bool operator==(const WorldState&) const = default;
};

// Egocentric observation. The window is rotated so that row 0 lies ahead of
// the agent; cells outside the map read as walls.
struct Observation {
  std::vector<std::uint8_t> view;  // (2r+1)^2 tile kinds, row-major
  std::array<std::uint16_t, kItemCount> inventory{};
  std::uint8_t equipped = 0;  // 0 none, 1 wooden, 2 stone, 3 iron pickaxe
  std::int32_t frame = 0;
  std::int32_t max_frames = 1;
  ComposedAction previous_action;

  int view_side() const;
  bool operator==(const Observation&) const = default;
};

struct MilestoneEvent {
  int frame;
  int milestone;
  bool operator==(const MilestoneEvent&) const = default;
};

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  int frames = 0;  // atomic frames actually applied
  std::vector<MilestoneEvent> events;
};

// Deterministic map generation from `seed`. Throws ConfigurationError on an
// invalid config.
WorldState Reset(std::uint64_t seed, const EnvConfig& config);
// Applies `action` step_multiplier times, stopping early if the episode
// ends. Throws UsageError when called after done or with an invalid action.
StepOutcome Step(WorldState& state, const ComposedAction& action);
Observation Observe(const WorldState& state);

int PickaxeTier(std::optional<Item> item);  // 0 none .. 3 iron
// Consecutive mine ticks needed for tree, stone, iron ore and diamond ore.
inline constexpr std::array<int, 4> kMineTicks = {3, 4, 6, 8};
std::pair<int, int> FacingDelta(Facing facing);

// Per-episode record for JSON-lines export.
struct EpisodeLog {
  std::uint64_t seed = 0;
  double episode_return = 0.0;
  int frames = 0;
  std::vector<MilestoneEvent> events;
};
std::string EpisodeLogJson(const EpisodeLog& log);

}  // namespace chaincraft::env

#endif  // CHAINCRAFT_ENV_CHAINCRAFT_HPP_

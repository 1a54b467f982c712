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

#ifndef CHAINCRAFT_ENV_EXPERT_HPP_
#define CHAINCRAFT_ENV_EXPERT_HPP_

#include <random>

#include "chaincraft/env/chaincraft.hpp"

namespace chaincraft::env {

// Planner with full map access. Works backwards from the terminal item:
// gathers resources by breadth-first search over empty tiles, crafts in
// prerequisite order, and equips the weakest pickaxe that suffices.
// The returned action always has step multiplier 1.
ComposedAction PlannerAction(const WorldState& state);

// Uniform draw over the whole composed action space (every head independent).
ComposedAction RandomAction(std::mt19937_64& rng);

// With probability noise_level replaces the planner action by RandomAction.
// Consumes the same number of rng draws on every call path that does not
// take the noisy branch, so noise-free rollouts are reproducible.
ComposedAction ScriptedExpert(const WorldState& state, double noise_level,
                              std::mt19937_64& rng);

}  // namespace chaincraft::env

#endif  // CHAINCRAFT_ENV_EXPERT_HPP_

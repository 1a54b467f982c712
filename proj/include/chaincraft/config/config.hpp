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

#ifndef CHAINCRAFT_CONFIG_CONFIG_HPP_
#define CHAINCRAFT_CONFIG_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaincraft/agent/network.hpp"
#include "chaincraft/demo/demos.hpp"
#include "chaincraft/env/chaincraft.hpp"
#include "chaincraft/imitation/imitation.hpp"
#include "chaincraft/trainer/evaluate.hpp"
#include "chaincraft/trainer/trainer.hpp"

namespace chaincraft::config {

struct DemoSettings {
  int count = 200;
  double noise = 0.2;
  std::uint64_t seed = 7;
  bool fine_rotation = false;
  int max_attempts = 10;

  bool operator==(const DemoSettings&) const = default;
};

// One flat file with a section per module:
//   env, demos, subsample, network, pretrain, trainer, eval
struct Config {
  env::EnvConfig env;
  DemoSettings demos;
  demo::SubsampleConfig subsample;
  agent::NetworkConfig network;
  imitation::PretrainConfig pretrain;
  trainer::TrainerConfig trainer;
  trainer::EvalConfig eval;

  // Runs every section's validation; may coerce (with a warning) per the
  // trainer's rules.
  void Validate();
  bool operator==(const Config&) const = default;
};

// Missing keys keep their defaults. Unknown keys, type errors and invalid
// values raise ConfigurationError naming the key path.
Config ParseConfig(std::string_view yaml_text);
Config LoadConfig(const std::filesystem::path& path);

std::string SerializeConfig(const Config& config);
void SaveConfig(const std::filesystem::path& path, const Config& config);
nlohmann::json ConfigToJson(const Config& config);

// "section.key=value" with a YAML value, e.g. "trainer.flags.er=true".
void ApplyOverride(Config& config, std::string_view assignment);
void ApplyOverrides(Config& config, const std::vector<std::string>& assignments);

std::string EncoderName(agent::EncoderKind kind);

}  // namespace chaincraft::config

#endif  // CHAINCRAFT_CONFIG_CONFIG_HPP_

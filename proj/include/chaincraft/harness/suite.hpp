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

#ifndef CHAINCRAFT_HARNESS_SUITE_HPP_
#define CHAINCRAFT_HARNESS_SUITE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chaincraft/config/config.hpp"
#include "chaincraft/trainer/evaluate.hpp"

namespace chaincraft::harness {

inline constexpr const char* kVersion = "chaincraft 0.1.0";

enum class RowKind { kSupervised, kReinforcement };

struct SuiteRow {
  std::string name;
  RowKind kind = RowKind::kReinforcement;
  bool inventory_subnet = true;  // supervised rows only
  trainer::AblationFlags flags;
  int replay_ratio = 0;
};

// Table rows: supervised, cp, impala, er, er_sac, er_sac_ac, er_sac_cl,
// er_sac_ac_cl; sweep rows: ratio_<r> with the sweep row's flags.
SuiteRow ResolveRow(const std::string& name, int default_ratio,
                    const trainer::AblationFlags& sweep_flags);
std::vector<std::string> TableRows();

struct SuiteConfig {
  config::Config base;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::vector<std::string> rows = TableRows();
  std::vector<int> replay_sweep = {1, 3, 7, 15, 31};
  std::string sweep_row = "er_sac_ac_cl";
  // Skip runs whose manifest matches and whose evaluation exists.
  bool resume = true;

  // Rows in run order, sweep rows deduplicated against table rows that have
  // identical settings.
  std::vector<SuiteRow> ExpandRows() const;
};

// Layout:
//   base: <config sections>     (optional)
//   seeds: [1, 2, 3]
//   rows: [supervised, cp, impala, ...]
//   replay_sweep: [1, 3, 7, 15, 31]
//   sweep_row: er_sac_ac_cl
//   resume: true
SuiteConfig ParseSuite(std::string_view yaml_text);
SuiteConfig LoadSuite(const std::filesystem::path& path);

// Resolved configuration for one run of `row`.
config::Config RowConfig(const config::Config& base, const SuiteRow& row, std::uint64_t seed);

struct RunManifest {
  std::string row;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  nlohmann::json config;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  std::string initial_checkpoint;
  std::string final_checkpoint;
  double wall_seconds = 0.0;

  nlohmann::json ToJson() const;
  static RunManifest FromJson(const nlohmann::json& j);
};

struct SuiteProgress {
  std::function<void(const std::string&)> log;
};

struct SuiteRunResult {
  std::string row;
  std::uint64_t seed;
  trainer::EvalReport eval;
  bool reused = false;
};

// Runs every (seed, row) pair under `out_dir/<row>/seed_<s>/` and writes the
// report files. RL rows start from the same seed's "cp" pretraining.
std::vector<SuiteRunResult> RunSuite(const SuiteConfig& suite, const std::filesystem::path& out_dir,
                                     const SuiteProgress& progress = {});

// Pipeline steps shared with the CLI.
demo::Dataset BuildDataset(const config::Config& config, std::uint64_t demo_seed);
trainer::EvalReport EvaluateCheckpoint(const nn::ParameterSet& params, const config::Config& config);

}  // namespace chaincraft::harness

#endif  // CHAINCRAFT_HARNESS_SUITE_HPP_

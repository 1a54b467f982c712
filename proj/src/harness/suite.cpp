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

#include "chaincraft/harness/suite.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "chaincraft/errors.hpp"
#include "chaincraft/nn/checkpoint.hpp"
#include "chaincraft/report/report.hpp"
#include "chaincraft/seeding.hpp"

namespace chaincraft::harness {
namespace fs = std::filesystem;
namespace {

nlohmann::json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

void WriteJsonFile(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

trainer::AblationFlags FlagsFor(const std::string& name) {
  if (name == "impala") return {};
  if (name == "er") return {true, false, false, false};
  if (name == "er_sac") return {true, true, false, false};
  if (name == "er_sac_ac") return {true, true, true, false};
  if (name == "er_sac_cl") return {true, true, false, true};
  if (name == "er_sac_ac_cl") return {true, true, true, true};
  throw ConfigurationError("unknown suite row '" + name + "'");
}

bool SameSettings(const SuiteRow& a, const SuiteRow& b) {
  return a.kind == b.kind && a.inventory_subnet == b.inventory_subnet && a.flags == b.flags &&
         (a.replay_ratio == b.replay_ratio || !a.flags.er);
}

}  // namespace

std::vector<std::string> TableRows() {
  return {"supervised", "cp", "impala", "er", "er_sac", "er_sac_ac", "er_sac_cl", "er_sac_ac_cl"};
}

SuiteRow ResolveRow(const std::string& name, int default_ratio,
                    const trainer::AblationFlags& sweep_flags) {
  SuiteRow row;
  row.name = name;
  if (name == "supervised" || name == "cp") {
    row.kind = RowKind::kSupervised;
    row.inventory_subnet = name == "cp";
    return row;
  }
  if (name.rfind("ratio_", 0) == 0) {
    try {
      row.replay_ratio = std::stoi(name.substr(6));
    } catch (const std::exception&) {
      throw ConfigurationError("bad sweep row '" + name + "'");
    }
    if (row.replay_ratio < 0) throw ConfigurationError("bad sweep row '" + name + "'");
    row.flags = sweep_flags;
    row.flags.er = true;
    return row;
  }
  row.flags = FlagsFor(name);
  row.replay_ratio = row.flags.er ? default_ratio : 0;
  return row;
}

std::vector<SuiteRow> SuiteConfig::ExpandRows() const {
  const trainer::AblationFlags sweep_flags = FlagsFor(sweep_row);
  std::vector<SuiteRow> out;
  auto add = [&](const SuiteRow& row) {
    for (const auto& existing : out) {
      if (existing.name == row.name) return;
    }
    out.push_back(row);
  };
  for (const auto& name : rows) add(ResolveRow(name, base.trainer.replay_ratio, sweep_flags));
  for (int ratio : replay_sweep) {
    SuiteRow row = ResolveRow("ratio_" + std::to_string(ratio), base.trainer.replay_ratio,
                              sweep_flags);
    bool duplicate = false;
    for (const auto& existing : out) duplicate = duplicate || SameSettings(existing, row);
    if (!duplicate) add(row);
  }
  return out;
}

SuiteConfig ParseSuite(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigurationError(std::string("suite is not valid YAML: ") + e.what());
  }
  SuiteConfig suite;
  if (!root || root.IsNull()) {
    suite.base.Validate();
    return suite;
  }
  if (!root.IsMap()) throw ConfigurationError("suite: expected a mapping");
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    try {
      if (key == "base") {
        YAML::Emitter out;
        out.SetDoublePrecision(17);
        out << kv.second;
        suite.base = config::ParseConfig(out.c_str());
      } else if (key == "seeds") {
        suite.seeds = kv.second.as<std::vector<std::uint64_t>>();
      } else if (key == "rows") {
        suite.rows = kv.second.as<std::vector<std::string>>();
      } else if (key == "replay_sweep") {
        suite.replay_sweep = kv.second.as<std::vector<int>>();
      } else if (key == "sweep_row") {
        suite.sweep_row = kv.second.as<std::string>();
      } else if (key == "resume") {
        suite.resume = kv.second.as<bool>();
      } else {
        throw ConfigurationError("unknown key '" + key + "'");
      }
    } catch (const YAML::Exception& e) {
      throw ConfigurationError("suite." + key + ": " + e.what());
    } catch (const ConfigurationError& e) {
      throw ConfigurationError("suite: " + std::string(e.what()));
    }
  }
  if (suite.seeds.empty()) throw ConfigurationError("suite.seeds is empty");
  for (int r : suite.replay_sweep) {
    if (r < 0) throw ConfigurationError("suite.replay_sweep: ratios must be >= 0");
  }
  suite.ExpandRows();  // validates row names
  return suite;
}

SuiteConfig LoadSuite(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open suite file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseSuite(buffer.str());
}

config::Config RowConfig(const config::Config& base, const SuiteRow& row, std::uint64_t seed) {
  config::Config c = base;
  c.demos.seed = DeriveSeed(base.demos.seed, {seed});
  c.pretrain.seed = DeriveSeed(base.pretrain.seed, {seed});
  c.trainer.seed = DeriveSeed(base.trainer.seed, {seed});
  if (row.kind == RowKind::kSupervised) {
    c.network.inventory_subnet = row.inventory_subnet;
  } else {
    c.network.inventory_subnet = true;
    c.trainer.flags = row.flags;
    c.trainer.replay_ratio = row.replay_ratio;
  }
  c.Validate();
  return c;
}

nlohmann::json RunManifest::ToJson() const {
  return {{"row", row},
          {"seed", seed},
          {"version", version},
          {"config", config},
          {"start_frame", start_frame},
          {"end_frame", end_frame},
          {"initial_checkpoint", initial_checkpoint},
          {"final_checkpoint", final_checkpoint},
          {"wall_seconds", wall_seconds}};
}

RunManifest RunManifest::FromJson(const nlohmann::json& j) {
  RunManifest m;
  m.row = j.at("row").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.version = j.at("version").get<std::string>();
  m.config = j.at("config");
  m.start_frame = j.at("start_frame").get<std::int64_t>();
  m.end_frame = j.at("end_frame").get<std::int64_t>();
  m.initial_checkpoint = j.at("initial_checkpoint").get<std::string>();
  m.final_checkpoint = j.at("final_checkpoint").get<std::string>();
  m.wall_seconds = j.value("wall_seconds", 0.0);
  return m;
}

demo::Dataset BuildDataset(const config::Config& config, std::uint64_t demo_seed) {
  demo::DemoOptions options;
  options.noise_level = config.demos.noise;
  options.fine_rotation = config.demos.fine_rotation;
  options.max_attempts_per_episode = config.demos.max_attempts;
  const auto episodes = demo::GenerateDemos(config.demos.count, demo_seed, config.env, options);
  demo::Dataset dataset;
  dataset.reserve(episodes.size());
  for (const auto& e : episodes) dataset.push_back(demo::Subsample(e, config.subsample));
  return dataset;
}

trainer::EvalReport EvaluateCheckpoint(const nn::ParameterSet& params, const config::Config& config) {
  trainer::NetworkPolicy policy(trainer::PolicyNetworkFrom(params, config.network),
                                config.eval.greedy);
  return trainer::Evaluate(policy, config.env, config.eval);
}

std::vector<SuiteRunResult> RunSuite(const SuiteConfig& suite, const fs::path& out_dir,
                                     const SuiteProgress& progress) {
  auto log = [&](const std::string& msg) {
    if (progress.log) progress.log(msg);
  };
  fs::create_directories(out_dir);
  std::vector<SuiteRow> rows = suite.ExpandRows();
  bool needs_cp = false;
  bool has_cp = false;
  for (const auto& r : rows) {
    needs_cp = needs_cp || r.kind == RowKind::kReinforcement;
    has_cp = has_cp || r.name == "cp";
  }
  if (needs_cp && !has_cp) rows.insert(rows.begin(), ResolveRow("cp", 0, {}));
  // Supervised rows run first so RL rows find their initialisation.
  std::stable_partition(rows.begin(), rows.end(),
                        [](const SuiteRow& r) { return r.kind == RowKind::kSupervised; });
  {
    nlohmann::json meta = {{"version", kVersion},
                           {"seeds", suite.seeds},
                           {"replay_sweep", suite.replay_sweep},
                           {"sweep_row", suite.sweep_row},
                           {"base", config::ConfigToJson(suite.base)}};
    std::vector<std::string> names;
    for (const auto& r : rows) names.push_back(r.name);
    meta["rows"] = names;
    WriteJsonFile(out_dir / "suite.json", meta);
  }

  std::vector<SuiteRunResult> results;
  for (std::uint64_t seed : suite.seeds) {
    const fs::path data_path = out_dir / "data" / ("seed_" + std::to_string(seed) + ".ccds");
    std::optional<demo::Dataset> dataset;
    auto get_dataset = [&](const config::Config& c) -> const demo::Dataset& {
      if (!dataset) {
        if (suite.resume && fs::exists(data_path)) {
          dataset = demo::LoadDataset(data_path);
        } else {
          log("seed " + std::to_string(seed) + ": generating demonstrations");
          dataset = BuildDataset(c, c.demos.seed);
          fs::create_directories(data_path.parent_path());
          demo::SaveDataset(data_path, *dataset);
        }
      }
      return *dataset;
    };

    for (const auto& row : rows) {
      const config::Config c = RowConfig(suite.base, row, seed);
      const fs::path dir = out_dir / row.name / ("seed_" + std::to_string(seed));
      const nlohmann::json config_json = config::ConfigToJson(c);
      if (suite.resume && fs::exists(dir / "manifest.json") && fs::exists(dir / "eval.json")) {
        const RunManifest previous = RunManifest::FromJson(ReadJsonFile(dir / "manifest.json"));
        if (previous.config == config_json && previous.version == kVersion) {
          log(row.name + " seed " + std::to_string(seed) + ": reusing finished run");
          results.push_back({row.name, seed,
                             trainer::EvalReport::FromJson(ReadJsonFile(dir / "eval.json")), true});
          continue;
        }
      }
      fs::create_directories(dir);
      fs::remove(dir / "eval.json");
      const auto start = std::chrono::steady_clock::now();
      RunManifest manifest;
      manifest.row = row.name;
      manifest.seed = seed;
      manifest.config = config_json;
      manifest.final_checkpoint = (dir / "final.ckpt").string();
      log(row.name + " seed " + std::to_string(seed) + ": running");
      nn::ParameterSet final_params;
      if (row.kind == RowKind::kSupervised) {
        imitation::PretrainOutputs outputs;
        outputs.directory = dir;
        final_params = imitation::Pretrain(get_dataset(c), c.network, c.pretrain, outputs).params;
      } else {
        const fs::path init = out_dir / "cp" / ("seed_" + std::to_string(seed)) / "final.ckpt";
        manifest.initial_checkpoint = init.string();
        const nn::ParameterSet init_params = nn::LoadCheckpoint(init);
        trainer::TrainOutputs outputs;
        outputs.directory = dir;
        const trainer::TrainResult result =
            trainer::Train(c.trainer, c.network, c.env, &init_params, outputs);
        manifest.end_frame = result.frames_used;
        final_params = result.params;
      }
      config::SaveConfig(dir / "config.yaml", c);
      const trainer::EvalReport eval = EvaluateCheckpoint(final_params, c);
      manifest.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      WriteJsonFile(dir / "manifest.json", manifest.ToJson());
      WriteJsonFile(dir / "eval.json", eval.ToJson());
      log(row.name + " seed " + std::to_string(seed) + ": mean " + std::to_string(eval.mean));
      results.push_back({row.name, seed, eval, false});
    }
  }
  report::WriteReport(out_dir);
  return results;
}

}  // namespace chaincraft::harness

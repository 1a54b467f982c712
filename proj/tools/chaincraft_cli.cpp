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

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chaincraft/config/config.hpp"
#include "chaincraft/demo/demos.hpp"
#include "chaincraft/errors.hpp"
#include "chaincraft/harness/suite.hpp"
#include "chaincraft/imitation/imitation.hpp"
#include "chaincraft/nn/checkpoint.hpp"
#include "chaincraft/report/report.hpp"
#include "chaincraft/trainer/evaluate.hpp"
#include "chaincraft/trainer/trainer.hpp"

namespace fs = std::filesystem;
using namespace chaincraft;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void AddCommon(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "YAML config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", args.overrides, "Override a config key, e.g. trainer.replay_ratio=7");
}

config::Config ResolveConfig(const CommonArgs& args) {
  config::Config c = args.config_path.empty() ? config::Config{} : config::LoadConfig(args.config_path);
  config::ApplyOverrides(c, args.overrides);
  c.Validate();
  return c;
}

void PrintEval(const trainer::EvalReport& r) {
  std::cout << "episodes " << r.episodes << "  mean " << r.mean << "  std " << r.std << "  max "
            << r.max << "\nreward frequency";
  for (double f : r.reward_frequency) std::cout << ' ' << f;
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ChainCraft demonstrations, imitation and off-policy fine-tuning"};
  app.set_version_flag("--version", std::string(harness::kVersion));
  app.require_subcommand(1);

  CommonArgs gen_args;
  std::string gen_out;
  std::string gen_log;
  auto* gen = app.add_subcommand("gen-demos", "Generate and subsample scripted demonstrations");
  AddCommon(gen, gen_args);
  gen->add_option("--out", gen_out, "Dataset file to write")->required();
  gen->add_option("--episode-log", gen_log, "Optional JSON-lines log of raw episodes");

  CommonArgs pre_args;
  std::string pre_data;
  std::string pre_out;
  auto* pre = app.add_subcommand("pretrain", "Supervised pretraining on a demonstration dataset");
  AddCommon(pre, pre_args);
  pre->add_option("--data", pre_data, "Dataset file (generated from the config when omitted)");
  pre->add_option("--out", pre_out, "Output directory")->required();

  CommonArgs train_args;
  std::string train_init;
  std::string train_out;
  auto* train = app.add_subcommand("train", "Actor-learner fine-tuning");
  AddCommon(train, train_args);
  train->add_option("--init", train_init, "Pretrained checkpoint")->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Output directory")->required();

  CommonArgs eval_args;
  std::string eval_ckpt;
  std::optional<int> eval_episodes;
  std::string eval_out;
  std::string eval_policy = "network";
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on held-out seeds");
  AddCommon(eval, eval_args);
  eval->add_option("--ckpt", eval_ckpt, "Checkpoint to evaluate")->check(CLI::ExistingFile);
  eval->add_option("--episodes", eval_episodes, "Number of episodes");
  eval->add_option("--policy", eval_policy, "network, expert or random")
      ->check(CLI::IsMember({"network", "expert", "random"}));
  eval->add_option("--out", eval_out, "Write the report as JSON");

  std::string suite_path;
  std::string ablate_out;
  bool no_resume = false;
  auto* ablate = app.add_subcommand("ablate", "Run the ablation suite and write the report");
  ablate->add_option("--suite", suite_path, "Suite YAML file")->check(CLI::ExistingFile);
  ablate->add_option("--out", ablate_out, "Run directory")->required();
  ablate->add_flag("--no-resume", no_resume, "Rerun runs that already finished");

  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "Write CSV tables from a run directory");
  report_cmd->add_option("run_dir", report_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUser;
  }

  try {
    if (*gen) {
      const config::Config c = ResolveConfig(gen_args);
      demo::DemoOptions options;
      options.noise_level = c.demos.noise;
      options.fine_rotation = c.demos.fine_rotation;
      options.max_attempts_per_episode = c.demos.max_attempts;
      const auto episodes = demo::GenerateDemos(c.demos.count, c.demos.seed, c.env, options);
      demo::Dataset dataset;
      std::size_t raw = 0;
      std::size_t records = 0;
      for (const auto& e : episodes) {
        dataset.push_back(demo::Subsample(e, c.subsample));
        raw += e.frames.size();
        records += dataset.back().records.size();
      }
      demo::SaveDataset(gen_out, dataset);
      if (!gen_log.empty()) {
        std::ofstream log(gen_log);
        for (const auto& e : episodes) {
          log << env::EpisodeLogJson({e.seed, e.episode_return,
                                      static_cast<int>(e.frames.size()), e.events})
              << '\n';
        }
      }
      std::cout << episodes.size() << " episodes, " << raw << " frames, " << records
                << " records -> " << gen_out << '\n';
    } else if (*pre) {
      const config::Config c = ResolveConfig(pre_args);
      const demo::Dataset dataset =
          pre_data.empty() ? harness::BuildDataset(c, c.demos.seed) : demo::LoadDataset(pre_data);
      imitation::PretrainOutputs outputs;
      outputs.directory = pre_out;
      outputs.on_epoch = [](const imitation::EpochStats& s) {
        std::cout << "epoch " << s.epoch << "  train " << s.train_loss << "  holdout joint "
                  << s.holdout.joint << '\n';
      };
      fs::create_directories(pre_out);
      config::SaveConfig(fs::path(pre_out) / "config.yaml", c);
      imitation::Pretrain(dataset, c.network, c.pretrain, outputs);
      std::cout << "wrote " << (fs::path(pre_out) / "final.ckpt").string() << '\n';
    } else if (*train) {
      const config::Config c = ResolveConfig(train_args);
      std::optional<nn::ParameterSet> init;
      if (!train_init.empty()) init = nn::LoadCheckpoint(train_init);
      fs::create_directories(train_out);
      config::SaveConfig(fs::path(train_out) / "config.yaml", c);
      trainer::TrainOutputs outputs;
      outputs.directory = train_out;
      const auto result =
          trainer::Train(c.trainer, c.network, c.env, init ? &*init : nullptr, outputs);
      std::cout << "frames " << result.frames_used << "  updates " << result.metrics.size()
                << "  episodes " << result.episodes.size() << '\n';
    } else if (*eval) {
      config::Config c = ResolveConfig(eval_args);
      if (eval_episodes) c.eval.episodes = *eval_episodes;
      c.Validate();
      std::unique_ptr<trainer::Policy> policy;
      if (eval_policy == "expert") {
        policy = std::make_unique<trainer::ExpertPolicy>();
      } else if (eval_policy == "random") {
        policy = std::make_unique<trainer::RandomPolicy>();
      } else {
        if (eval_ckpt.empty()) throw ConfigurationError("eval: --ckpt is required for --policy network");
        policy = std::make_unique<trainer::NetworkPolicy>(
            trainer::PolicyNetworkFrom(nn::LoadCheckpoint(eval_ckpt), c.network), c.eval.greedy);
      }
      const auto report = trainer::Evaluate(*policy, c.env, c.eval);
      PrintEval(report);
      if (!eval_out.empty()) {
        std::ofstream(eval_out) << report.ToJson().dump(2) << '\n';
      }
    } else if (*ablate) {
      harness::SuiteConfig suite = suite_path.empty() ? harness::SuiteConfig{} : harness::LoadSuite(suite_path);
      if (no_resume) suite.resume = false;
      harness::SuiteProgress progress;
      progress.log = [](const std::string& line) { std::cout << line << std::endl; };
      harness::RunSuite(suite, ablate_out, progress);
      std::cout << "report written under " << ablate_out << '\n';
    } else if (*report_cmd) {
      const auto files = report::WriteReport(report_dir);
      for (const auto& w : files.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << files.ablation_table.string() << '\n'
                << files.reward_frequency.string() << '\n'
                << files.learning_curve.string() << '\n';
    }
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUser;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kExitUser;
  } catch (const GenerationError& e) {
    std::cerr << "generation error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

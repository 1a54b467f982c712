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

#ifndef CHAINCRAFT_REPORT_REPORT_HPP_
#define CHAINCRAFT_REPORT_REPORT_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chaincraft/trainer/evaluate.hpp"

namespace chaincraft::report {

inline constexpr double kCiZ = 1.96;

struct SeedStatistics {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation over seeds
  // mean +- 1.96 * std / sqrt(n); empty when n < 2.
  std::optional<double> ci_low;
  std::optional<double> ci_high;

  std::optional<double> HalfWidth() const;
};

SeedStatistics Summarize(const std::vector<double>& values);

// True when both intervals exist and a's lies entirely below b's.
bool SeparatedBelow(const SeedStatistics& a, const SeedStatistics& b);

struct RunRecord {
  std::string row;
  std::uint64_t seed = 0;
  std::filesystem::path directory;
  std::optional<trainer::EvalReport> eval;  // empty for incomplete runs
  std::vector<std::pair<std::int64_t, double>> curve;
};

struct RowSummary {
  std::string row;
  std::vector<std::uint64_t> seeds;
  std::size_t incomplete = 0;
  SeedStatistics mean_score;  // over per-seed evaluation means
  double best = 0.0;          // best seed's mean
  double max = 0.0;           // max single episode
  std::array<double, env::kMilestoneCount> reward_frequency{};  // averaged over seeds
};

// Scans `run_dir/<row>/seed_<n>/` for manifest.json, eval.json and curve.csv.
std::vector<RunRecord> ScanRuns(const std::filesystem::path& run_dir);

std::vector<RowSummary> SummarizeRows(const std::vector<RunRecord>& runs,
                                      const std::vector<std::string>& row_order = {});

struct ReportFiles {
  std::filesystem::path ablation_table;
  std::filesystem::path reward_frequency;
  std::filesystem::path learning_curve;
  std::vector<std::string> warnings;
};

// Writes ablation.csv, reward_frequency.csv and learning_curve.csv under
// `run_dir`. Reading is pure; output depends only on the run files.
ReportFiles WriteReport(const std::filesystem::path& run_dir);

}  // namespace chaincraft::report

#endif  // CHAINCRAFT_REPORT_REPORT_HPP_

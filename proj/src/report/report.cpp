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

#include "chaincraft/report/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "chaincraft/errors.hpp"
#include "chaincraft/log.hpp"

namespace chaincraft::report {
namespace fs = std::filesystem;
namespace {

nlohmann::json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::pair<std::int64_t, double>> ReadCurve(const fs::path& path) {
  std::vector<std::pair<std::int64_t, double>> curve;
  std::ifstream in(path);
  if (!in) return curve;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const std::int64_t frame = std::stoll(line.substr(0, comma));
    const std::string value = line.substr(comma + 1);
    curve.emplace_back(frame, value.empty() ? std::nan("") : std::stod(value));
  }
  return curve;
}

std::string Cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << *v;
  return s.str();
}

}  // namespace

std::optional<double> SeedStatistics::HalfWidth() const {
  if (!ci_high) return std::nullopt;
  return *ci_high - mean;
}

SeedStatistics Summarize(const std::vector<double>& values) {
  SeedStatistics s;
  s.n = values.size();
  s.mean = trainer::Mean(values);
  s.std = trainer::SampleStd(values);
  if (s.n >= 2) {
    const double half = kCiZ * s.std / std::sqrt(static_cast<double>(s.n));
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
  }
  return s;
}

bool SeparatedBelow(const SeedStatistics& a, const SeedStatistics& b) {
  return a.ci_high && b.ci_low && *a.ci_high < *b.ci_low;
}

std::vector<RunRecord> ScanRuns(const fs::path& run_dir) {
  std::vector<RunRecord> runs;
  if (!fs::is_directory(run_dir)) throw UsageError("report: no run directory " + run_dir.string());
  std::vector<fs::path> rows;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (entry.is_directory()) rows.push_back(entry.path());
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& row_dir : rows) {
    std::vector<fs::path> seeds;
    for (const auto& entry : fs::directory_iterator(row_dir)) {
      if (entry.is_directory() && entry.path().filename().string().rfind("seed_", 0) == 0) {
        seeds.push_back(entry.path());
      }
    }
    std::sort(seeds.begin(), seeds.end());
    for (const auto& seed_dir : seeds) {
      RunRecord run;
      run.row = row_dir.filename().string();
      run.directory = seed_dir;
      try {
        run.seed = std::stoull(seed_dir.filename().string().substr(5));
      } catch (const std::exception&) {
        continue;
      }
      if (fs::exists(seed_dir / "eval.json")) {
        run.eval = trainer::EvalReport::FromJson(ReadJson(seed_dir / "eval.json"));
      }
      run.curve = ReadCurve(seed_dir / "curve.csv");
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

std::vector<RowSummary> SummarizeRows(const std::vector<RunRecord>& runs,
                                      const std::vector<std::string>& row_order) {
  std::vector<std::string> order = row_order;
  for (const auto& r : runs) {
    if (std::find(order.begin(), order.end(), r.row) == order.end()) order.push_back(r.row);
  }
  std::vector<RowSummary> rows;
  for (const auto& name : order) {
    RowSummary row;
    row.row = name;
    std::vector<double> means;
    bool any = false;
    for (const auto& r : runs) {
      if (r.row != name) continue;
      any = true;
      if (!r.eval) {
        ++row.incomplete;
        continue;
      }
      row.seeds.push_back(r.seed);
      means.push_back(r.eval->mean);
      row.max = means.size() == 1 ? r.eval->max : std::max(row.max, r.eval->max);
      for (int k = 0; k < env::kMilestoneCount; ++k) {
        row.reward_frequency[k] += r.eval->reward_frequency[k];
      }
    }
    if (!any) continue;
    if (!means.empty()) {
      for (double& f : row.reward_frequency) f /= static_cast<double>(means.size());
      row.best = *std::max_element(means.begin(), means.end());
    }
    row.mean_score = Summarize(means);
    rows.push_back(std::move(row));
  }
  return rows;
}

ReportFiles WriteReport(const fs::path& run_dir) {
  const std::vector<RunRecord> runs = ScanRuns(run_dir);
  std::vector<std::string> order;
  if (fs::exists(run_dir / "suite.json")) {
    const auto suite = ReadJson(run_dir / "suite.json");
    if (suite.contains("rows")) order = suite.at("rows").get<std::vector<std::string>>();
  }
  const std::vector<RowSummary> rows = SummarizeRows(runs, order);
  ReportFiles files;
  files.ablation_table = run_dir / "ablation.csv";
  files.reward_frequency = run_dir / "reward_frequency.csv";
  files.learning_curve = run_dir / "learning_curve.csv";

  std::ofstream table(files.ablation_table);
  table << "row,seeds,incomplete,mean,std,ci_low,ci_high,best,max\n";
  for (const auto& r : rows) {
    if (r.incomplete > 0) {
      files.warnings.push_back(r.row + ": " + std::to_string(r.incomplete) +
                               " incomplete run(s) excluded");
    }
    if (r.mean_score.n == 1) {
      files.warnings.push_back(r.row + ": single seed, confidence interval left empty");
    }
    table << r.row << ',' << r.mean_score.n << ',' << r.incomplete << ',';
    if (r.mean_score.n == 0) {
      table << ",,,,,\n";
      continue;
    }
    table << r.mean_score.mean << ',' << (r.mean_score.n >= 2 ? Cell(r.mean_score.std) : "")
          << ',' << Cell(r.mean_score.ci_low) << ',' << Cell(r.mean_score.ci_high) << ','
          << r.best << ',' << r.max << '\n';
  }

  std::ofstream freq(files.reward_frequency);
  freq << "row";
  for (int k = 0; k < env::kMilestoneCount; ++k) freq << ",m" << k;
  freq << '\n';
  for (const auto& r : rows) {
    if (r.mean_score.n == 0) continue;
    freq << r.row;
    for (double f : r.reward_frequency) freq << ',' << f;
    freq << '\n';
  }

  std::ofstream curve(files.learning_curve);
  curve << "row,frame,n,mean,std,ci_low,ci_high\n";
  for (const auto& r : rows) {
    std::map<std::int64_t, std::vector<double>> bins;
    for (const auto& run : runs) {
      if (run.row != r.row) continue;
      for (const auto& [frame, value] : run.curve) {
        if (std::isfinite(value)) bins[frame].push_back(value);
      }
    }
    for (const auto& [frame, values] : bins) {
      const SeedStatistics s = Summarize(values);
      curve << r.row << ',' << frame << ',' << s.n << ',' << s.mean << ','
            << (s.n >= 2 ? Cell(s.std) : "") << ',' << Cell(s.ci_low) << ','
            << Cell(s.ci_high) << '\n';
    }
  }
  for (const auto& w : files.warnings) LogWarning("report: " + w);
  return files;
}

}  // namespace chaincraft::report

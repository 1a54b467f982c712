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

#include <fstream>
#include <sstream>

#include "chaincraft/binary_io.hpp"
#include "chaincraft/demo/demos.hpp"
#include "chaincraft/errors.hpp"

namespace chaincraft::demo {

void WriteAction(std::ostream& out, const env::ComposedAction& action) {
  for (int h = 0; h < env::kHeadCount; ++h) {
    io::WriteLe<std::uint8_t>(out, static_cast<std::uint8_t>(action[h]));
  }
}

env::ComposedAction ReadAction(std::istream& in) {
  env::ComposedAction action;
  for (int h = 0; h < env::kHeadCount; ++h) action[h] = io::ReadLe<std::uint8_t>(in);
  if (!action.IsValid()) throw FormatError("dataset: action head value out of range");
  return action;
}

void WriteObservation(std::ostream& out, const env::Observation& obs) {
  io::WriteLe<std::uint16_t>(out, static_cast<std::uint16_t>(obs.view.size()));
  out.write(reinterpret_cast<const char*>(obs.view.data()),
            static_cast<std::streamsize>(obs.view.size()));
  for (auto count : obs.inventory) io::WriteLe<std::uint16_t>(out, count);
  io::WriteLe<std::uint8_t>(out, obs.equipped);
  io::WriteLe<std::int32_t>(out, obs.frame);
  io::WriteLe<std::int32_t>(out, obs.max_frames);
  WriteAction(out, obs.previous_action);
}

env::Observation ReadObservation(std::istream& in) {
  env::Observation obs;
  const auto view_size = io::ReadLe<std::uint16_t>(in);
  obs.view.resize(view_size);
  if (!in.read(reinterpret_cast<char*>(obs.view.data()), view_size)) {
    throw FormatError("dataset: truncated observation");
  }
  for (auto v : obs.view) {
    if (v >= env::kTileKinds) throw FormatError("dataset: tile kind out of range");
  }
  for (auto& count : obs.inventory) count = io::ReadLe<std::uint16_t>(in);
  obs.equipped = io::ReadLe<std::uint8_t>(in);
  obs.frame = io::ReadLe<std::int32_t>(in);
  obs.max_frames = io::ReadLe<std::int32_t>(in);
  obs.previous_action = ReadAction(in);
  return obs;
}

void WriteDataset(std::ostream& out, const Dataset& dataset) {
  std::vector<std::string> blobs;
  blobs.reserve(dataset.size());
  for (const SubsampledEpisode& episode : dataset) {
    std::ostringstream blob(std::ios::binary);
    io::WriteLe<std::uint64_t>(blob, episode.source_id);
    io::WriteLe<std::uint32_t>(blob, episode.original_length);
    io::WriteLe<std::uint32_t>(blob, static_cast<std::uint32_t>(episode.records.size()));
    for (const SubsampledRecord& r : episode.records) {
      WriteObservation(blob, r.observation);
      WriteAction(blob, r.action);
    }
    blobs.push_back(std::move(blob).str());
  }
  out.write(kDatasetMagic, 4);
  io::WriteLe<std::uint32_t>(out, kDatasetVersion);
  io::WriteLe<std::uint64_t>(out, dataset.size());
  std::uint64_t offset = 4 + 4 + 8 + 8 * dataset.size();
  for (const std::string& blob : blobs) {
    io::WriteLe<std::uint64_t>(out, offset);
    offset += blob.size();
  }
  for (const std::string& blob : blobs) {
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  }
}

Dataset ReadDataset(std::istream& in) {
  io::ExpectMagic(in, kDatasetMagic, "dataset");
  const auto version = io::ReadLe<std::uint32_t>(in);
  if (version != kDatasetVersion) {
    throw FormatError("dataset: unsupported version " + std::to_string(version));
  }
  const auto count = io::ReadLe<std::uint64_t>(in);
  if (count > (1ULL << 32)) throw FormatError("dataset: episode count out of range");
  std::vector<std::uint64_t> offsets(count);
  for (auto& o : offsets) o = io::ReadLe<std::uint64_t>(in);
  Dataset dataset;
  dataset.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (static_cast<std::uint64_t>(in.tellg()) != offsets[i]) {
      throw FormatError("dataset: episode index does not match layout");
    }
    SubsampledEpisode episode;
    episode.source_id = io::ReadLe<std::uint64_t>(in);
    episode.original_length = io::ReadLe<std::uint32_t>(in);
    const auto records = io::ReadLe<std::uint32_t>(in);
    if (records > (1U << 24)) throw FormatError("dataset: record count out of range");
    episode.records.reserve(records);
    for (std::uint32_t k = 0; k < records; ++k) {
      SubsampledRecord r;
      r.observation = ReadObservation(in);
      r.action = ReadAction(in);
      episode.records.push_back(std::move(r));
    }
    dataset.push_back(std::move(episode));
  }
  return dataset;
}

void SaveDataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigurationError("cannot write dataset " + path.string());
  WriteDataset(out, dataset);
  if (!out) throw ConfigurationError("failed writing dataset " + path.string());
}

Dataset LoadDataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open dataset " + path.string());
  return ReadDataset(in);
}

}  // namespace chaincraft::demo

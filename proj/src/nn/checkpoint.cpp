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

#include "chaincraft/nn/checkpoint.hpp"

#include <fstream>

#include "chaincraft/binary_io.hpp"
#include "chaincraft/errors.hpp"

namespace chaincraft::nn {

void WriteCheckpoint(std::ostream& out, const ParameterSet& params) {
  out.write(kCheckpointMagic, 4);
  io::WriteLe<std::uint32_t>(out, kCheckpointVersion);
  io::WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, param] : params) {
    io::WriteString(out, name);
    io::WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(param.value.rank()));
    for (std::size_t d : param.value.shape()) io::WriteLe<std::uint64_t>(out, d);
    for (double v : param.value.data()) io::WriteLe<double>(out, v);
  }
}

ParameterSet ReadCheckpoint(std::istream& in) {
  io::ExpectMagic(in, kCheckpointMagic, "checkpoint");
  const auto version = io::ReadLe<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = io::ReadLe<std::uint32_t>(in);
  ParameterSet params;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = io::ReadString(in, 4096);
    const auto rank = io::ReadLe<std::uint32_t>(in);
    if (rank > 8) throw FormatError("checkpoint: rank out of range for " + name);
    Shape shape(rank);
    std::size_t total = 1;
    for (auto& d : shape) {
      d = io::ReadLe<std::uint64_t>(in);
      if (d > (std::size_t{1} << 32)) throw FormatError("checkpoint: dimension too large");
      total *= d;
    }
    if (total > (std::size_t{1} << 30)) throw FormatError("checkpoint: tensor too large");
    std::vector<double> values(total);
    for (double& v : values) v = io::ReadLe<double>(in);
    try {
      params.Add(name, RealArray(std::move(shape), std::move(values)));
    } catch (const ConfigurationError& e) {
      throw FormatError(std::string("checkpoint: ") + e.what());
    }
  }
  return params;
}

void SaveCheckpoint(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigurationError("cannot write checkpoint " + path.string());
  WriteCheckpoint(out, params);
  if (!out) throw ConfigurationError("failed writing checkpoint " + path.string());
}

ParameterSet LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open checkpoint " + path.string());
  return ReadCheckpoint(in);
}

}  // namespace chaincraft::nn

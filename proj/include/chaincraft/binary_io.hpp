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

#ifndef CHAINCRAFT_BINARY_IO_HPP_
#define CHAINCRAFT_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "chaincraft/errors.hpp"

namespace chaincraft::io {

// Little-endian fixed-width encoding for the binary file formats.
template <typename T>
void WriteLe(std::ostream& out, T value) {
  static_assert(std::is_arithmetic_v<T>);
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
            std::conditional_t<sizeof(T) == 4, std::uint32_t,
            std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
  U bits;
  std::memcpy(&bits, &value, sizeof(T));
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T ReadLe(std::istream& in) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw FormatError("unexpected end of file");
  }
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
            std::conditional_t<sizeof(T) == 4, std::uint32_t,
            std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= U(U(bytes[i]) << (8 * i));
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

inline void WriteString(std::ostream& out, const std::string& s) {
  WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string ReadString(std::istream& in, std::size_t max_length = 1 << 20) {
  const auto length = ReadLe<std::uint32_t>(in);
  if (length > max_length) throw FormatError("string length out of range");
  std::string s(length, '\0');
  if (!in.read(s.data(), length)) throw FormatError("unexpected end of file");
  return s;
}

inline void ExpectMagic(std::istream& in, const char (&magic)[4], const char* what) {
  char got[4];
  if (!in.read(got, 4)) throw FormatError(std::string(what) + ": file too short");
  if (std::memcmp(got, magic, 4) != 0) {
    throw FormatError(std::string(what) + ": bad magic");
  }
}

}  // namespace chaincraft::io

#endif  // CHAINCRAFT_BINARY_IO_HPP_

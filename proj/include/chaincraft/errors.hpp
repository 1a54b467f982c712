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

#ifndef CHAINCRAFT_ERRORS_HPP_
#define CHAINCRAFT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace chaincraft {

// Invalid configuration, shape mismatch, incompatible checkpoint.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API called in a state where it is not allowed (step after done, backward
// without forward, out-of-range action index, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or truncated binary file, version mismatch.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite value reached a layer boundary.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Demonstration generation exhausted its retry budget.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested resource is temporarily unavailable (e.g. sampling an empty
// replay buffer). Callers are expected to fall back.
class UnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chaincraft

#endif  // CHAINCRAFT_ERRORS_HPP_

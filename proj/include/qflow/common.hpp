// Copyright 2026 The qflow Authors
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

#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qflow {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Raised when an operation's inputs violate its contract (bad indices,
/// mismatched sizes, non-unitary data).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed user configuration (CLI flags, config/model files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline bool is_power_of_two(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline int log2_exact(std::uint64_t v) {
  if (!is_power_of_two(v)) throw Error("length " + std::to_string(v) + " is not a power of two");
  int n = 0;
  while ((std::uint64_t{1} << n) != v) ++n;
  return n;
}

}  // namespace qflow

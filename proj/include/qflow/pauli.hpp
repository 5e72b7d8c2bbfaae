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

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "qflow/common.hpp"

namespace qflow {

/// A weighted tensor product of single-qubit Paulis.
///
/// Letters are stored as text, one per qubit, with qubit 0 first. Qubit 0 is
/// the most significant bit of a basis index, so letter `q` acts on bit
/// `n - 1 - q`.
class PauliString {
 public:
  PauliString() = default;

  explicit PauliString(std::string letters, double coefficient = 1.0)
      : letters_(std::move(letters)), coefficient_(coefficient) {
    for (char c : letters_) {
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
        throw Error(std::string("invalid Pauli letter '") + c + "'");
      }
    }
    if (letters_.size() > 63) throw Error("Pauli strings are limited to 63 qubits");
  }

  /// Builds a string from symplectic masks: bit b of `x_mask` set means X or Y
  /// on bit b, bit b of `z_mask` set means Z or Y.
  static PauliString from_masks(int num_qubits, std::uint64_t x_mask, std::uint64_t z_mask,
                                double coefficient = 1.0) {
    std::string s(static_cast<std::size_t>(num_qubits), 'I');
    for (int q = 0; q < num_qubits; ++q) {
      const int bit = num_qubits - 1 - q;
      const bool x = (x_mask >> bit) & 1U;
      const bool z = (z_mask >> bit) & 1U;
      s[static_cast<std::size_t>(q)] = x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
    }
    return PauliString(std::move(s), coefficient);
  }

  int num_qubits() const { return static_cast<int>(letters_.size()); }
  const std::string& letters() const { return letters_; }
  char operator[](int q) const { return letters_[static_cast<std::size_t>(q)]; }
  double coefficient() const { return coefficient_; }
  void set_coefficient(double c) { coefficient_ = c; }

  std::uint64_t x_mask() const { return mask_of('X', 'Y'); }
  std::uint64_t z_mask() const { return mask_of('Z', 'Y'); }
  /// Bits carrying any non-identity letter.
  std::uint64_t support_mask() const { return x_mask() | z_mask(); }
  int num_y() const { return std::popcount(x_mask() & z_mask()); }
  int weight() const { return std::popcount(support_mask()); }

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.letters_ == b.letters_ && a.coefficient_ == b.coefficient_;
  }

 private:
  std::uint64_t mask_of(char a, char b) const {
    std::uint64_t m = 0;
    const int n = num_qubits();
    for (int q = 0; q < n; ++q) {
      const char c = letters_[static_cast<std::size_t>(q)];
      if (c == a || c == b) m |= std::uint64_t{1} << (n - 1 - q);
    }
    return m;
  }

  std::string letters_;
  double coefficient_ = 1.0;
};

}  // namespace qflow

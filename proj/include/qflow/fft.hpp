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

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "qflow/common.hpp"

namespace qflow {

/// In-place radix-2 FFT, X_k = sum_j x_j e^{sign 2 pi i jk / N}; unnormalized.
inline void fft_inplace(std::span<cplx> data, int sign) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw Error("fft: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles from polar() each time; recurrences lose ~1e-13 at N=1024.
        const cplx w = std::polar(1.0, ang * static_cast<double>(k));
        const cplx u = data[i + k], v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
}

/// 2D transform of a field stored as index k + nx * l (k fastest).
inline void fft2d_inplace(std::span<cplx> data, std::size_t nx, std::size_t ny, int sign) {
  if (data.size() != nx * ny) throw Error("fft2d: size mismatch");
  for (std::size_t l = 0; l < ny; ++l) fft_inplace(data.subspan(l * nx, nx), sign);
  std::vector<cplx> column(ny);
  for (std::size_t k = 0; k < nx; ++k) {
    for (std::size_t l = 0; l < ny; ++l) column[l] = data[k + nx * l];
    fft_inplace(column, sign);
    for (std::size_t l = 0; l < ny; ++l) data[k + nx * l] = column[l];
  }
}

}  // namespace qflow

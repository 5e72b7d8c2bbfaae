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

/**
 * @file oracle.hpp
 * @brief Spectral evolution of the free Schrodinger equation on the grid.
 *
 * On the periodic grid the DFT solution is exact, so this is the reference
 * the circuits are compared against.
 */
#pragma once

#include <string>
#include <vector>

#include "qflow/circuits.hpp"
#include "qflow/fft.hpp"
#include "qflow/hydro.hpp"

namespace qflow {

/// Wavenumbers and phase table for one grid and time.
struct SpectralPlan {
  Grid2D grid;
  std::vector<std::int64_t> kx, ky;
  std::vector<cplx> phase;  // e^{-i (kx^2 + ky^2) t / 2} at k + Nx l

  SpectralPlan(const Grid2D& g, double t)
      : grid(g), kx(wavenumber_diagonal(g.nx)), ky(wavenumber_diagonal(g.ny)), phase(g.size()) {
    for (std::size_t l = 0; l < g.Ny(); ++l) {
      for (std::size_t k = 0; k < g.Nx(); ++k) {
        const double k2 = static_cast<double>(kx[k] * kx[k] + ky[l] * ky[l]);
        phase[g.index(k, l)] = std::polar(1.0, -0.5 * k2 * t);
      }
    }
  }

  void apply(std::vector<cplx>& psi) const {
    if (psi.size() != grid.size()) throw Error("spectral_evolve: component size does not match grid");
    fft2d_inplace(psi, grid.Nx(), grid.Ny(), -1);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= phase[i] * scale;
    fft2d_inplace(psi, grid.Nx(), grid.Ny(), +1);
  }
};

inline WaveField spectral_evolve(const WaveField& field, double t) {
  const SpectralPlan plan(field.grid, t);
  WaveField out = field;
  for (auto& c : out.components) plan.apply(c);
  return out;
}

enum class FlowKind { Diverging, Vortex };

inline std::string to_string(FlowKind f) { return f == FlowKind::Diverging ? "diverging" : "vortex"; }

inline FlowKind flow_kind_from_string(const std::string& s) {
  if (s == "diverging") return FlowKind::Diverging;
  if (s == "vortex") return FlowKind::Vortex;
  throw ConfigError("unknown flow '" + s + "'");
}

struct FlowParams {
  double width = 1.0;  // diverging flow layer width
  double r0 = 3.0;     // vortex decay radius
  VortexVariant variant = VortexVariant::FullCore;
};

inline WaveField initial_field(FlowKind flow, const Grid2D& grid, const FlowParams& p = {}) {
  return flow == FlowKind::Diverging ? init_diverging(grid, p.width) : init_vortex(grid, p.r0, p.variant);
}

/// Unit-norm flow fields of the spectrally evolved initial condition at each time.
inline std::vector<FlowFields> reference_run(FlowKind flow, const Grid2D& grid, const std::vector<double>& times,
                                             DiffScheme scheme = DiffScheme::PeriodicCentral,
                                             const FlowParams& params = {}) {
  const WaveField psi0 = normalized(initial_field(flow, grid, params));
  std::vector<FlowFields> out;
  for (double t : times) out.push_back(flow_fields(spectral_evolve(psi0, t), scheme));
  return out;
}

inline std::vector<FlowFields> reference_run(const std::string& flow, const Grid2D& grid,
                                             const std::vector<double>& times,
                                             DiffScheme scheme = DiffScheme::PeriodicCentral) {
  return reference_run(flow_kind_from_string(flow), grid, times, scheme);
}

}  // namespace qflow

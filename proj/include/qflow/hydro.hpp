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
 * @file hydro.hpp
 * @brief Hydrodynamic view of one- and two-component wave functions on a
 * periodic 2D grid (hbar = m = 1).
 *
 * A field value at grid point (k, l), k along x and l along y, is stored at
 * flat index k + N_x l, which is also its basis index once encoded.
 *
 * Flow quantities:
 *   rho   = sum_c |psi_c|^2
 *   J     = (i/2) sum_c (psi_c grad psi_c* - psi_c* grad psi_c)
 *   u     = J / rho
 *   omega = d u_y / dx - d u_x / dy
 *   s     = (|psi+|^2 - |psi-|^2, i(psi+* psi- - psi+ psi-*), psi+* psi- + psi+ psi-*)
 *   zeta  = -(1/4) div(grad s / rho)
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "qflow/statevector.hpp"

namespace qflow {

using RealField = std::vector<double>;

struct Grid2D {
  int nx = 5;
  int ny = 5;

  Grid2D() = default;
  Grid2D(int qubits_x, int qubits_y) : nx(qubits_x), ny(qubits_y) {
    if (nx < 1 || ny < 1 || nx + ny > 24) throw Error("grid: qubit counts out of range");
  }

  std::size_t Nx() const { return std::size_t{1} << nx; }
  std::size_t Ny() const { return std::size_t{1} << ny; }
  std::size_t size() const { return Nx() * Ny(); }
  int num_qubits() const { return nx + ny; }
  double dx() const { return 2.0 * kPi / static_cast<double>(Nx()); }
  double dy() const { return 2.0 * kPi / static_cast<double>(Ny()); }
  double x(std::size_t k) const { return -kPi + static_cast<double>(k) * dx(); }
  double y(std::size_t l) const { return -kPi + static_cast<double>(l) * dy(); }
  std::size_t index(std::size_t k, std::size_t l) const { return k + Nx() * l; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// Finite-difference treatment of derivatives. PeriodicCentral wraps around
/// the domain; OneSidedBoundary uses central differences inside and forward
/// (backward) differences on the first (last) grid line.
enum class DiffScheme { PeriodicCentral, OneSidedBoundary };

inline std::string to_string(DiffScheme s) {
  return s == DiffScheme::PeriodicCentral ? "periodic-central" : "one-sided-at-boundary";
}

inline DiffScheme diff_scheme_from_string(const std::string& s) {
  if (s == "periodic-central" || s == "periodic") return DiffScheme::PeriodicCentral;
  if (s == "one-sided-at-boundary" || s == "one-sided") return DiffScheme::OneSidedBoundary;
  throw Error("unknown difference scheme '" + s + "'");
}

enum class Axis { X, Y };

/// One or two complex components on a grid. `norms` holds each component's
/// L2 norm as recorded by encode().
struct WaveField {
  Grid2D grid;
  std::vector<std::vector<cplx>> components;
  std::vector<double> norms;

  std::size_t num_components() const { return components.size(); }

  double total_norm() const {
    double s = 0.0;
    for (const auto& c : components)
      for (const cplx& v : c) s += std::norm(v);
    return std::sqrt(s);
  }
};

/// psi / ||psi||, with the norm over all components together.
inline WaveField normalized(const WaveField& f) {
  const double n = f.total_norm();
  if (!(n > 0.0)) throw Error("cannot normalize a zero field");
  WaveField out = f;
  for (auto& c : out.components)
    for (cplx& v : c) v /= n;
  return out;
}

// ---------------------------------------------------------------------------
// Initial conditions

/// psi = exp(-y^2 / (2 width^2) + i x): uniform flow along x with a Gaussian
/// density layer around y = 0. Unnormalized.
inline WaveField init_diverging(const Grid2D& grid, double width = 1.0) {
  if (!(width > 0.0)) throw Error("init_diverging: width must be positive");
  WaveField f{grid, {std::vector<cplx>(grid.size())}, {}};
  for (std::size_t l = 0; l < grid.Ny(); ++l) {
    const double y = grid.y(l);
    for (std::size_t k = 0; k < grid.Nx(); ++k)
      f.components[0][grid.index(k, l)] = std::polar(std::exp(-y * y / (2 * width * width)), grid.x(k));
  }
  return f;
}

/// Which form of the rational-map denominator to use in init_vortex:
/// v = i (r^2 + 1 - c f) / (1 + r^2) with c = 2 (FullCore) or c = 1 (NullCore, which vanishes at the origin).
enum class VortexVariant { FullCore, NullCore };

/// Two-component vortex centred at the origin: with f = exp(-(r/r0)^4),
/// u = 2 (x + i y) f / (1 + r^2), v as above, psi+ = u / sqrt(|u|^2 + |v|^4),
/// psi- = v^2 / sqrt(|u|^2 + |v|^4). Unnormalized.
inline WaveField init_vortex(const Grid2D& grid, double r0 = 3.0, VortexVariant variant = VortexVariant::FullCore) {
  if (!(r0 > 0.0)) throw Error("init_vortex: r0 must be positive");
  const double c = variant == VortexVariant::FullCore ? 2.0 : 1.0;
  WaveField w{grid, {std::vector<cplx>(grid.size()), std::vector<cplx>(grid.size())}, {}};
  for (std::size_t l = 0; l < grid.Ny(); ++l) {
    for (std::size_t k = 0; k < grid.Nx(); ++k) {
      const double x = grid.x(k), y = grid.y(l);
      const double r2 = x * x + y * y;
      const double f = std::exp(-(r2 * r2) / std::pow(r0, 4));
      const cplx u = 2.0 * cplx(x, y) * f / (1.0 + r2);
      const cplx v = cplx(0.0, (r2 + 1.0 - c * f) / (1.0 + r2));
      const double denom = std::sqrt(std::norm(u) + std::norm(v) * std::norm(v));
      // NullCore has u = v = 0 at the origin; leave a density null there.
      if (denom == 0.0) continue;
      w.components[0][grid.index(k, l)] = u / denom;
      w.components[1][grid.index(k, l)] = v * v / denom;
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Encoding

/// One unit-norm state per component plus the component norms.
struct EncodedField {
  std::vector<QuantumState> states;
  std::vector<double> norms;

  /// Share of the total mass in each component, ||psi_c||^2 / ||psi||^2.
  std::vector<double> weights() const {
    double total = 0.0;
    for (double n : norms) total += n * n;
    std::vector<double> w;
    for (double n : norms) w.push_back(n * n / total);
    return w;
  }
};

inline EncodedField encode(const WaveField& field) {
  EncodedField out;
  const int n = field.grid.num_qubits();
  for (const auto& comp : field.components) {
    if (comp.size() != field.grid.size()) throw Error("encode: component size does not match grid");
    double nrm2 = 0.0;
    for (const cplx& v : comp) nrm2 += std::norm(v);
    if (!(nrm2 > 0.0)) throw Error("encode: zero field component");
    const double nrm = std::sqrt(nrm2);
    std::vector<cplx> amps(comp.size());
    for (std::size_t i = 0; i < comp.size(); ++i) amps[i] = comp[i] / nrm;
    QuantumState s = QuantumState::from_amplitudes(std::move(amps), true);
    if (s.num_qubits() != n) throw Error("encode: qubit count mismatch");
    out.states.push_back(std::move(s));
    out.norms.push_back(nrm);
  }
  if (out.states.empty()) throw Error("encode: field has no components");
  return out;
}

/// Inverse of encode for a single component: psi = norm * amplitudes.
inline WaveField decode(const QuantumState& state, const Grid2D& grid, double norm) {
  if (state.dimension() != grid.size()) throw Error("decode: state dimension does not match grid");
  WaveField f{grid, {std::vector<cplx>(grid.size())}, {norm}};
  for (std::size_t i = 0; i < grid.size(); ++i) f.components[0][i] = state[i] * norm;
  return f;
}

inline WaveField decode(const EncodedField& enc, const Grid2D& grid) {
  WaveField f{grid, {}, enc.norms};
  for (std::size_t c = 0; c < enc.states.size(); ++c)
    f.components.push_back(decode(enc.states[c], grid, enc.norms[c]).components[0]);
  return f;
}

// ---------------------------------------------------------------------------
// Differences

/// Derivative of a grid field along `axis`.
template <typename T>
std::vector<T> derivative(const std::vector<T>& f, const Grid2D& grid, Axis axis, DiffScheme scheme) {
  if (f.size() != grid.size()) throw Error("derivative: field size does not match grid");
  const std::size_t nx = grid.Nx(), ny = grid.Ny();
  const bool along_x = axis == Axis::X;
  const std::size_t n = along_x ? nx : ny;
  const double h = along_x ? grid.dx() : grid.dy();
  std::vector<T> d(f.size());
  auto at = [&](std::size_t line, std::size_t i) -> const T& {
    return along_x ? f[grid.index(i, line)] : f[grid.index(line, i)];
  };
  const std::size_t lines = along_x ? ny : nx;
  for (std::size_t line = 0; line < lines; ++line) {
    for (std::size_t i = 0; i < n; ++i) {
      T v;
      if (scheme == DiffScheme::OneSidedBoundary && i == 0) {
        v = (at(line, 1 % n) - at(line, 0)) / h;
      } else if (scheme == DiffScheme::OneSidedBoundary && i == n - 1) {
        v = (at(line, n - 1) - at(line, (n + n - 2) % n)) / h;
      } else {
        v = (at(line, (i + 1) % n) - at(line, (i + n - 1) % n)) / (2.0 * h);
      }
      (along_x ? d[grid.index(i, line)] : d[grid.index(line, i)]) = v;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Flow fields

inline RealField density(const WaveField& field) {
  RealField rho(field.grid.size(), 0.0);
  for (const auto& c : field.components)
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] += std::norm(c[i]);
  return rho;
}

struct VectorField {
  RealField x, y;
};

/// Momentum density J = (i/2) sum_c (psi grad psi* - psi* grad psi).
inline VectorField momentum_fd(const WaveField& field, DiffScheme scheme = DiffScheme::PeriodicCentral) {
  const Grid2D& g = field.grid;
  VectorField j{RealField(g.size(), 0.0), RealField(g.size(), 0.0)};
  const cplx half_i(0.0, 0.5);
  for (const auto& psi : field.components) {
    const auto dx = derivative(psi, g, Axis::X, scheme);
    const auto dy = derivative(psi, g, Axis::Y, scheme);
    for (std::size_t i = 0; i < g.size(); ++i) {
      j.x[i] += (half_i * (psi[i] * std::conj(dx[i]) - std::conj(psi[i]) * dx[i])).real();
      j.y[i] += (half_i * (psi[i] * std::conj(dy[i]) - std::conj(psi[i]) * dy[i])).real();
    }
  }
  return j;
}

/// Velocities below this fraction of the peak density are not defined.
inline constexpr double kVelocityFloor = 1e-6;

struct FlowFields {
  Grid2D grid;
  RealField rho, jx, jy, ux, uy, omega;
  /// 1 where rho >= kVelocityFloor * max(rho) and u = J / rho, 0 where u was set to 0.
  std::vector<std::uint8_t> velocity_mask;
};

/// Vorticity of a velocity field with periodic central differences.
inline RealField vorticity(const RealField& ux, const RealField& uy, const Grid2D& grid) {
  const RealField duy_dx = derivative(uy, grid, Axis::X, DiffScheme::PeriodicCentral);
  const RealField dux_dy = derivative(ux, grid, Axis::Y, DiffScheme::PeriodicCentral);
  RealField w(grid.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = duy_dx[i] - dux_dy[i];
  return w;
}

/// Completes u and omega from rho and J.
inline FlowFields assemble_flow(const Grid2D& grid, RealField rho, RealField jx, RealField jy) {
  if (rho.size() != grid.size() || jx.size() != grid.size() || jy.size() != grid.size())
    throw Error("assemble_flow: field size does not match grid");
  FlowFields f;
  f.grid = grid;
  const double peak = *std::max_element(rho.begin(), rho.end());
  const double floor = kVelocityFloor * peak;
  f.ux.assign(grid.size(), 0.0);
  f.uy.assign(grid.size(), 0.0);
  f.velocity_mask.assign(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (rho[i] > 0.0 && rho[i] >= floor) {
      f.ux[i] = jx[i] / rho[i];
      f.uy[i] = jy[i] / rho[i];
      f.velocity_mask[i] = 1;
    }
  }
  f.omega = vorticity(f.ux, f.uy, grid);
  f.rho = std::move(rho);
  f.jx = std::move(jx);
  f.jy = std::move(jy);
  return f;
}

/// Flow fields of `field` as given (no normalization applied).
inline FlowFields flow_fields(const WaveField& field, DiffScheme scheme = DiffScheme::PeriodicCentral) {
  VectorField j = momentum_fd(field, scheme);
  return assemble_flow(field.grid, density(field), std::move(j.x), std::move(j.y));
}

inline double mass(const RealField& rho, const Grid2D& grid) {
  double s = 0.0;
  for (double r : rho) s += r;
  return s * grid.dx() * grid.dy();
}

// ---------------------------------------------------------------------------
// Spin diagnostics

struct SpinDiagnostics {
  std::array<RealField, 3> s;
  std::array<RealField, 3> zeta;
  RealField pressure;             // zeta . s
  RealField effective_potential;  // -|grad s|^2 / (8 rho^2), V = 0
  RealField fx, fy;               // (grad s . zeta) / rho
};

inline SpinDiagnostics spin_diagnostics(const WaveField& field, DiffScheme scheme = DiffScheme::PeriodicCentral) {
  if (field.num_components() != 2) throw Error("spin_diagnostics: needs a two-component field");
  const Grid2D& g = field.grid;
  const auto& up = field.components[0];
  const auto& dn = field.components[1];
  const std::size_t n = g.size();
  SpinDiagnostics d;
  for (auto& a : d.s) a.assign(n, 0.0);
  const RealField rho = density(field);
  const double floor = kVelocityFloor * *std::max_element(rho.begin(), rho.end());
  for (std::size_t i = 0; i < n; ++i) {
    const cplx cross = std::conj(up[i]) * dn[i];
    d.s[0][i] = std::norm(up[i]) - std::norm(dn[i]);
    d.s[1][i] = (cplx(0, 1) * (cross - std::conj(cross))).real();
    d.s[2][i] = 2.0 * cross.real();
  }
  std::array<RealField, 3> gx, gy;
  for (int a = 0; a < 3; ++a) {
    gx[a] = derivative(d.s[a], g, Axis::X, scheme);
    gy[a] = derivative(d.s[a], g, Axis::Y, scheme);
    RealField fx(n, 0.0), fy(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (rho[i] >= floor && rho[i] > 0.0) {
        fx[i] = gx[a][i] / rho[i];
        fy[i] = gy[a][i] / rho[i];
      }
    }
    const RealField div_x = derivative(fx, g, Axis::X, scheme);
    const RealField div_y = derivative(fy, g, Axis::Y, scheme);
    d.zeta[a].assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d.zeta[a][i] = -0.25 * (div_x[i] + div_y[i]);
  }
  d.pressure.assign(n, 0.0);
  d.effective_potential.assign(n, 0.0);
  d.fx.assign(n, 0.0);
  d.fy.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double grad2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      d.pressure[i] += d.zeta[a][i] * d.s[a][i];
      grad2 += gx[a][i] * gx[a][i] + gy[a][i] * gy[a][i];
    }
    if (rho[i] >= floor && rho[i] > 0.0) {
      d.effective_potential[i] = -grad2 / (8.0 * rho[i] * rho[i]);
      for (int a = 0; a < 3; ++a) {
        d.fx[i] += gx[a][i] * d.zeta[a][i] / rho[i];
        d.fy[i] += gy[a][i] * d.zeta[a][i] / rho[i];
      }
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Profiles and integrals

struct FlowProfiles {
  RealField y;  // y_l for the x-averaged profiles
  RealField rho_x_avg, jx_x_avg, jy_x_avg;
  RealField radius;  // bin centres (i + 1/2) dx
  RealField omega_theta_avg;
  std::vector<std::size_t> bin_counts;
  double kinetic_energy = 0.0;
  double enstrophy = 0.0;
};

/// Mean over k at each fixed l.
inline RealField x_average(const RealField& f, const Grid2D& grid) {
  RealField out(grid.Ny(), 0.0);
  for (std::size_t l = 0; l < grid.Ny(); ++l) {
    for (std::size_t k = 0; k < grid.Nx(); ++k) out[l] += f[grid.index(k, l)];
    out[l] /= static_cast<double>(grid.Nx());
  }
  return out;
}

/// Azimuthal average about (0, 0) in rings [i dx, (i + 1) dx) for r < pi.
/// Empty rings are NaN.
inline RealField theta_average(const RealField& f, const Grid2D& grid, std::vector<std::size_t>* counts = nullptr) {
  const double dr = grid.dx();
  const std::size_t bins = grid.Nx() / 2;
  RealField sum(bins, 0.0);
  std::vector<std::size_t> cnt(bins, 0);
  for (std::size_t l = 0; l < grid.Ny(); ++l) {
    for (std::size_t k = 0; k < grid.Nx(); ++k) {
      const double r = std::hypot(grid.x(k), grid.y(l));
      const auto b = static_cast<std::size_t>(std::floor(r / dr + 1e-12));
      if (b >= bins) continue;
      sum[b] += f[grid.index(k, l)];
      ++cnt[b];
    }
  }
  for (std::size_t b = 0; b < bins; ++b) sum[b] = cnt[b] ? sum[b] / static_cast<double>(cnt[b]) : std::nan("");
  if (counts) *counts = cnt;
  return sum;
}

inline double kinetic_energy(const FlowFields& f) {
  double e = 0.0;
  for (std::size_t i = 0; i < f.rho.size(); ++i) e += 0.5 * f.rho[i] * (f.ux[i] * f.ux[i] + f.uy[i] * f.uy[i]);
  return e * f.grid.dx() * f.grid.dy();
}

inline double enstrophy(const FlowFields& f) {
  double e = 0.0;
  for (double w : f.omega) e += w * w;
  return e * f.grid.dx() * f.grid.dy();
}

inline FlowProfiles profiles_and_integrals(const FlowFields& f) {
  const Grid2D& g = f.grid;
  FlowProfiles p;
  for (std::size_t l = 0; l < g.Ny(); ++l) p.y.push_back(g.y(l));
  p.rho_x_avg = x_average(f.rho, g);
  p.jx_x_avg = x_average(f.jx, g);
  p.jy_x_avg = x_average(f.jy, g);
  p.omega_theta_avg = theta_average(f.omega, g, &p.bin_counts);
  for (std::size_t b = 0; b < p.omega_theta_avg.size(); ++b) p.radius.push_back((static_cast<double>(b) + 0.5) * g.dx());
  p.kinetic_energy = kinetic_energy(f);
  p.enstrophy = enstrophy(f);
  return p;
}

}  // namespace qflow

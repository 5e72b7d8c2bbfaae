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
 * @file circuits.hpp
 * @brief Circuit builders for free-particle evolution on a periodic grid:
 * QFT, the wavenumber-squared phase operator written with Rz and ZZ gates,
 * the full two-axis evolution, and exact amplitude-encoding state preparation.
 *
 * Register layout for a 2D grid with n_x + n_y qubits: basis index
 * k + 2^{n_x} l for grid point (k, l). With qubit 0 most significant, the y
 * register is qubits [0, n_y) and the x register is qubits [n_y, n_y + n_x).
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "qflow/statevector.hpp"

namespace qflow {

// ---------------------------------------------------------------------------
// QFT

/// QFT on n qubits with kernel e^{+2 pi i j k / 2^n} / sqrt(2^n), or its
/// adjoint. Hadamards are U3(pi/2, 0, pi) = -i H; the circuit's global phase
/// compensates so the matrix equals the DFT exactly.
inline Circuit build_qft(int n, bool inverse = false) {
  if (n < 1) throw Error("build_qft: need at least one qubit");
  Circuit c(n, "qft");
  for (int q = 0; q < n; ++q) {
    c.add(Gate::h(q));
    c.add_global_phase(kPi / 2);
    for (int m = q + 1; m < n; ++m) {
      c.add(Gate::cphase(m, q, 2.0 * kPi / std::ldexp(1.0, m - q + 1)));
    }
  }
  for (int q = 0; q < n / 2; ++q) c.add(Gate::swap(q, n - 1 - q));
  if (!inverse) return c;
  Circuit inv = c.inverse();
  inv.set_name("qft_dg");
  return inv;
}

// ---------------------------------------------------------------------------
// Wavenumber operator

/// Centered wavenumbers (0, 1, ..., 2^{n-1} - 1, -2^{n-1}, ..., -1).
inline std::vector<std::int64_t> wavenumber_diagonal(int n) {
  if (n < 1 || n > 30) throw Error("wavenumber_diagonal: n out of range");
  const std::int64_t size = std::int64_t{1} << n;
  std::vector<std::int64_t> k(static_cast<std::size_t>(size));
  for (std::int64_t j = 0; j < size; ++j) k[static_cast<std::size_t>(j)] = j < size / 2 ? j : j - size;
  return k;
}

/// c0 I + sum_j c_j Z_j, with z[j] the coefficient on qubit j (qubit 0 most
/// significant).
struct ZExpansion {
  double identity = 0.0;
  std::vector<double> z;

  int num_qubits() const { return static_cast<int>(z.size()); }

  /// Diagonal of the operator: entry i uses z_j = +1 when bit of qubit j in i
  /// is 0, -1 otherwise.
  std::vector<double> evaluate() const {
    const int n = num_qubits();
    std::vector<double> d(std::size_t{1} << n);
    for (std::size_t i = 0; i < d.size(); ++i) {
      double v = identity;
      for (int j = 0; j < n; ++j) v += ((i >> (n - 1 - j)) & 1U) ? -z[static_cast<std::size_t>(j)] : z[static_cast<std::size_t>(j)];
      d[i] = v;
    }
    return d;
  }
};

/// diag(0, 1, ..., 2^n - 1) = ((2^n - 1) I - sum_j 2^{n-1-j} Z_j) / 2.
inline ZExpansion counting_operator(int n) {
  if (n < 1) throw Error("counting_operator: n must be positive");
  ZExpansion e;
  e.identity = (std::ldexp(1.0, n) - 1.0) / 2.0;
  e.z.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) e.z[static_cast<std::size_t>(j)] = -std::ldexp(1.0, n - 1 - j) / 2.0;
  return e;
}

/// Z expansion of the centered wavenumber operator: the counting operator
/// shifted by -2^n on the upper half, i.e. -(1/2)(I + sum_j 2^{n-1-j} Z_j)
/// + 2^{n-1} Z_0. All coefficients are dyadic, so evaluate() is exact.
inline ZExpansion decompose_wavenumber(int n) {
  if (n < 1) throw Error("decompose_wavenumber: n must be positive");
  ZExpansion e;
  e.identity = -0.5;
  e.z.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) e.z[static_cast<std::size_t>(j)] = -std::ldexp(1.0, n - 1 - j) / 2.0;
  e.z[0] += std::ldexp(1.0, n - 1);
  return e;
}

/// exp(-i k^2 t / 2) on an n-qubit wavenumber register, realized with one Rz
/// per qubit and one ZZ per qubit pair. The constant part of k^2 is recorded
/// as dropped phase.
inline Circuit build_phase_evolution(int n, double t) {
  const ZExpansion k = decompose_wavenumber(n);
  Circuit c(n, "phase");
  // k^2 = (c0 + sum c_j Z_j)^2 = c0^2 + sum c_j^2 + 2 c0 sum c_j Z_j + 2 sum_{i<j} c_i c_j Z_i Z_j
  double constant = k.identity * k.identity;
  for (double cj : k.z) constant += cj * cj;
  c.add_dropped_phase(-t * constant / 2.0);
  // exp(-i (t/2) a Z) = Rz(t a)
  for (int j = 0; j < n; ++j) c.add(Gate::rz(j, t * 2.0 * k.identity * k.z[static_cast<std::size_t>(j)]));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      c.add(Gate::zz(i, j, t * 2.0 * k.z[static_cast<std::size_t>(i)] * k.z[static_cast<std::size_t>(j)]));
  return c;
}

/// QFT^dg . exp(-i k^2 t / 2) . QFT on one axis register.
inline Circuit build_axis_evolution(int n, double t) {
  Circuit c(n, "axis_evolution");
  c.append(build_qft(n, false));
  c.append(build_phase_evolution(n, t));
  c.append(build_qft(n, true));
  return c;
}

/// Free evolution of a 2D grid state for time t without time stepping. The
/// result equals the spectral evolution up to the recorded dropped phase.
inline Circuit build_evolution(int n_x, int n_y, double t) {
  if (n_x < 1 || n_y < 1) throw Error("build_evolution: both axes need at least one qubit");
  const int n = n_x + n_y;
  Circuit c(n, "evolution");
  std::vector<int> x_map(static_cast<std::size_t>(n_x)), y_map(static_cast<std::size_t>(n_y));
  std::iota(y_map.begin(), y_map.end(), 0);
  std::iota(x_map.begin(), x_map.end(), n_y);
  c.append(build_axis_evolution(n_x, t), x_map);
  c.append(build_axis_evolution(n_y, t), y_map);
  return c;
}

// ---------------------------------------------------------------------------
// Amplitude encoding

namespace detail {

inline std::uint64_t gray(std::uint64_t i) { return i ^ (i >> 1); }

/// Uniformly controlled Ry or Rz: for control value p (controls[0] most
/// significant) the target sees R(angles[p]). Emitted as alternating
/// rotations and CNOTs along a Gray code, 2^k of each.
inline void add_multiplexed_rotation(Circuit& c, GateKind kind, const std::vector<int>& controls, int target,
                                     const std::vector<double>& angles, double eps = 1e-15) {
  const std::size_t k = controls.size();
  const std::size_t count = std::size_t{1} << k;
  auto rot = [&](double a) { return kind == GateKind::Ry ? Gate::ry(target, a) : Gate::rz(target, a); };
  if (k == 0) {
    if (std::abs(angles[0]) > eps) c.add(rot(angles[0]));
    return;
  }
  // theta_p = sum_i (-1)^{p . gray(i)} alpha_i, inverted with the Walsh transform.
  std::vector<double> alpha(count, 0.0);
  bool any = false;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t g = gray(i);
    double s = 0.0;
    for (std::size_t p = 0; p < count; ++p) s += (std::popcount(p & g) & 1) ? -angles[p] : angles[p];
    alpha[i] = s / static_cast<double>(count);
    any = any || std::abs(alpha[i]) > eps;
  }
  if (!any) return;
  for (std::size_t i = 0; i < count; ++i) {
    if (std::abs(alpha[i]) > eps) c.add(rot(alpha[i]));
    const std::uint64_t changed = gray(i) ^ gray((i + 1) % count);
    const int bit = std::countr_zero(changed);
    c.add(Gate::cnot(controls[k - 1 - static_cast<std::size_t>(bit)], target));
  }
}

}  // namespace detail

/// Circuit over {Ry, Rz, CNOT} mapping |0...0> exactly onto `target`
/// (including its global phase, carried in the circuit's global_phase).
///
/// Magnitudes are set qubit by qubit with multiplexed Ry rotations; the
/// remaining phases form a diagonal that is peeled into multiplexed Rz
/// rotations from the least significant qubit upward.
inline Circuit amplitude_encode(const QuantumState& target) {
  const int n = target.num_qubits();
  const std::size_t dim = target.dimension();
  const double nrm2 = target.norm_squared();
  if (!(nrm2 > 0.0)) throw Error("amplitude_encode: zero-norm target");
  const double scale = 1.0 / std::sqrt(nrm2);

  Circuit c(n, "amplitude_encode");
  std::vector<double> mag2(dim), phase(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const cplx a = target[i] * scale;
    mag2[i] = std::norm(a);
    phase[i] = std::abs(a) > 0.0 ? std::arg(a) : 0.0;
  }

  // block_norm2[p] for prefixes of the first k qubits; start with full indices.
  std::vector<double> block = mag2;
  std::vector<std::vector<double>> levels(static_cast<std::size_t>(n) + 1);
  levels[static_cast<std::size_t>(n)] = block;
  for (int k = n - 1; k >= 0; --k) {
    std::vector<double> coarse(std::size_t{1} << k);
    for (std::size_t p = 0; p < coarse.size(); ++p) coarse[p] = block[2 * p] + block[2 * p + 1];
    levels[static_cast<std::size_t>(k)] = coarse;
    block = std::move(coarse);
  }

  std::vector<int> controls;
  for (int k = 0; k < n; ++k) {
    const auto& fine = levels[static_cast<std::size_t>(k) + 1];
    std::vector<double> angles(std::size_t{1} << k);
    for (std::size_t p = 0; p < angles.size(); ++p) {
      angles[p] = 2.0 * std::atan2(std::sqrt(fine[2 * p + 1]), std::sqrt(fine[2 * p]));
    }
    detail::add_multiplexed_rotation(c, GateKind::Ry, controls, k, angles);
    controls.push_back(k);
  }

  // diag(e^{i phase}) = e^{i g} prod_k UCRz_k; pair (p0, p1) -> Rz(phi1 - phi0) and mean phase.
  std::vector<double> phi = phase;
  for (int k = n - 1; k >= 0; --k) {
    std::vector<double> angles(std::size_t{1} << k), mean(std::size_t{1} << k);
    for (std::size_t p = 0; p < angles.size(); ++p) {
      angles[p] = phi[2 * p + 1] - phi[2 * p];
      mean[p] = 0.5 * (phi[2 * p] + phi[2 * p + 1]);
    }
    controls.pop_back();
    detail::add_multiplexed_rotation(c, GateKind::Rz, controls, k, angles);
    phi = std::move(mean);
  }
  c.add_global_phase(phi[0]);
  return c;
}

}  // namespace qflow

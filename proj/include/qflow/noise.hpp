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
 * @file noise.hpp
 * @brief Coherent single-qubit error injection and artifact metrics.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qflow/fft.hpp"
#include "qflow/hydro.hpp"
#include "qflow/statevector.hpp"

namespace qflow {

enum class ErrorMode { Fixed, Random };

inline std::string to_string(ErrorMode m) { return m == ErrorMode::Fixed ? "fixed" : "random"; }

inline ErrorMode error_mode_from_string(const std::string& s) {
  if (s == "fixed" || s == "fixed-single-qubit") return ErrorMode::Fixed;
  if (s == "random" || s == "random-all-qubits") return ErrorMode::Random;
  throw ConfigError("unknown error mode '" + s + "'");
}

/// A coherent error appended after single-qubit gates.
///
/// Fixed mode appends `gate_kind(params)` after every single-qubit gate on a
/// qubit in `targets`. Random mode appends U3(a1, a2, a3) with each angle
/// uniform on [-amplitude, amplitude], drawn in insertion order from
/// Rng(seed); an empty target list means every qubit.
struct ErrorModel {
  ErrorMode mode = ErrorMode::Fixed;
  std::vector<int> targets;
  GateKind gate_kind = GateKind::Rx;
  std::vector<double> params{0.025};
  double amplitude = 0.045;
  std::uint64_t seed = 0;

  static ErrorModel fixed(std::vector<int> qubits, GateKind kind = GateKind::Rx, std::vector<double> p = {0.025}) {
    ErrorModel m;
    m.mode = ErrorMode::Fixed;
    m.targets = std::move(qubits);
    m.gate_kind = kind;
    m.params = std::move(p);
    return m;
  }

  static ErrorModel random(double a, std::uint64_t seed, std::vector<int> qubits = {}) {
    ErrorModel m;
    m.mode = ErrorMode::Random;
    m.amplitude = a;
    m.seed = seed;
    m.targets = std::move(qubits);
    return m;
  }

  /// A fixed model without targets is allowed only where a caller assigns
  /// them later (noise sweeps).
  void validate(bool require_targets = true) const {
    if (mode == ErrorMode::Fixed) {
      if (require_targets && targets.empty()) throw ConfigError("error model: fixed mode needs at least one target qubit");
      if (fixed_arity(gate_kind) != 1 || gate_kind == GateKind::DiagonalPhase)
        throw ConfigError("error model: error gate must be a single-qubit rotation");
      if (static_cast<int>(params.size()) != param_count(gate_kind))
        throw ConfigError("error model: wrong number of gate parameters");
      for (double p : params)
        if (!std::isfinite(p)) throw ConfigError("error model: non-finite angle");
    } else if (!std::isfinite(amplitude) || amplitude < 0.0) {
      throw ConfigError("error model: amplitude must be finite and non-negative");
    }
    for (int q : targets)
      if (q < 0) throw ConfigError("error model: negative target qubit");
  }

  bool targets_qubit(int q) const {
    if (mode == ErrorMode::Random && targets.empty()) return true;
    return std::find(targets.begin(), targets.end(), q) != targets.end();
  }
};

/// Copy of `circuit` with an error gate after every single-qubit gate on a
/// targeted qubit. Multi-qubit gates are left alone.
inline Circuit inject(const Circuit& circuit, const ErrorModel& model) {
  model.validate();
  for (int q : model.targets)
    if (q >= circuit.num_qubits()) throw ConfigError("error model: target qubit outside the register");
  Rng rng(model.seed);
  Circuit out(circuit.num_qubits(), circuit.name());
  out.add_global_phase(circuit.global_phase());
  out.add_dropped_phase(circuit.dropped_phase());
  for (const Gate& g : circuit.gates()) {
    out.add(g);
    if (g.targets.size() != 1 || !model.targets_qubit(g.targets[0])) continue;
    const int q = g.targets[0];
    if (model.mode == ErrorMode::Fixed) {
      out.add(Gate{model.gate_kind, {q}, model.params, {}});
    } else {
      const double a = model.amplitude;
      const double th = rng.uniform(-a, a), ph = rng.uniform(-a, a), la = rng.uniform(-a, a);
      out.add(Gate::u3(q, th, ph, la));
    }
  }
  return out;
}

inline std::size_t count_single_qubit_gates(const Circuit& c, const ErrorModel& model) {
  std::size_t n = 0;
  for (const Gate& g : c.gates())
    if (g.targets.size() == 1 && model.targets_qubit(g.targets[0])) ++n;
  return n;
}

struct ErrorRate {
  double average_infidelity = 0.0;  // 1 - (|Tr E|^2 / 2 + 1) / 3
  double process_infidelity = 0.0;  // 1 - |Tr E|^2 / 4
};

inline ErrorRate equivalent_error_rate(const DenseMatrix& e) {
  if (e.dim != 2) throw Error("equivalent_error_rate: expects a single-qubit matrix");
  if (!is_unitary(e, 1e-10)) throw Error("equivalent_error_rate: matrix is not unitary");
  const double tr2 = std::norm(e(0, 0) + e(1, 1));
  return {1.0 - (tr2 / 2.0 + 1.0) / 3.0, 1.0 - tr2 / 4.0};
}

inline ErrorRate equivalent_error_rate(const Gate& g) { return equivalent_error_rate(g.matrix()); }

/// Dominant spatial frequency of a field's profile along one axis.
struct StripeSpectrum {
  int frequency = 0;         // cycles per domain length, 1..N/2
  double power_fraction = 0;  // share of non-DC power in that frequency
  std::vector<double> power;  // folded power, index = frequency
};

/// Averages the field over the other axis, takes the DFT of the resulting
/// profile, and folds +f and -f together.
inline StripeSpectrum stripe_spectrum(const RealField& field, const Grid2D& grid, Axis axis) {
  if (field.size() != grid.size()) throw Error("stripe_spectrum: field size does not match grid");
  const std::size_t n = axis == Axis::X ? grid.Nx() : grid.Ny();
  const std::size_t other = axis == Axis::X ? grid.Ny() : grid.Nx();
  std::vector<cplx> profile(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < other; ++j) s += axis == Axis::X ? field[grid.index(i, j)] : field[grid.index(j, i)];
    profile[i] = s / static_cast<double>(other);
  }
  fft_inplace(profile, -1);
  StripeSpectrum out;
  out.power.assign(n / 2 + 1, 0.0);
  for (std::size_t f = 1; f < n; ++f) out.power[std::min(f, n - f)] += std::norm(profile[f]);
  double total = 0.0;
  for (std::size_t f = 1; f < out.power.size(); ++f) {
    total += out.power[f];
    if (out.power[f] > out.power[static_cast<std::size_t>(out.frequency)]) out.frequency = static_cast<int>(f);
  }
  out.power_fraction = total > 0.0 ? out.power[static_cast<std::size_t>(out.frequency)] / total : 0.0;
  return out;
}

inline double pearson(const RealField& a, const RealField& b) {
  if (a.size() != b.size() || a.empty()) throw Error("pearson: size mismatch");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw Error("pearson: zero-variance field");
  return sab / std::sqrt(saa * sbb);
}

struct CorrelationReport {
  double rho = 0.0, jx = 0.0, jy = 0.0;
};

inline CorrelationReport correlation_report(const FlowFields& measured, const FlowFields& exact) {
  if (!(measured.grid == exact.grid)) throw Error("correlation_report: grids differ");
  return {pearson(measured.rho, exact.rho), pearson(measured.jx, exact.jx), pearson(measured.jy, exact.jy)};
}

}  // namespace qflow

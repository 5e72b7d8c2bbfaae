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
 * @file statevector.hpp
 * @brief Dense statevector simulation: states, gates, circuits, sampling and
 * Pauli expectation values.
 *
 * Qubit 0 is the most significant bit of the basis index, so for an n-qubit
 * register qubit q lives on bit n - 1 - q. Multi-qubit gate matrices use the
 * same convention locally: the first target is the most significant bit.
 */
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qflow/common.hpp"
#include "qflow/pauli.hpp"
#include "qflow/rng.hpp"

namespace qflow {

/// Row-major dense complex matrix. Used for gate matrices and test oracles.
struct DenseMatrix {
  std::size_t dim = 0;
  std::vector<cplx> data;

  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t d) : dim(d), data(d * d) {}

  static DenseMatrix identity(std::size_t d) {
    DenseMatrix m(d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }

  cplx& operator()(std::size_t r, std::size_t c) { return data[r * dim + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.dim != b.dim) throw Error("matrix dimension mismatch");
    DenseMatrix out(a.dim);
    for (std::size_t i = 0; i < a.dim; ++i) {
      for (std::size_t k = 0; k < a.dim; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < a.dim; ++j) out(i, j) += aik * b(k, j);
      }
    }
    return out;
  }

  DenseMatrix adjoint() const {
    DenseMatrix out(dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  /// Largest |a_ij - b_ij|.
  friend double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.dim != b.dim) throw Error("matrix dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
  }
};

/// Largest entry deviation between `a` and `e^{i g} b`, with g chosen from the
/// largest-magnitude entry of b.
inline double max_abs_diff_up_to_phase(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.dim != b.dim) throw Error("matrix dimension mismatch");
  std::size_t pivot = 0;
  for (std::size_t i = 0; i < b.data.size(); ++i)
    if (std::abs(b.data[i]) > std::abs(b.data[pivot])) pivot = i;
  cplx phase = 1.0;
  if (std::abs(a.data[pivot]) > 0.0 && std::abs(b.data[pivot]) > 0.0) {
    phase = a.data[pivot] / b.data[pivot];
    phase /= std::abs(phase);
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - phase * b.data[i]));
  return m;
}

inline bool is_unitary(const DenseMatrix& m, double tol) {
  return max_abs_diff(m.adjoint() * m, DenseMatrix::identity(m.dim)) <= tol;
}

// ---------------------------------------------------------------------------
// QuantumState

class QuantumState {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// |0...0> on `num_qubits` qubits.
  explicit QuantumState(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 0 || num_qubits > 30) throw Error("unsupported qubit count " + std::to_string(num_qubits));
    amps_.assign(std::size_t{1} << num_qubits, cplx{});
    amps_[0] = 1.0;
  }

  /// Wraps an amplitude vector. With `normalize` the vector is rescaled to
  /// unit norm; otherwise its norm must already be 1 within kNormTolerance.
  static QuantumState from_amplitudes(std::vector<cplx> amps, bool normalize = false) {
    const int n = log2_exact(amps.size());
    double nrm2 = 0.0;
    for (const cplx& a : amps) nrm2 += std::norm(a);
    if (normalize) {
      if (!(nrm2 > 0.0) || !std::isfinite(nrm2)) throw Error("cannot normalize a zero or non-finite vector");
      const double s = 1.0 / std::sqrt(nrm2);
      for (cplx& a : amps) a *= s;
    } else if (std::abs(nrm2 - 1.0) > kNormTolerance) {
      throw Error("amplitudes are not normalized (norm^2 = " + std::to_string(nrm2) + ")");
    }
    QuantumState s(0);
    s.num_qubits_ = n;
    s.amps_ = std::move(amps);
    return s;
  }

  /// Computational basis state |index>.
  static QuantumState basis(int num_qubits, std::uint64_t index) {
    QuantumState s(num_qubits);
    if (index >= s.dimension()) throw Error("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
  }

  int num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return amps_.size(); }

  std::span<const cplx> amplitudes() const { return amps_; }
  std::span<cplx> amplitudes() { return amps_; }
  const cplx& operator[](std::size_t i) const { return amps_[i]; }
  cplx& operator[](std::size_t i) { return amps_[i]; }

  double norm_squared() const {
    double s = 0.0;
    for (const cplx& a : amps_) s += std::norm(a);
    return s;
  }

  /// Bit position of qubit q inside a basis index.
  int bit_of(int q) const { return num_qubits_ - 1 - q; }

 private:
  int num_qubits_ = 0;
  std::vector<cplx> amps_;
};

/// <a|b>.
inline cplx overlap(const QuantumState& a, const QuantumState& b) {
  if (a.num_qubits() != b.num_qubits()) throw Error("overlap: qubit count mismatch");
  cplx s{};
  for (std::size_t i = 0; i < a.dimension(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double fidelity(const QuantumState& a, const QuantumState& b) { return std::norm(overlap(a, b)); }

/// Max amplitude deviation between a and e^{ig} b, with g taken from <b|a>.
inline double max_deviation_up_to_phase(const QuantumState& a, const QuantumState& b) {
  const cplx ov = overlap(b, a);
  const cplx phase = std::abs(ov) > 0.0 ? ov / std::abs(ov) : cplx{1.0};
  double m = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) m = std::max(m, std::abs(a[i] - phase * b[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Gates

enum class GateKind { U3, Rz, Rx, Ry, Rphi, CZ, CNOT, ZZ, DiagonalPhase, Swap };

inline std::string to_string(GateKind k) {
  switch (k) {
    case GateKind::U3: return "U3";
    case GateKind::Rz: return "RZ";
    case GateKind::Rx: return "RX";
    case GateKind::Ry: return "RY";
    case GateKind::Rphi: return "RPHI";
    case GateKind::CZ: return "CZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::ZZ: return "ZZ";
    case GateKind::DiagonalPhase: return "DIAG";
    case GateKind::Swap: return "SWAP";
  }
  return "?";
}

inline GateKind gate_kind_from_string(const std::string& s) {
  static const std::map<std::string, GateKind> table = {
      {"U3", GateKind::U3},   {"RZ", GateKind::Rz},     {"RX", GateKind::Rx},
      {"RY", GateKind::Ry},   {"RPHI", GateKind::Rphi}, {"CZ", GateKind::CZ},
      {"CNOT", GateKind::CNOT}, {"ZZ", GateKind::ZZ},   {"DIAG", GateKind::DiagonalPhase},
      {"SWAP", GateKind::Swap}};
  std::string upper = s;
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  const auto it = table.find(upper);
  if (it == table.end()) throw Error("unknown gate kind '" + s + "'");
  return it->second;
}

/// Number of angle parameters a kind carries (DiagonalPhase stores its
/// entries separately).
inline int param_count(GateKind k) {
  switch (k) {
    case GateKind::U3: return 3;
    case GateKind::Rz:
    case GateKind::Rx:
    case GateKind::Ry:
    case GateKind::ZZ: return 1;
    case GateKind::Rphi: return 2;
    default: return 0;
  }
}

inline int fixed_arity(GateKind k) {
  switch (k) {
    case GateKind::CZ:
    case GateKind::CNOT:
    case GateKind::ZZ:
    case GateKind::Swap: return 2;
    case GateKind::DiagonalPhase: return -1;
    default: return 1;
  }
}

namespace detail {

inline DenseMatrix mat2(cplx a, cplx b, cplx c, cplx d) {
  DenseMatrix m(2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}

inline DenseMatrix rz_matrix(double t) {
  return mat2(std::polar(1.0, -t / 2), 0.0, 0.0, std::polar(1.0, t / 2));
}
inline DenseMatrix ry_matrix(double t) {
  const double c = std::cos(t / 2), s = std::sin(t / 2);
  return mat2(c, -s, s, c);
}
inline DenseMatrix rx_matrix(double t) {
  const double c = std::cos(t / 2), s = std::sin(t / 2);
  return mat2(c, cplx(0, -s), cplx(0, -s), c);
}

}  // namespace detail

/// One gate of a circuit.
///
/// Angle conventions: Rz(t) = exp(-i t Z / 2), likewise Rx and Ry;
/// U3(theta, phi, lambda) = Rz(phi) Ry(theta) Rz(lambda) exactly (no extra
/// phase); Rphi(phi, theta) = exp(-i theta (cos(phi) X + sin(phi) Y) / 2);
/// ZZ(t) = exp(-i t Z(x)Z / 2). CNOT's first target is the control.
struct Gate {
  GateKind kind = GateKind::U3;
  std::vector<int> targets;
  std::vector<double> params;
  std::vector<cplx> diagonal;  // DiagonalPhase only

  static Gate u3(int q, double theta, double phi, double lambda) {
    return {GateKind::U3, {q}, {theta, phi, lambda}, {}};
  }
  /// Hadamard up to a global phase of -i.
  static Gate h(int q) { return u3(q, kPi / 2, 0.0, kPi); }
  static Gate rz(int q, double t) { return {GateKind::Rz, {q}, {t}, {}}; }
  static Gate rx(int q, double t) { return {GateKind::Rx, {q}, {t}, {}}; }
  static Gate ry(int q, double t) { return {GateKind::Ry, {q}, {t}, {}}; }
  static Gate rphi(int q, double phi, double theta) { return {GateKind::Rphi, {q}, {phi, theta}, {}}; }
  static Gate cz(int a, int b) { return {GateKind::CZ, {a, b}, {}, {}}; }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, {control, target}, {}, {}}; }
  static Gate zz(int a, int b, double t) { return {GateKind::ZZ, {a, b}, {t}, {}}; }
  static Gate swap(int a, int b) { return {GateKind::Swap, {a, b}, {}, {}}; }

  /// Diagonal unitary on `targets`; `entries` has length 2^targets.size().
  static Gate diagonal_phase(std::vector<int> targets, std::vector<cplx> entries) {
    Gate g{GateKind::DiagonalPhase, std::move(targets), {}, std::move(entries)};
    g.validate_shape();
    return g;
  }
  /// diag(1, 1, 1, e^{i phi}).
  static Gate cphase(int a, int b, double phi) {
    return diagonal_phase({a, b}, {1.0, 1.0, 1.0, std::polar(1.0, phi)});
  }

  int arity() const { return static_cast<int>(targets.size()); }

  /// Checks parameter counts, diagonal length and |entry| = 1.
  void validate_shape() const {
    const int fa = fixed_arity(kind);
    if (fa > 0 && arity() != fa) throw Error(to_string(kind) + " expects " + std::to_string(fa) + " targets");
    if (kind == GateKind::DiagonalPhase) {
      if (targets.empty() || targets.size() > 20) throw Error("DIAG needs between 1 and 20 targets");
      if (diagonal.size() != (std::size_t{1} << targets.size()))
        throw Error("DIAG entry count does not match its targets");
      for (const cplx& e : diagonal) {
        if (!(std::abs(std::abs(e) - 1.0) <= 1e-12)) throw Error("DIAG entry is not a unit-modulus phase");
      }
    } else if (static_cast<int>(params.size()) != param_count(kind)) {
      throw Error(to_string(kind) + " expects " + std::to_string(param_count(kind)) + " parameters");
    }
    for (double p : params)
      if (!std::isfinite(p)) throw Error("non-finite gate parameter");
  }

  bool is_diagonal() const {
    return kind == GateKind::Rz || kind == GateKind::CZ || kind == GateKind::ZZ ||
           kind == GateKind::DiagonalPhase;
  }

  /// Dense matrix on the gate's own targets (first target most significant).
  DenseMatrix matrix() const {
    using namespace detail;
    switch (kind) {
      case GateKind::U3:
        return rz_matrix(params[1]) * ry_matrix(params[0]) * rz_matrix(params[2]);
      case GateKind::Rz: return rz_matrix(params[0]);
      case GateKind::Rx: return rx_matrix(params[0]);
      case GateKind::Ry: return ry_matrix(params[0]);
      case GateKind::Rphi: {
        const double c = std::cos(params[1] / 2), s = std::sin(params[1] / 2);
        const double phi = params[0];
        return mat2(c, cplx(0, -s) * std::polar(1.0, -phi), cplx(0, -s) * std::polar(1.0, phi), c);
      }
      case GateKind::CZ: {
        DenseMatrix m = DenseMatrix::identity(4);
        m(3, 3) = -1.0;
        return m;
      }
      case GateKind::CNOT: {
        DenseMatrix m(4);
        m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
        return m;
      }
      case GateKind::ZZ: {
        DenseMatrix m(4);
        const cplx a = std::polar(1.0, -params[0] / 2), b = std::polar(1.0, params[0] / 2);
        m(0, 0) = a;
        m(1, 1) = b;
        m(2, 2) = b;
        m(3, 3) = a;
        return m;
      }
      case GateKind::Swap: {
        DenseMatrix m(4);
        m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1.0;
        return m;
      }
      case GateKind::DiagonalPhase: {
        DenseMatrix m(diagonal.size());
        for (std::size_t i = 0; i < diagonal.size(); ++i) m(i, i) = diagonal[i];
        return m;
      }
    }
    throw Error("unhandled gate kind");
  }

  Gate inverse() const {
    Gate g = *this;
    switch (kind) {
      case GateKind::U3: g.params = {-params[0], -params[2], -params[1]}; break;
      case GateKind::Rz:
      case GateKind::Rx:
      case GateKind::Ry:
      case GateKind::ZZ: g.params[0] = -params[0]; break;
      case GateKind::Rphi: g.params[1] = -params[1]; break;
      case GateKind::DiagonalPhase:
        for (cplx& e : g.diagonal) e = std::conj(e);
        break;
      default: break;
    }
    return g;
  }
};

// ---------------------------------------------------------------------------
// Circuit

/// Ordered gate list with bookkeeping.
///
/// `global_phase` is part of the circuit's action (the unitary is
/// e^{i global_phase} times the gate product); `dropped_phase` records phase
/// that a builder deliberately discarded and is not applied.
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int num_qubits, std::string name = {}) : num_qubits_(num_qubits), name_(std::move(name)) {
    if (num_qubits < 0) throw Error("negative qubit count");
  }

  int num_qubits() const { return num_qubits_; }
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  double global_phase() const { return global_phase_; }
  void add_global_phase(double p) { global_phase_ += p; }
  double dropped_phase() const { return dropped_phase_; }
  void add_dropped_phase(double p) { dropped_phase_ += p; }

  Circuit& add(Gate g) {
    g.validate_shape();
    check_targets(g.targets);
    gates_.push_back(std::move(g));
    return *this;
  }

  /// Appends `other`, mapping its qubit q onto `qubit_map[q]` of this circuit.
  Circuit& append(const Circuit& other, std::span<const int> qubit_map) {
    if (static_cast<int>(qubit_map.size()) != other.num_qubits()) throw Error("append: qubit map size mismatch");
    for (const Gate& g : other.gates()) {
      Gate m = g;
      for (int& t : m.targets) t = qubit_map[static_cast<std::size_t>(t)];
      add(std::move(m));
    }
    global_phase_ += other.global_phase_;
    dropped_phase_ += other.dropped_phase_;
    return *this;
  }

  Circuit& append(const Circuit& other) {
    if (other.num_qubits() != num_qubits_) throw Error("append: qubit count mismatch");
    std::vector<int> identity(static_cast<std::size_t>(num_qubits_));
    for (int q = 0; q < num_qubits_; ++q) identity[static_cast<std::size_t>(q)] = q;
    return append(other, identity);
  }

  Circuit inverse() const {
    Circuit c(num_qubits_, name_.empty() ? std::string{} : name_ + "_dg");
    for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) c.gates_.push_back(it->inverse());
    c.global_phase_ = -global_phase_;
    c.dropped_phase_ = -dropped_phase_;
    return c;
  }

  /// Minimum number of layers when every layer holds gates on disjoint
  /// qubits and gate order on each qubit is kept (ASAP schedule).
  int depth() const {
    std::vector<int> level(static_cast<std::size_t>(num_qubits_), 0);
    int d = 0;
    for (const Gate& g : gates_) {
      int l = 0;
      for (int t : g.targets) l = std::max(l, level[static_cast<std::size_t>(t)]);
      ++l;
      for (int t : g.targets) level[static_cast<std::size_t>(t)] = l;
      d = std::max(d, l);
    }
    return d;
  }

  /// Depth when layers strictly alternate between single-qubit and
  /// multi-qubit gates, as in hardware-aligned schedules. Layer 1 is a
  /// single-qubit layer.
  int aligned_depth() const {
    std::vector<int> level(static_cast<std::size_t>(num_qubits_), 0);
    int d = 0;
    for (const Gate& g : gates_) {
      int l = 0;
      for (int t : g.targets) l = std::max(l, level[static_cast<std::size_t>(t)]);
      ++l;
      const bool single = g.arity() == 1;
      // Odd layers host single-qubit gates, even layers multi-qubit gates.
      if (single != (l % 2 == 1)) ++l;
      for (int t : g.targets) level[static_cast<std::size_t>(t)] = l;
      d = std::max(d, l);
    }
    return d;
  }

  std::map<GateKind, std::size_t> counts_by_kind() const {
    std::map<GateKind, std::size_t> m;
    for (const Gate& g : gates_) ++m[g.kind];
    return m;
  }

 private:
  void check_targets(const std::vector<int>& targets) const {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (targets[i] < 0 || targets[i] >= num_qubits_) {
        throw Error("gate target " + std::to_string(targets[i]) + " outside register of " +
                    std::to_string(num_qubits_) + " qubits");
      }
      for (std::size_t j = 0; j < i; ++j)
        if (targets[j] == targets[i]) throw Error("gate targets must be distinct");
    }
  }

  int num_qubits_ = 0;
  std::string name_;
  std::vector<Gate> gates_;
  double global_phase_ = 0.0;
  double dropped_phase_ = 0.0;
};

// ---------------------------------------------------------------------------
// Application

namespace detail {

inline void apply_single(std::span<cplx> amps, int bit, const DenseMatrix& m) {
  const std::size_t stride = std::size_t{1} << bit;
  const cplx m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
  const std::size_t dim = amps.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      const cplx a0 = amps[i], a1 = amps[i + stride];
      amps[i] = m00 * a0 + m01 * a1;
      amps[i + stride] = m10 * a0 + m11 * a1;
    }
  }
}

/// Applies a diagonal given as entries over local indices of `bits`
/// (bits[0] most significant).
inline void apply_diagonal(std::span<cplx> amps, const std::vector<int>& bits, const std::vector<cplx>& diag) {
  const std::size_t k = bits.size();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    std::size_t local = 0;
    for (std::size_t j = 0; j < k; ++j) local = (local << 1) | ((i >> bits[j]) & 1U);
    amps[i] *= diag[local];
  }
}

inline void apply_dense(std::span<cplx> amps, const std::vector<int>& bits, const DenseMatrix& m) {
  const std::size_t k = bits.size();
  const std::size_t local_dim = std::size_t{1} << k;
  std::uint64_t mask = 0;
  for (int b : bits) mask |= std::uint64_t{1} << b;
  std::vector<std::size_t> offsets(local_dim);
  for (std::size_t local = 0; local < local_dim; ++local) {
    std::size_t off = 0;
    for (std::size_t j = 0; j < k; ++j)
      if ((local >> (k - 1 - j)) & 1U) off |= std::size_t{1} << bits[j];
    offsets[local] = off;
  }
  std::vector<cplx> in(local_dim), out(local_dim);
  for (std::size_t base = 0; base < amps.size(); ++base) {
    if (base & mask) continue;
    for (std::size_t r = 0; r < local_dim; ++r) in[r] = amps[base + offsets[r]];
    for (std::size_t r = 0; r < local_dim; ++r) {
      cplx s{};
      for (std::size_t c = 0; c < local_dim; ++c) s += m(r, c) * in[c];
      out[r] = s;
    }
    for (std::size_t r = 0; r < local_dim; ++r) amps[base + offsets[r]] = out[r];
  }
}

}  // namespace detail

/// Applies `gate` to `state` in place.
inline void apply_gate(QuantumState& state, const Gate& gate) {
  gate.validate_shape();
  const int n = state.num_qubits();
  std::vector<int> bits;
  bits.reserve(gate.targets.size());
  for (std::size_t i = 0; i < gate.targets.size(); ++i) {
    const int t = gate.targets[i];
    if (t < 0 || t >= n) throw Error("gate target " + std::to_string(t) + " out of range");
    for (std::size_t j = 0; j < i; ++j)
      if (gate.targets[j] == t) throw Error("gate targets must be distinct");
    bits.push_back(state.bit_of(t));
  }
  std::span<cplx> amps = state.amplitudes();
  switch (gate.kind) {
    case GateKind::CZ:
      for (std::size_t i = 0; i < amps.size(); ++i)
        if (((i >> bits[0]) & 1U) && ((i >> bits[1]) & 1U)) amps[i] = -amps[i];
      return;
    case GateKind::CNOT: {
      const std::size_t c = std::size_t{1} << bits[0], t = std::size_t{1} << bits[1];
      for (std::size_t i = 0; i < amps.size(); ++i)
        if ((i & c) && !(i & t)) std::swap(amps[i], amps[i | t]);
      return;
    }
    case GateKind::Swap: {
      const std::size_t a = std::size_t{1} << bits[0], b = std::size_t{1} << bits[1];
      for (std::size_t i = 0; i < amps.size(); ++i)
        if ((i & a) && !(i & b)) std::swap(amps[i], amps[(i & ~a) | b]);
      return;
    }
    case GateKind::ZZ: {
      const cplx same = std::polar(1.0, -gate.params[0] / 2), diff = std::conj(same);
      for (std::size_t i = 0; i < amps.size(); ++i)
        amps[i] *= (((i >> bits[0]) ^ (i >> bits[1])) & 1U) ? diff : same;
      return;
    }
    case GateKind::DiagonalPhase:
      detail::apply_diagonal(amps, bits, gate.diagonal);
      return;
    default:
      break;
  }
  if (gate.arity() == 1) {
    detail::apply_single(amps, bits[0], gate.matrix());
  } else {
    detail::apply_dense(amps, bits, gate.matrix());
  }
}

/// Applies every gate of `circuit` in order, then its global phase.
inline void apply_circuit(QuantumState& state, const Circuit& circuit) {
  if (state.num_qubits() != circuit.num_qubits()) throw Error("apply_circuit: qubit count mismatch");
  for (const Gate& g : circuit.gates()) apply_gate(state, g);
  if (circuit.global_phase() != 0.0) {
    const cplx p = std::polar(1.0, circuit.global_phase());
    for (cplx& a : state.amplitudes()) a *= p;
  }
}

inline QuantumState run_circuit(const Circuit& circuit) {
  QuantumState s(circuit.num_qubits());
  apply_circuit(s, circuit);
  return s;
}

/// Dense unitary of a circuit, built column by column. Intended for n <= 12.
inline DenseMatrix circuit_unitary(const Circuit& circuit) {
  const std::size_t dim = std::size_t{1} << circuit.num_qubits();
  DenseMatrix u(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    QuantumState s = QuantumState::basis(circuit.num_qubits(), c);
    apply_circuit(s, circuit);
    for (std::size_t r = 0; r < dim; ++r) u(r, c) = s[r];
  }
  return u;
}

// ---------------------------------------------------------------------------
// Measurement primitives

/// Outcome index histogram of `shots` computational-basis measurements.
/// Each shot draws u in [0, 1) and selects the first index whose cumulative
/// probability exceeds u.
inline std::vector<std::uint32_t> sample_histogram(const QuantumState& state, std::uint64_t shots, Rng& rng) {
  if (shots == 0) throw Error("shots must be at least 1");
  const std::size_t dim = state.dimension();
  std::vector<double> cdf(dim);
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    acc += std::norm(state[i]);
    cdf[i] = acc;
  }
  std::size_t last = dim - 1;
  while (last > 0 && std::norm(state[last]) == 0.0) --last;
  std::vector<std::uint32_t> hist(dim, 0);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.begin() + static_cast<std::ptrdiff_t>(last), u);
    ++hist[static_cast<std::size_t>(it - cdf.begin())];
  }
  return hist;
}

inline std::string bitstring(std::uint64_t index, int num_qubits) {
  std::string s(static_cast<std::size_t>(num_qubits), '0');
  for (int q = 0; q < num_qubits; ++q)
    if ((index >> (num_qubits - 1 - q)) & 1U) s[static_cast<std::size_t>(q)] = '1';
  return s;
}

/// Sampled outcome counts keyed by bitstring (qubit 0 first).
inline std::map<std::string, std::uint64_t> sample_counts(const QuantumState& state, std::uint64_t shots,
                                                          std::uint64_t seed) {
  Rng rng(seed);
  const auto hist = sample_histogram(state, shots, rng);
  std::map<std::string, std::uint64_t> counts;
  for (std::size_t i = 0; i < hist.size(); ++i)
    if (hist[i] != 0) counts[bitstring(i, state.num_qubits())] = hist[i];
  return counts;
}

/// Exact <psi|P|psi> for the letters of `pauli`; the coefficient is ignored.
inline double expectation_pauli(const QuantumState& state, const PauliString& pauli) {
  if (pauli.num_qubits() != state.num_qubits()) throw Error("expectation_pauli: string length mismatch");
  const std::uint64_t x = pauli.x_mask(), z = pauli.z_mask();
  // P|i> = i^{nY} (-1)^{popcount(i & z)} |i ^ x>
  static constexpr std::array<cplx, 4> ipow = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  const cplx yphase = ipow[static_cast<std::size_t>(pauli.num_y() % 4)];
  cplx s{};
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    const double sign = (std::popcount(i & z) & 1) ? -1.0 : 1.0;
    s += std::conj(state[i ^ x]) * sign * state[i];
  }
  return (yphase * s).real();
}

}  // namespace qflow

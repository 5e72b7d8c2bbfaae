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

#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "qflow/statevector.hpp"

namespace qflow {

/// Undirected coupling graph; two-qubit gates are allowed only on edges.
class Topology {
 public:
  Topology() = default;
  Topology(int num_qubits, std::vector<std::pair<int, int>> edges) : num_qubits_(num_qubits) {
    adj_.assign(static_cast<std::size_t>(num_qubits), std::vector<bool>(static_cast<std::size_t>(num_qubits), false));
    for (auto [a, b] : edges) {
      if (a < 0 || b < 0 || a >= num_qubits || b >= num_qubits) throw Error("topology edge outside register");
      if (a == b) throw Error("topology self-edge on qubit " + std::to_string(a));
      if (!adj_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) edges_.emplace_back(std::min(a, b), std::max(a, b));
      adj_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
      adj_[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = true;
    }
  }

  static Topology line(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return Topology(n, std::move(e));
  }

  /// Two rows of `columns` qubits: row 0 is [0, columns), row 1 is
  /// [columns, 2 columns); neighbours within a row and rungs i -- i + columns.
  static Topology ladder(int columns) {
    std::vector<std::pair<int, int>> e;
    for (int row = 0; row < 2; ++row)
      for (int i = 0; i + 1 < columns; ++i) e.emplace_back(row * columns + i, row * columns + i + 1);
    for (int i = 0; i < columns; ++i) e.emplace_back(i, i + columns);
    return Topology(2 * columns, std::move(e));
  }

  static Topology all_to_all(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return Topology(n, std::move(e));
  }

  int num_qubits() const { return num_qubits_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  bool adjacent(int a, int b) const { return adj_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }

  /// Shortest path from a to b (inclusive), empty if unreachable.
  std::vector<int> shortest_path(int a, int b) const {
    std::vector<int> prev(static_cast<std::size_t>(num_qubits_), -1);
    std::deque<int> queue{a};
    prev[static_cast<std::size_t>(a)] = a;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      if (v == b) break;
      for (int w = 0; w < num_qubits_; ++w) {
        if (adjacent(v, w) && prev[static_cast<std::size_t>(w)] < 0) {
          prev[static_cast<std::size_t>(w)] = v;
          queue.push_back(w);
        }
      }
    }
    if (prev[static_cast<std::size_t>(b)] < 0) return {};
    std::vector<int> path{b};
    while (path.back() != a) path.push_back(prev[static_cast<std::size_t>(path.back())]);
    return {path.rbegin(), path.rend()};
  }

  bool connected() const {
    if (num_qubits_ <= 1) return true;
    for (int q = 1; q < num_qubits_; ++q)
      if (shortest_path(0, q).empty()) return false;
    return true;
  }

 private:
  int num_qubits_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<bool>> adj_;
};

/// U = e^{i global_phase} U3(theta, phi, lambda).
struct EulerZYZ {
  double theta = 0.0, phi = 0.0, lambda = 0.0, global_phase = 0.0;
};

inline EulerZYZ euler_zyz(const DenseMatrix& u) {
  if (u.dim != 2) throw Error("euler_zyz: expected a 2x2 matrix");
  if (!is_unitary(u, 1e-10)) throw Error("euler_zyz: matrix is not unitary");
  const cplx det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  const double alpha = std::arg(det) / 2.0;
  const cplx a = u(0, 0) * std::polar(1.0, -alpha);
  const cplx b = u(1, 0) * std::polar(1.0, -alpha);
  EulerZYZ e;
  e.theta = 2.0 * std::atan2(std::abs(b), std::abs(a));
  const double sum = std::abs(a) > 1e-14 ? -2.0 * std::arg(a) : 0.0;
  const double diff = std::abs(b) > 1e-14 ? 2.0 * std::arg(b) : 0.0;
  e.phi = (sum + diff) / 2.0;
  e.lambda = (sum - diff) / 2.0;
  const DenseMatrix v = Gate::u3(0, e.theta, e.phi, e.lambda).matrix();
  std::size_t pivot = 0;
  for (std::size_t i = 1; i < 4; ++i)
    if (std::abs(u.data[i]) > std::abs(u.data[pivot])) pivot = i;
  e.global_phase = std::arg(u.data[pivot] / v.data[pivot]);
  return e;
}

struct TranspileOptions {
  /// Merge runs of single-qubit gates on a qubit into one U3 and drop
  /// identities.
  bool fuse_single_qubit = true;
};

namespace detail {

class NativeEmitter {
 public:
  NativeEmitter(Circuit& out, const Topology& topo) : out_(out), topo_(topo) {}

  void u3_from(int q, const DenseMatrix& m) {
    const EulerZYZ e = euler_zyz(m);
    out_.add(Gate::u3(q, e.theta, e.phi, e.lambda));
    out_.add_global_phase(e.global_phase);
  }

  // H = i U3(pi/2, 0, pi)
  void h(int q) {
    out_.add(Gate::h(q));
    out_.add_global_phase(kPi / 2);
  }

  void cz(int a, int b) {
    if (topo_.adjacent(a, b)) {
      out_.add(Gate::cz(a, b));
      return;
    }
    const std::vector<int> path = topo_.shortest_path(a, b);
    if (path.empty()) throw Error("transpile: qubits " + std::to_string(a) + " and " + std::to_string(b) + " are not connected");
    // Move a's state next to b, interact, move it back.
    for (std::size_t i = 0; i + 2 < path.size(); ++i) swap_adjacent(path[i], path[i + 1]);
    out_.add(Gate::cz(path[path.size() - 2], b));
    for (std::size_t i = path.size() - 2; i-- > 0;) swap_adjacent(path[i], path[i + 1]);
  }

  void cnot(int c, int t) {
    h(t);
    cz(c, t);
    h(t);
  }

  void rz(int q, double theta) { u3_from(q, Gate::rz(q, theta).matrix()); }

  void emit(const Gate& g) {
    switch (g.kind) {
      case GateKind::CZ: cz(g.targets[0], g.targets[1]); return;
      case GateKind::CNOT: cnot(g.targets[0], g.targets[1]); return;
      case GateKind::ZZ:
        cnot(g.targets[0], g.targets[1]);
        rz(g.targets[1], g.params[0]);
        cnot(g.targets[0], g.targets[1]);
        return;
      case GateKind::Swap:
        cnot(g.targets[0], g.targets[1]);
        cnot(g.targets[1], g.targets[0]);
        cnot(g.targets[0], g.targets[1]);
        return;
      case GateKind::DiagonalPhase:
        if (g.arity() > 1) {
          diagonal(g);
          return;
        }
        break;
      default: break;
    }
    u3_from(g.targets[0], g.matrix());
  }

 private:
  void swap_adjacent(int a, int b) {
    cnot(a, b);
    cnot(b, a);
    cnot(a, b);
  }

  // phase(b) = sum_S w_S (-1)^{|b & S|}; each S is a parity rotation.
  void diagonal(const Gate& g) {
    const std::size_t k = g.targets.size();
    const std::size_t count = std::size_t{1} << k;
    std::vector<double> phase(count);
    for (std::size_t b = 0; b < count; ++b) phase[b] = std::arg(g.diagonal[b]);
    for (std::size_t s = 0; s < count; ++s) {
      double w = 0.0;
      for (std::size_t b = 0; b < count; ++b) w += (std::popcount(b & s) & 1) ? -phase[b] : phase[b];
      w /= static_cast<double>(count);
      if (std::abs(w) < 1e-15) continue;
      if (s == 0) {
        out_.add_global_phase(w);
        continue;
      }
      std::vector<int> qubits;
      for (std::size_t j = 0; j < k; ++j)
        if ((s >> (k - 1 - j)) & 1U) qubits.push_back(g.targets[j]);
      const int last = qubits.back();
      for (std::size_t j = 0; j + 1 < qubits.size(); ++j) cnot(qubits[j], last);
      rz(last, -2.0 * w);  // exp(i w Z) = Rz(-2w)
      for (std::size_t j = qubits.size() - 1; j-- > 0;) cnot(qubits[j], last);
    }
  }

  Circuit& out_;
  const Topology& topo_;
};

inline Circuit fuse_single_qubit_runs(const Circuit& in) {
  Circuit out(in.num_qubits(), in.name());
  out.add_global_phase(in.global_phase());
  out.add_dropped_phase(in.dropped_phase());
  std::vector<std::optional<DenseMatrix>> pending(static_cast<std::size_t>(in.num_qubits()));
  auto flush = [&](int q) {
    auto& p = pending[static_cast<std::size_t>(q)];
    if (!p) return;
    const EulerZYZ e = euler_zyz(*p);
    const DenseMatrix v = Gate::u3(q, e.theta, e.phi, e.lambda).matrix();
    if (max_abs_diff(v, DenseMatrix::identity(2)) < 1e-14) {
      out.add_global_phase(e.global_phase);
    } else {
      out.add(Gate::u3(q, e.theta, e.phi, e.lambda));
      out.add_global_phase(e.global_phase);
    }
    p.reset();
  };
  for (const Gate& g : in.gates()) {
    if (g.arity() == 1) {
      auto& p = pending[static_cast<std::size_t>(g.targets[0])];
      p = p ? g.matrix() * *p : g.matrix();
      continue;
    }
    for (int t : g.targets) flush(t);
    out.add(g);
  }
  for (int q = 0; q < in.num_qubits(); ++q) flush(q);
  return out;
}

}  // namespace detail

/// Rewrites `circuit` over {U3, CZ} with every CZ on a topology edge.
///
/// Qubit q is placed on physical qubit q. Non-adjacent interactions are
/// routed by swapping along a shortest path and swapping back, so the
/// placement is unchanged at the end. The output unitary equals the input
/// unitary exactly (global phase is tracked).
inline Circuit transpile(const Circuit& circuit, const Topology& topology, const TranspileOptions& options = {}) {
  if (topology.num_qubits() != circuit.num_qubits())
    throw Error("transpile: topology has " + std::to_string(topology.num_qubits()) + " qubits, circuit has " +
                std::to_string(circuit.num_qubits()));
  if (!topology.connected()) throw Error("transpile: topology is disconnected");
  Circuit out(circuit.num_qubits(), circuit.name().empty() ? "native" : circuit.name() + "_native");
  out.add_global_phase(circuit.global_phase());
  out.add_dropped_phase(circuit.dropped_phase());
  detail::NativeEmitter emit(out, topology);
  for (const Gate& g : circuit.gates()) emit.emit(g);
  if (!options.fuse_single_qubit) return out;
  return detail::fuse_single_qubit_runs(out);
}

struct GateCountReport {
  std::size_t single_qubit = 0;
  std::size_t two_qubit = 0;
  std::size_t multi_qubit = 0;  // three or more targets
  int depth = 0;
  int aligned_depth = 0;
  std::map<GateKind, std::size_t> by_kind;

  std::size_t total() const { return single_qubit + two_qubit + multi_qubit; }
};

inline GateCountReport gate_count_report(const Circuit& c) {
  GateCountReport r;
  for (const Gate& g : c.gates()) {
    if (g.arity() == 1) ++r.single_qubit;
    else if (g.arity() == 2) ++r.two_qubit;
    else ++r.multi_qubit;
  }
  r.depth = c.depth();
  r.aligned_depth = c.aligned_depth();
  r.by_kind = c.counts_by_kind();
  return r;
}

}  // namespace qflow

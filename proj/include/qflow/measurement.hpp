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
 * @file measurement.hpp
 * @brief Density and momentum observables, their Pauli expansions, grouping
 * into tensor-product measurement bases, and shot-based estimation.
 *
 * Observables are indexed by grid point (m, l) with m along y and l along x,
 * so point (m, l) sits at basis index 2^{n_x} m + l.
 */
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qflow/hydro.hpp"
#include "qflow/pauli.hpp"
#include "qflow/statevector.hpp"

namespace qflow {

/// Sparse Hermitian matrix. Only entries that were added are stored; use
/// add_hermitian to keep the conjugate partner in sync.
class SparseHermitian {
 public:
  explicit SparseHermitian(int num_qubits) : n_(num_qubits) {
    if (n_ < 1 || n_ > 30) throw Error("SparseHermitian: qubit count out of range");
  }

  int num_qubits() const { return n_; }
  std::uint64_t dimension() const { return std::uint64_t{1} << n_; }
  const std::map<std::pair<std::uint64_t, std::uint64_t>, cplx>& entries() const { return entries_; }

  /// Adds v at (r, c) without touching (c, r).
  void add(std::uint64_t r, std::uint64_t c, cplx v) {
    if (r >= dimension() || c >= dimension()) throw Error("SparseHermitian: index out of range");
    cplx& e = entries_[{r, c}];
    e += v;
    if (e == cplx{}) entries_.erase({r, c});
  }

  /// Adds v at (r, c) and conj(v) at (c, r); on the diagonal only Re(v) is used.
  void add_hermitian(std::uint64_t r, std::uint64_t c, cplx v) {
    if (r == c) {
      add(r, r, v.real());
    } else {
      add(r, c, v);
      add(c, r, std::conj(v));
    }
  }

  cplx at(std::uint64_t r, std::uint64_t c) const {
    auto it = entries_.find({r, c});
    return it == entries_.end() ? cplx{} : it->second;
  }

  bool is_hermitian(double tol = 0.0) const {
    for (const auto& [rc, v] : entries_)
      if (std::abs(v - std::conj(at(rc.second, rc.first))) > tol) return false;
    return true;
  }

  DenseMatrix to_dense() const {
    if (n_ > 12) throw Error("SparseHermitian: too large for a dense matrix");
    DenseMatrix m(dimension());
    for (const auto& [rc, v] : entries_) m(rc.first, rc.second) = v;
    return m;
  }

 private:
  int n_;
  std::map<std::pair<std::uint64_t, std::uint64_t>, cplx> entries_;
};

namespace detail {

inline void check_point(const Grid2D& grid, std::size_t m, std::size_t l) {
  if (m >= grid.Ny() || l >= grid.Nx()) throw Error("observable: grid point out of range");
}

/// Real weights w_q with (D f)_p = sum_q w_q f_q for the given scheme.
inline std::vector<std::pair<std::size_t, double>> stencil(std::size_t i, std::size_t n, double h,
                                                           DiffScheme scheme) {
  if (scheme == DiffScheme::OneSidedBoundary && i == 0) return {{1 % n, 1.0 / h}, {0, -1.0 / h}};
  if (scheme == DiffScheme::OneSidedBoundary && i == n - 1) return {{n - 1, 1.0 / h}, {(2 * n - 2) % n, -1.0 / h}};
  return {{(i + 1) % n, 0.5 / h}, {(i + n - 1) % n, -0.5 / h}};
}

}  // namespace detail

/// Projector onto the basis state of grid point (m, l).
inline SparseHermitian density_observable(const Grid2D& grid, std::size_t m, std::size_t l) {
  detail::check_point(grid, m, l);
  SparseHermitian op(grid.num_qubits());
  const std::uint64_t j = (std::uint64_t{1} << grid.nx) * m + l;
  op.add(j, j, 1.0);
  return op;
}

/// x and y parts of the momentum-density operator at (m, l), so that
/// <psi|J|psi> = (i/2)(psi D psi* - psi* D psi) at that point.
inline std::pair<SparseHermitian, SparseHermitian> momentum_observable(const Grid2D& grid, std::size_t m,
                                                                       std::size_t l, DiffScheme scheme) {
  detail::check_point(grid, m, l);
  SparseHermitian jx(grid.num_qubits()), jy(grid.num_qubits());
  const std::uint64_t p = grid.index(l, m);
  // (i/2) w (psi_p psi_q* - psi_p* psi_q) puts i w / 2 at (q, p) and its conjugate at (p, q).
  for (const auto& [q, w] : detail::stencil(l, grid.Nx(), grid.dx(), scheme))
    if (grid.index(q, m) != p) jx.add_hermitian(grid.index(q, m), p, cplx(0.0, 0.5 * w));
  for (const auto& [q, w] : detail::stencil(m, grid.Ny(), grid.dy(), scheme))
    if (grid.index(l, q) != p) jy.add_hermitian(grid.index(l, q), p, cplx(0.0, 0.5 * w));
  return {std::move(jx), std::move(jy)};
}

/// Pauli expansion O = sum_P (Tr(O P) / 2^n) P, built entry by entry: the
/// entry (r, c) only feeds strings whose X part is r ^ c. Strings are sorted
/// by letters.
inline std::vector<PauliString> pauli_decompose(const SparseHermitian& op, double rel_tol = 1e-12) {
  if (!op.is_hermitian(1e-14)) throw Error("pauli_decompose: operator is not Hermitian");
  const int n = op.num_qubits();
  const std::uint64_t dim = op.dimension();
  static constexpr std::array<cplx, 4> ipow = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  std::unordered_map<std::uint64_t, cplx> acc;  // key x * dim + z
  double scale = 0.0;
  for (const auto& [rc, v] : op.entries()) {
    const auto [r, c] = rc;
    scale = std::max(scale, std::abs(v));
    const std::uint64_t x = r ^ c;
    // <c|P|r> = i^{|x & z|} (-1)^{|r & z|}
    for (std::uint64_t z = 0; z < dim; ++z) {
      const int sign = std::popcount(r & z) & 1;
      const cplx ph = ipow[static_cast<std::size_t>((std::popcount(x & z) + 2 * sign) % 4)];
      acc[x * dim + z] += v * ph;
    }
  }
  const double inv = 1.0 / static_cast<double>(dim);
  std::vector<PauliString> out;
  for (const auto& [key, c] : acc) {
    const cplx coef = c * inv;
    if (std::abs(coef) <= rel_tol * scale * inv) continue;
    out.push_back(PauliString::from_masks(n, key / dim, key % dim, coef.real()));
  }
  std::sort(out.begin(), out.end(), [](const PauliString& a, const PauliString& b) { return a.letters() < b.letters(); });
  return out;
}

// ---------------------------------------------------------------------------
// Momentum observable set

/// Unique Pauli strings of all momentum observables on a grid, with each
/// observable stored as (string index, coefficient) pairs.
struct ObservableSet {
  Grid2D grid;
  DiffScheme scheme = DiffScheme::OneSidedBoundary;
  std::vector<PauliString> strings;  // coefficient = sum of |c| over observables
  std::vector<std::vector<std::pair<std::size_t, double>>> jx, jy;  // by flat index k + Nx l

  std::size_t size() const { return strings.size(); }
};

inline ObservableSet momentum_observable_set(const Grid2D& grid, DiffScheme scheme) {
  ObservableSet set;
  set.grid = grid;
  set.scheme = scheme;
  set.jx.resize(grid.size());
  set.jy.resize(grid.size());
  std::unordered_map<std::string, std::size_t> index;
  auto intern = [&](const std::vector<PauliString>& terms) {
    std::vector<std::pair<std::size_t, double>> out;
    for (const PauliString& p : terms) {
      auto [it, inserted] = index.try_emplace(p.letters(), set.strings.size());
      if (inserted) set.strings.emplace_back(p.letters(), 0.0);
      PauliString& s = set.strings[it->second];
      s.set_coefficient(s.coefficient() + std::abs(p.coefficient()));
      out.emplace_back(it->second, p.coefficient());
    }
    return out;
  };
  for (std::size_t m = 0; m < grid.Ny(); ++m) {
    for (std::size_t l = 0; l < grid.Nx(); ++l) {
      const auto [ox, oy] = momentum_observable(grid, m, l, scheme);
      set.jx[grid.index(l, m)] = intern(pauli_decompose(ox));
      set.jy[grid.index(l, m)] = intern(pauli_decompose(oy));
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Grouping

/// True if every non-identity letter of `s` matches `basis`.
inline bool basis_covers(const std::string& basis, const std::string& s) {
  if (basis.size() != s.size()) return false;
  for (std::size_t q = 0; q < s.size(); ++q)
    if (s[q] != 'I' && s[q] != basis[q]) return false;
  return true;
}

struct MeasurementPlan {
  int num_qubits = 0;
  std::vector<std::string> bases;
  std::vector<PauliString> strings;
  std::vector<std::size_t> assignment;  // strings[i] is read from bases[assignment[i]]

  /// Index of the all-Z basis, appending it if absent.
  std::size_t ensure_z_basis() {
    const std::string z(static_cast<std::size_t>(num_qubits), 'Z');
    auto it = std::find(bases.begin(), bases.end(), z);
    if (it != bases.end()) return static_cast<std::size_t>(it - bases.begin());
    bases.push_back(z);
    return bases.size() - 1;
  }

  std::optional<std::size_t> z_basis() const {
    const std::string z(static_cast<std::size_t>(num_qubits), 'Z');
    auto it = std::find(bases.begin(), bases.end(), z);
    if (it == bases.end()) return std::nullopt;
    return static_cast<std::size_t>(it - bases.begin());
  }

  std::vector<std::vector<std::size_t>> strings_by_basis() const {
    std::vector<std::vector<std::size_t>> out(bases.size());
    for (std::size_t i = 0; i < strings.size(); ++i) out[assignment[i]].push_back(i);
    return out;
  }
};

/// Greedy qubit-wise cover. Strings are visited by descending weight, then
/// descending coefficient (callers pass the |c| sum), then letters; each goes
/// to the first basis it is compatible with, fixing that basis's free letters.
/// Letters still free at the end become Z.
inline MeasurementPlan group_bases(const std::vector<PauliString>& strings) {
  MeasurementPlan plan;
  if (strings.empty()) return plan;
  plan.num_qubits = strings.front().num_qubits();
  for (const PauliString& s : strings)
    if (s.num_qubits() != plan.num_qubits) throw Error("group_bases: strings differ in length");
  std::vector<std::size_t> order(strings.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const PauliString &pa = strings[a], &pb = strings[b];
    if (pa.weight() != pb.weight()) return pa.weight() > pb.weight();
    if (std::abs(pa.coefficient()) != std::abs(pb.coefficient()))
      return std::abs(pa.coefficient()) > std::abs(pb.coefficient());
    return pa.letters() < pb.letters();
  });
  std::vector<std::string> partial;  // '*' marks a free letter
  std::vector<std::size_t> assign(strings.size());
  for (std::size_t i : order) {
    const std::string& s = strings[i].letters();
    std::size_t chosen = partial.size();
    for (std::size_t b = 0; b < partial.size() && chosen == partial.size(); ++b) {
      bool ok = true;
      for (std::size_t q = 0; q < s.size() && ok; ++q) ok = s[q] == 'I' || partial[b][q] == '*' || partial[b][q] == s[q];
      if (ok) chosen = b;
    }
    if (chosen == partial.size()) partial.emplace_back(s.size(), '*');
    for (std::size_t q = 0; q < s.size(); ++q)
      if (s[q] != 'I') partial[chosen][q] = s[q];
    assign[i] = chosen;
  }
  // Completion can make two bases equal; merge them.
  std::vector<std::size_t> remap(partial.size());
  for (std::size_t b = 0; b < partial.size(); ++b) {
    std::replace(partial[b].begin(), partial[b].end(), '*', 'Z');
    auto it = std::find(plan.bases.begin(), plan.bases.end(), partial[b]);
    remap[b] = static_cast<std::size_t>(it - plan.bases.begin());
    if (it == plan.bases.end()) plan.bases.push_back(partial[b]);
  }
  plan.strings = strings;
  plan.assignment.resize(strings.size());
  for (std::size_t i = 0; i < strings.size(); ++i) plan.assignment[i] = remap[assign[i]];
  return plan;
}

/// Grouped plan for a momentum observable set plus the Z basis for density.
inline MeasurementPlan momentum_plan(const ObservableSet& set) {
  MeasurementPlan plan = group_bases(set.strings);
  if (plan.num_qubits == 0) plan.num_qubits = set.grid.num_qubits();
  plan.ensure_z_basis();
  return plan;
}

// ---------------------------------------------------------------------------
// Estimation

/// Rotates `state` so that a Z-basis measurement reads out `basis`.
inline void rotate_to_basis(QuantumState& state, const std::string& basis) {
  if (static_cast<int>(basis.size()) != state.num_qubits()) throw Error("rotate_to_basis: basis length mismatch");
  for (std::size_t q = 0; q < basis.size(); ++q) {
    const int qi = static_cast<int>(q);
    if (basis[q] == 'X') {
      apply_gate(state, Gate::h(qi));
    } else if (basis[q] == 'Y') {
      apply_gate(state, Gate::rz(qi, -kPi / 2));  // S^dagger up to phase
      apply_gate(state, Gate::h(qi));
    } else if (basis[q] != 'Z') {
      throw Error("rotate_to_basis: invalid basis letter");
    }
  }
}

/// Signed mean of (-1)^{parity of outcome on mask} over a histogram.
inline double parity_expectation(const std::vector<std::uint32_t>& hist, std::uint64_t mask, std::uint64_t shots) {
  std::int64_t s = 0;
  for (std::size_t o = 0; o < hist.size(); ++o)
    s += (std::popcount(o & mask) & 1) ? -static_cast<std::int64_t>(hist[o]) : static_cast<std::int64_t>(hist[o]);
  return static_cast<double>(s) / static_cast<double>(shots);
}

/// Per-repeat string estimates and Z-basis histograms.
struct Estimates {
  std::uint64_t shots = 0;
  std::vector<std::vector<double>> values;             // [repeat][string]
  std::vector<std::vector<std::uint32_t>> z_histograms;  // [repeat], empty without a Z basis

  std::size_t repeats() const { return values.size(); }

  double mean(std::size_t i) const {
    double s = 0.0;
    for (const auto& v : values) s += v[i];
    return s / static_cast<double>(values.size());
  }

  /// Sample standard deviation over repeats (0 for a single repeat).
  double stddev(std::size_t i) const {
    if (values.size() < 2) return 0.0;
    const double m = mean(i);
    double s = 0.0;
    for (const auto& v : values) s += (v[i] - m) * (v[i] - m);
    return std::sqrt(s / static_cast<double>(values.size() - 1));
  }

  /// Standard error of mean(i): from the repeat spread when there are several
  /// repeats, otherwise the single-run binomial value sqrt((1 - m^2) / shots).
  double stderr_of(std::size_t i) const {
    if (values.size() >= 2) return stddev(i) / std::sqrt(static_cast<double>(values.size()));
    const double m = mean(i);
    return std::sqrt(std::max(0.0, 1.0 - m * m) / static_cast<double>(shots));
  }
};

/// Shot-based estimate of every plan string. Basis b of repeat r samples from
/// the stream derive_seed(derive_seed(seed, r), b), so results do not depend
/// on evaluation order.
inline Estimates estimate(const QuantumState& state, const MeasurementPlan& plan, std::uint64_t shots,
                          std::size_t repeats, std::uint64_t seed) {
  if (shots == 0) throw Error("estimate: shots must be at least 1");
  if (repeats == 0) throw Error("estimate: repeats must be at least 1");
  if (plan.num_qubits != state.num_qubits()) throw Error("estimate: plan and state sizes differ");
  Estimates est;
  est.shots = shots;
  est.values.assign(repeats, std::vector<double>(plan.strings.size(), 0.0));
  const auto by_basis = plan.strings_by_basis();
  const auto zb = plan.z_basis();
  if (zb) est.z_histograms.resize(repeats);
  for (std::size_t b = 0; b < plan.bases.size(); ++b) {
    QuantumState rotated = state;
    rotate_to_basis(rotated, plan.bases[b]);
    for (std::size_t r = 0; r < repeats; ++r) {
      Rng rng(derive_seed(derive_seed(seed, r), b));
      auto hist = sample_histogram(rotated, shots, rng);
      for (std::size_t i : by_basis[b]) est.values[r][i] = parity_expectation(hist, plan.strings[i].support_mask(), shots);
      if (zb && *zb == b) est.z_histograms[r] = std::move(hist);
    }
  }
  return est;
}

/// Exact expectation of every plan string.
inline std::vector<double> exact_expectations(const QuantumState& state, const MeasurementPlan& plan) {
  std::vector<double> out;
  out.reserve(plan.strings.size());
  for (const PauliString& p : plan.strings) out.push_back(expectation_pauli(state, p));
  return out;
}

// ---------------------------------------------------------------------------
// Field reconstruction

/// rho and J of one encoded component, in unit-norm units.
struct ComponentFields {
  RealField rho, jx, jy;
};

/// Assembles J from string expectations (indexed like set.strings) and takes
/// rho as given.
inline ComponentFields component_fields(const ObservableSet& set, const std::vector<double>& expectations,
                                        RealField rho) {
  if (expectations.size() != set.strings.size()) throw Error("reconstruct: missing string expectations");
  if (rho.size() != set.grid.size()) throw Error("reconstruct: density size does not match grid");
  ComponentFields f{std::move(rho), RealField(set.grid.size(), 0.0), RealField(set.grid.size(), 0.0)};
  for (std::size_t p = 0; p < set.grid.size(); ++p) {
    for (const auto& [i, c] : set.jx[p]) f.jx[p] += c * expectations[i];
    for (const auto& [i, c] : set.jy[p]) f.jy[p] += c * expectations[i];
  }
  return f;
}

inline RealField density_from_histogram(const std::vector<std::uint32_t>& hist, std::uint64_t shots) {
  RealField rho(hist.size());
  for (std::size_t i = 0; i < hist.size(); ++i) rho[i] = static_cast<double>(hist[i]) / static_cast<double>(shots);
  return rho;
}

inline RealField exact_density(const QuantumState& state) {
  RealField rho(state.dimension());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(state[i]);
  return rho;
}

/// Combines per-component fields with weights ||psi_c||^2 / ||psi||^2 and
/// completes u and omega.
inline FlowFields reconstruct_fields(const Grid2D& grid, const std::vector<ComponentFields>& components,
                                     const std::vector<double>& weights) {
  if (components.empty() || components.size() != weights.size())
    throw Error("reconstruct: component and weight counts differ");
  RealField rho(grid.size(), 0.0), jx(grid.size(), 0.0), jy(grid.size(), 0.0);
  for (std::size_t c = 0; c < components.size(); ++c) {
    const ComponentFields& f = components[c];
    if (f.rho.size() != grid.size() || f.jx.size() != grid.size() || f.jy.size() != grid.size())
      throw Error("reconstruct: component field size does not match grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      rho[i] += weights[c] * f.rho[i];
      jx[i] += weights[c] * f.jx[i];
      jy[i] += weights[c] * f.jy[i];
    }
  }
  return assemble_flow(grid, std::move(rho), std::move(jx), std::move(jy));
}

/// Noiseless infinite-shot fields of encoded component states.
inline FlowFields exact_measured_fields(const ObservableSet& set, const MeasurementPlan& plan,
                                        const std::vector<QuantumState>& states, const std::vector<double>& weights) {
  std::vector<ComponentFields> comps;
  for (const QuantumState& s : states) comps.push_back(component_fields(set, exact_expectations(s, plan), exact_density(s)));
  return reconstruct_fields(set.grid, comps, weights);
}

/// Per-repeat fields from per-component estimates; the density comes from
/// the Z-basis histograms.
inline std::vector<FlowFields> fields_from_estimates(const ObservableSet& set, const std::vector<Estimates>& est,
                                                     const std::vector<double>& weights) {
  if (est.empty()) throw Error("reconstruct: no estimates");
  std::vector<FlowFields> out;
  for (std::size_t r = 0; r < est.front().repeats(); ++r) {
    std::vector<ComponentFields> comps;
    for (const Estimates& e : est) {
      if (e.z_histograms.size() <= r) throw Error("reconstruct: plan has no Z basis for the density");
      comps.push_back(component_fields(set, e.values[r], density_from_histogram(e.z_histograms[r], e.shots)));
    }
    out.push_back(reconstruct_fields(set.grid, comps, weights));
  }
  return out;
}

/// Shot estimates of each component; component c samples from the stream
/// derive_seed(seed, c).
inline std::vector<Estimates> estimate_components(const MeasurementPlan& plan, const std::vector<QuantumState>& states,
                                                  std::uint64_t shots, std::size_t repeats, std::uint64_t seed) {
  if (!plan.z_basis()) throw Error("reconstruct: plan has no Z basis for the density");
  std::vector<Estimates> est;
  for (std::size_t c = 0; c < states.size(); ++c) est.push_back(estimate(states[c], plan, shots, repeats, derive_seed(seed, c)));
  return est;
}

/// Sampled fields, one FlowFields per repeat.
inline std::vector<FlowFields> sampled_fields(const ObservableSet& set, const MeasurementPlan& plan,
                                              const std::vector<QuantumState>& states,
                                              const std::vector<double>& weights, std::uint64_t shots,
                                              std::size_t repeats, std::uint64_t seed) {
  return fields_from_estimates(set, estimate_components(plan, states, shots, repeats, seed), weights);
}

/// Mean of rho and J over repeats, with u and omega recomputed from the mean.
inline FlowFields mean_fields(const std::vector<FlowFields>& runs) {
  if (runs.empty()) throw Error("mean_fields: no runs");
  const Grid2D& g = runs.front().grid;
  RealField rho(g.size(), 0.0), jx(g.size(), 0.0), jy(g.size(), 0.0);
  const double w = 1.0 / static_cast<double>(runs.size());
  for (const FlowFields& f : runs)
    for (std::size_t i = 0; i < g.size(); ++i) {
      rho[i] += w * f.rho[i];
      jx[i] += w * f.jx[i];
      jy[i] += w * f.jy[i];
    }
  return assemble_flow(g, std::move(rho), std::move(jx), std::move(jy));
}

}  // namespace qflow

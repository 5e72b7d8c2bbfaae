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

#include <catch_amalgamated.hpp>

#include <set>

#include "qflow/measurement.hpp"
#include "qflow/oracle.hpp"
#include "test_support.hpp"

using namespace qflow;

namespace {

DenseMatrix dense_sum(const std::vector<PauliString>& terms) {
  DenseMatrix m(std::size_t{1} << terms.front().num_qubits());
  for (const PauliString& p : terms) {
    const DenseMatrix d = qflow::testing::pauli_dense(p.letters());
    for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] += p.coefficient() * d.data[i];
  }
  return m;
}

// <r|P|c> as a product of 2x2 letter entries, qubit 0 most significant.
cplx pauli_element(const std::string& letters, std::uint64_t r, std::uint64_t c) {
  const int n = static_cast<int>(letters.size());
  cplx v = 1.0;
  for (int q = 0; q < n; ++q) {
    const int bit = n - 1 - q;
    v *= qflow::testing::pauli_letter(letters[static_cast<std::size_t>(q)])((r >> bit) & 1, (c >> bit) & 1);
  }
  return v;
}

double pearson(const RealField& a, const RealField& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

const ObservableSet& full_set() {
  static const ObservableSet set = momentum_observable_set(Grid2D(5, 5), DiffScheme::OneSidedBoundary);
  return set;
}

}  // namespace

TEST_CASE("pauli_decompose on small matrices", "[measurement]") {
  SparseHermitian x(1);
  x.add_hermitian(0, 1, 1.0);
  auto terms = pauli_decompose(x);
  REQUIRE(terms.size() == 1);
  CHECK(terms[0].letters() == "X");
  CHECK(terms[0].coefficient() == 1.0);

  SparseHermitian p0(1);
  p0.add(0, 0, 1.0);
  terms = pauli_decompose(p0);
  REQUIRE(terms.size() == 2);
  CHECK(terms[0].letters() == "I");
  CHECK(terms[0].coefficient() == 0.5);
  CHECK(terms[1].letters() == "Z");
  CHECK(terms[1].coefficient() == 0.5);

  // The antisymmetric hop (i/2)(|1><0| - |0><1|) is Y / 2.
  SparseHermitian hop(1);
  hop.add_hermitian(1, 0, cplx(0, 0.5));
  terms = pauli_decompose(hop);
  REQUIRE(terms.size() == 1);
  CHECK(terms[0].letters() == "Y");
  CHECK(std::abs(terms[0].coefficient() - 0.5) < 1e-15);

  SparseHermitian bad(2);
  bad.add(0, 1, 1.0);
  CHECK_THROWS_AS(pauli_decompose(bad), Error);
}

TEST_CASE("pauli_decompose rebuilds random sparse operators", "[measurement][property]") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 6;
    SparseHermitian op(n);
    const std::uint64_t dim = op.dimension();
    for (int e = 0; e < 5; ++e)
      op.add_hermitian(rng.next() % dim, rng.next() % dim, cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)));
    if (op.entries().empty()) continue;
    const auto terms = pauli_decompose(op);
    CHECK(max_abs_diff(dense_sum(terms), op.to_dense()) < 1e-12);
  }
}

TEST_CASE("density observables", "[measurement]") {
  const Grid2D g(2, 2);
  const SparseHermitian p = density_observable(g, 0, 0);
  CHECK(p.entries().size() == 1);
  CHECK(p.at(0, 0) == cplx(1.0));

  QuantumState uniform(4);
  for (int q = 0; q < 4; ++q) apply_gate(uniform, Gate::h(q));
  CHECK(std::abs(expectation_pauli(uniform, PauliString("IIII")) - 1.0) < 1e-15);
  const auto terms = pauli_decompose(p);
  double e = 0.0;
  for (const auto& t : terms) e += t.coefficient() * expectation_pauli(uniform, t);
  CHECK(std::abs(e - 1.0 / 16) < 1e-15);

  DenseMatrix sum(16);
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t l = 0; l < 4; ++l) {
      const DenseMatrix d = density_observable(g, m, l).to_dense();
      for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += d.data[i];
    }
  CHECK(max_abs_diff(sum, DenseMatrix::identity(16)) == 0.0);
  CHECK_THROWS_AS(density_observable(g, 4, 0), Error);

  const Grid2D g5(5, 5);
  const WaveField psi = init_diverging(g5);
  const EncodedField enc = encode(psi);
  for (std::size_t m : {0u, 7u, 16u, 31u})
    for (std::size_t l : {0u, 5u, 30u}) {
      const auto obs = density_observable(g5, m, l);
      const auto [idx, val] = *obs.entries().begin();
      CHECK(idx.first == 32 * m + l);
      const double expect = std::norm(psi.components[0][g5.index(l, m)]) / (enc.norms[0] * enc.norms[0]);
      CHECK(std::abs(std::norm(enc.states[0][idx.first]) - expect) < 1e-12);
    }
}

TEST_CASE("momentum observables match finite differences", "[measurement]") {
  Rng rng(5);
  for (auto scheme : {DiffScheme::PeriodicCentral, DiffScheme::OneSidedBoundary}) {
    const Grid2D g(3, 2);
    const QuantumState s = qflow::testing::random_state(g.num_qubits(), rng);
    const VectorField j = momentum_fd(decode(s, g, 1.0), scheme);
    for (std::size_t m = 0; m < g.Ny(); ++m)
      for (std::size_t l = 0; l < g.Nx(); ++l) {
        const auto [ox, oy] = momentum_observable(g, m, l, scheme);
        CHECK(ox.is_hermitian());
        CHECK(oy.is_hermitian());
        const auto dx = ox.to_dense(), dy = oy.to_dense();
        CHECK(max_abs_diff(dx, dx.adjoint()) == 0.0);
        const auto vx = qflow::testing::mat_vec(dx, s.amplitudes());
        const auto vy = qflow::testing::mat_vec(dy, s.amplitudes());
        cplx ex{}, ey{};
        for (std::size_t i = 0; i < s.dimension(); ++i) {
          ex += std::conj(s[i]) * vx[i];
          ey += std::conj(s[i]) * vy[i];
        }
        CHECK(std::abs(ex.real() - j.x[g.index(l, m)]) < 1e-12);
        CHECK(std::abs(ey.real() - j.y[g.index(l, m)]) < 1e-12);
        CHECK(max_abs_diff(dense_sum(pauli_decompose(ox)), dx) < 1e-12);
        CHECK(max_abs_diff(dense_sum(pauli_decompose(oy)), dy) < 1e-12);
      }
  }
  CHECK_THROWS_AS(momentum_observable(Grid2D(2, 2), 0, 4, DiffScheme::PeriodicCentral), Error);
}

TEST_CASE("plane-wave total momentum", "[measurement]") {
  const Grid2D g(4, 3);
  WaveField plane{g, {std::vector<cplx>(g.size())}, {}};
  for (std::size_t l = 0; l < g.Ny(); ++l)
    for (std::size_t k = 0; k < g.Nx(); ++k) plane.components[0][g.index(k, l)] = std::polar(1.0, g.x(k));
  const EncodedField enc = encode(plane);
  const ObservableSet set = momentum_observable_set(g, DiffScheme::PeriodicCentral);
  const MeasurementPlan plan = momentum_plan(set);
  const FlowFields f = exact_measured_fields(set, plan, enc.states, enc.weights());
  double jx = 0.0;
  for (double v : f.jx) jx += v;
  jx *= g.dx() * g.dy();
  CHECK(std::abs(jx - std::sin(g.dx()) / g.dx() * mass(f.rho, g)) < 1e-12);
}

TEST_CASE("10-qubit momentum set", "[measurement][counts]") {
  const ObservableSet& set = full_set();
  CHECK(set.size() == 5120);
  std::set<std::string> unique;
  for (const auto& s : set.strings) unique.insert(s.letters());
  CHECK(unique.size() == 5120);

  SECTION("spot-check matrix elements") {
    Rng rng(3);
    const Grid2D& g = set.grid;
    for (int trial = 0; trial < 6; ++trial) {
      const std::size_t m = rng.next() % 32, l = rng.next() % 32;
      const auto [ox, oy] = momentum_observable(g, m, l, DiffScheme::OneSidedBoundary);
      const auto& terms = set.jx[g.index(l, m)];
      // Every stored entry plus a random off-support element.
      std::vector<std::pair<std::uint64_t, std::uint64_t>> probes;
      for (const auto& [rc, v] : ox.entries()) probes.push_back(rc);
      probes.emplace_back(rng.next() % 1024, rng.next() % 1024);
      for (const auto& [r, c] : probes) {
        cplx v{};
        for (const auto& [i, coef] : terms) v += coef * pauli_element(set.strings[i].letters(), r, c);
        CHECK(std::abs(v - ox.at(r, c)) < 1e-12);
      }
    }
  }

  SECTION("grouping") {
    const MeasurementPlan plan = group_bases(set.strings);
    CHECK(plan.bases.size() == 62);
    std::set<std::string> distinct(plan.bases.begin(), plan.bases.end());
    CHECK(distinct.size() == plan.bases.size());
    for (std::size_t i = 0; i < plan.strings.size(); ++i) CHECK(basis_covers(plan.bases[plan.assignment[i]], plan.strings[i].letters()));
    MeasurementPlan full = momentum_plan(set);
    CHECK(full.bases.size() == 63);
    CHECK(full.z_basis().has_value());
  }

  SECTION("periodic scheme counts") {
    const ObservableSet per = momentum_observable_set(Grid2D(5, 5), DiffScheme::PeriodicCentral);
    CHECK(per.size() == 5120);
    CHECK(group_bases(per.strings).bases.size() == 62);
  }
}

TEST_CASE("group_bases small cases", "[measurement]") {
  auto plan = group_bases({PauliString("ZI"), PauliString("IZ"), PauliString("ZZ")});
  CHECK(plan.bases == std::vector<std::string>{"ZZ"});
  plan = group_bases({PauliString("XI"), PauliString("IZ")});
  CHECK(plan.bases == std::vector<std::string>{"XZ"});
  plan = group_bases({PauliString("XI"), PauliString("ZI")});
  CHECK(plan.bases.size() == 2);
  plan = group_bases({PauliString("IX")});
  CHECK(plan.bases == std::vector<std::string>{"ZX"});
  CHECK(plan.ensure_z_basis() == 1);
  CHECK(plan.ensure_z_basis() == 1);
  CHECK_THROWS_AS(group_bases({PauliString("X"), PauliString("XX")}), Error);
  CHECK(group_bases({}).bases.empty());
}

TEST_CASE("estimate", "[measurement][sampling]") {
  SECTION("basis states give exact parities") {
    const QuantumState s = QuantumState::basis(3, 0b101);
    const MeasurementPlan plan = group_bases({PauliString("ZII"), PauliString("IZI"), PauliString("ZIZ")});
    const Estimates e = estimate(s, plan, 1000, 2, 7);
    CHECK(e.mean(0) == -1.0);
    CHECK(e.mean(1) == 1.0);
    CHECK(e.mean(2) == 1.0);
    CHECK(e.stddev(0) == 0.0);
  }
  SECTION("random states agree with exact expectations") {
    Rng rng(23);
    std::vector<PauliString> strings;
    for (const char* p : {"ZZZZ", "XIXI", "YYZI", "IXYZ", "XXXX", "ZIIZ"}) strings.emplace_back(p);
    const MeasurementPlan plan = group_bases(strings);
    for (int trial = 0; trial < 5; ++trial) {
      const QuantumState s = qflow::testing::random_state(4, rng);
      const Estimates e = estimate(s, plan, 100000, 1, 100 + static_cast<std::uint64_t>(trial));
      for (std::size_t i = 0; i < strings.size(); ++i) {
        const double truth = expectation_pauli(s, strings[i]);
        CHECK(std::abs(e.mean(i) - truth) < 5 * std::max(e.stderr_of(i), 1e-3));
      }
    }
  }
  SECTION("unbiased over 200 seeds") {
    Rng rng(29);
    const QuantumState s = qflow::testing::random_state(3, rng);
    const MeasurementPlan plan = group_bases({PauliString("XYZ"), PauliString("YIX")});
    const Estimates e = estimate(s, plan, 2000, 200, 5);
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(std::abs(e.mean(i) - expectation_pauli(s, plan.strings[i])) < 5 * e.stderr_of(i));
  }
  SECTION("reproducible and order independent") {
    Rng rng(1);
    const QuantumState s = qflow::testing::random_state(3, rng);
    MeasurementPlan plan = group_bases({PauliString("XYZ"), PauliString("ZZZ")});
    const Estimates a = estimate(s, plan, 500, 3, 11);
    CHECK(a.values == estimate(s, plan, 500, 3, 11).values);
    // Dropping a repeat does not change the others.
    CHECK(estimate(s, plan, 500, 2, 11).values[1] == a.values[1]);
    CHECK(a.z_histograms.size() == 3);
  }
  SECTION("errors") {
    const MeasurementPlan plan = group_bases({PauliString("ZZ")});
    CHECK_THROWS_AS(estimate(QuantumState(2), plan, 0, 1, 1), Error);
    CHECK_THROWS_AS(estimate(QuantumState(3), plan, 10, 1, 1), Error);
    CHECK_THROWS_AS(estimate(QuantumState(2), plan, 10, 0, 1), Error);
  }
}

TEST_CASE("field reconstruction", "[measurement]") {
  const ObservableSet& set = full_set();
  const MeasurementPlan plan = momentum_plan(set);
  const Grid2D& g = set.grid;

  SECTION("exact path equals finite differences for both flows") {
    for (FlowKind flow : {FlowKind::Diverging, FlowKind::Vortex}) {
      const WaveField psi = spectral_evolve(initial_field(flow, g), kPi / 4);
      const EncodedField enc = encode(psi);
      const FlowFields measured = exact_measured_fields(set, plan, enc.states, enc.weights());
      const FlowFields ref = flow_fields(normalized(psi), DiffScheme::OneSidedBoundary);
      for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(measured.rho[i] - ref.rho[i]) < 1e-12);
        CHECK(std::abs(measured.jx[i] - ref.jx[i]) < 1e-10);
        CHECK(std::abs(measured.jy[i] - ref.jy[i]) < 1e-10);
      }
    }
  }

  SECTION("sampled density of the diverging flow") {
    const EncodedField enc = encode(init_diverging(g));
    MeasurementPlan zonly;
    zonly.num_qubits = g.num_qubits();
    zonly.ensure_z_basis();
    const Estimates e = estimate(enc.states[0], zonly, 100000, 5, 3);
    const RealField exact = exact_density(enc.states[0]);
    // One table: 1 - r ~ var_noise / (2 var_signal) ~ 3.4e-3 for this profile.
    const double single = pearson(density_from_histogram(e.z_histograms[0], 100000), exact);
    CHECK(single > 0.995);
    CHECK(single < 0.998);
    RealField pooled(g.size(), 0.0);
    for (const auto& h : e.z_histograms) {
      const RealField r = density_from_histogram(h, 100000);
      for (std::size_t i = 0; i < g.size(); ++i) pooled[i] += r[i] / 5.0;
    }
    CHECK(pearson(pooled, exact) >= 0.999);
  }

  SECTION("real state has no sampled momentum") {
    Rng rng(2);
    std::vector<cplx> a(g.size());
    for (cplx& v : a) v = rng.uniform(0.5, 1.0);
    const QuantumState s = QuantumState::from_amplitudes(a, true);
    const auto runs = sampled_fields(set, plan, {s}, {1.0}, 20000, 3, 9);
    REQUIRE(runs.size() == 3);
    double mean = 0.0, sq = 0.0;
    for (const auto& r : runs)
      for (double v : r.jx) {
        mean += v;
        sq += v * v;
      }
    const double n = 3.0 * static_cast<double>(g.size());
    mean /= n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean) < 5 * sd / std::sqrt(n));
  }

  SECTION("errors") {
    CHECK_THROWS_AS(component_fields(set, {1.0, 2.0}, RealField(g.size())), Error);
    MeasurementPlan no_z = group_bases(set.strings);
    CHECK_THROWS_AS(sampled_fields(set, no_z, {QuantumState(10)}, {1.0}, 10, 1, 1), Error);
  }
}

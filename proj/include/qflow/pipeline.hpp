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
 * @file pipeline.hpp
 * @brief End-to-end runs: encode, evolve, measure, reconstruct, compare.
 */
#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qflow/circuit_io.hpp"
#include "qflow/circuits.hpp"
#include "qflow/io.hpp"
#include "qflow/measurement.hpp"
#include "qflow/noise.hpp"
#include "qflow/oracle.hpp"
#include "qflow/transpile.hpp"

namespace qflow {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Configuration

/// Where errors are injected: the evolution circuit only (the state is
/// prepared exactly) or the whole prepare-and-evolve circuit.
enum class NoiseStage { Evolution, Full };
/// Gate set the circuits are executed in.
enum class CircuitForm { Native, Logical };
enum class TopologyKind { AllToAll, Ladder, Line };

inline std::string to_string(NoiseStage s) { return s == NoiseStage::Evolution ? "evolution" : "full"; }
inline std::string to_string(CircuitForm f) { return f == CircuitForm::Native ? "native" : "logical"; }
inline std::string to_string(TopologyKind t) {
  return t == TopologyKind::AllToAll ? "all-to-all" : t == TopologyKind::Ladder ? "ladder" : "line";
}
inline std::string to_string(VortexVariant v) { return v == VortexVariant::FullCore ? "full-core" : "null-core"; }

inline NoiseStage noise_stage_from_string(const std::string& s) {
  if (s == "evolution") return NoiseStage::Evolution;
  if (s == "full") return NoiseStage::Full;
  throw ConfigError("unknown noise stage '" + s + "'");
}
inline CircuitForm circuit_form_from_string(const std::string& s) {
  if (s == "native") return CircuitForm::Native;
  if (s == "logical") return CircuitForm::Logical;
  throw ConfigError("unknown circuit form '" + s + "'");
}
inline TopologyKind topology_from_string(const std::string& s) {
  if (s == "all-to-all") return TopologyKind::AllToAll;
  if (s == "ladder") return TopologyKind::Ladder;
  if (s == "line") return TopologyKind::Line;
  throw ConfigError("unknown topology '" + s + "'");
}
inline VortexVariant vortex_variant_from_string(const std::string& s) {
  if (s == "full-core") return VortexVariant::FullCore;
  if (s == "null-core") return VortexVariant::NullCore;
  throw ConfigError("unknown vortex variant '" + s + "'");
}

/// Parses "0.5", "pi", "-pi/2", "3pi/8", "3*pi/8", "0.25pi".
inline double parse_time(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '*') s += c;
  auto number = [&](const std::string& part, double empty) -> double {
    if (part.empty()) return empty;
    if (part == "-") return -empty;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad time '" + text + "'");
    }
    if (used != part.size()) throw ConfigError("bad time '" + text + "'");
    return v;
  };
  double value = 0.0;
  const auto pi = s.find("pi");
  if (pi == std::string::npos) {
    value = number(s, std::numeric_limits<double>::quiet_NaN());
  } else {
    const double coef = number(s.substr(0, pi), 1.0);
    const std::string rest = s.substr(pi + 2);
    double div = 1.0;
    if (!rest.empty()) {
      if (rest[0] != '/') throw ConfigError("bad time '" + text + "'");
      div = number(rest.substr(1), std::numeric_limits<double>::quiet_NaN());
      if (div == 0.0) throw ConfigError("bad time '" + text + "'");
    }
    value = coef * kPi / div;
  }
  if (!std::isfinite(value)) throw ConfigError("bad time '" + text + "'");
  return value;
}

inline std::vector<double> parse_times(const std::string& list) {
  std::vector<double> out;
  for (const auto& item : io_detail::split(list, ',')) out.push_back(parse_time(item));
  if (out.empty()) throw ConfigError("no times given");
  return out;
}

struct RunConfig {
  FlowKind flow = FlowKind::Diverging;
  int nx = 5, ny = 5;
  std::vector<double> times{0.0, kPi / 4, kPi / 2};
  std::uint64_t shots = 100000;
  std::size_t repeats = 5;
  std::uint64_t seed = 20240611;
  DiffScheme scheme = DiffScheme::OneSidedBoundary;
  bool exact = false;
  std::optional<ErrorModel> error_model;
  NoiseStage noise_stage = NoiseStage::Evolution;
  CircuitForm circuit_form = CircuitForm::Native;
  TopologyKind topology = TopologyKind::AllToAll;
  FlowParams flow_params;
  std::filesystem::path out = "qflow-out";  // not part of the hashed config

  Grid2D grid() const { return Grid2D(nx, ny); }
  int num_qubits() const { return nx + ny; }

  /// `sweep` accepts a fixed error model without targets.
  void validate(bool sweep = false) const {
    if (nx < 1 || ny < 1 || nx + ny > 16) throw ConfigError("grid: need nx, ny >= 1 and nx + ny <= 16");
    if (times.empty()) throw ConfigError("no times given");
    for (double t : times)
      if (!std::isfinite(t)) throw ConfigError("times must be finite");
    if (!exact && shots < 1) throw ConfigError("shots must be at least 1 when sampling");
    if (!exact && shots > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("shots too large");
    if (repeats < 1) throw ConfigError("repeats must be at least 1");
    if (!(flow_params.width > 0.0) || !(flow_params.r0 > 0.0)) throw ConfigError("flow parameters must be positive");
    if (topology == TopologyKind::Ladder && num_qubits() % 2 != 0)
      throw ConfigError("ladder topology needs an even number of qubits");
    if (error_model) {
      error_model->validate(!sweep);
      for (int q : error_model->targets)
        if (q >= num_qubits()) throw ConfigError("error model: target qubit outside the register");
    }
  }
};

inline json config_to_json(const RunConfig& c) {
  json j;
  j["flow"] = to_string(c.flow);
  j["nx"] = c.nx;
  j["ny"] = c.ny;
  j["times"] = c.times;
  j["shots"] = c.shots;
  j["repeats"] = c.repeats;
  j["seed"] = c.seed;
  j["scheme"] = to_string(c.scheme);
  j["exact"] = c.exact;
  j["error_model"] = c.error_model ? error_model_to_json(*c.error_model) : json(nullptr);
  j["noise_stage"] = to_string(c.noise_stage);
  j["circuit_form"] = to_string(c.circuit_form);
  j["topology"] = to_string(c.topology);
  j["width"] = c.flow_params.width;
  j["r0"] = c.flow_params.r0;
  j["vortex_variant"] = to_string(c.flow_params.variant);
  return j;
}

/// Overrides the fields of `base` present in `j`. A run manifest (an object
/// with a "config" member) is accepted as well. Relative error-model paths
/// resolve against `dir`.
inline RunConfig config_from_json(const json& input, RunConfig base = {}, const std::filesystem::path& dir = {}) {
  const json& j = input.is_object() && input.contains("config") && input.contains("manifest_version") ? input["config"] : input;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::set<std::string> keys{"flow",  "nx",     "ny",          "times",          "shots",
                                          "repeats", "seed", "scheme",      "exact",          "error_model",
                                          "noise_stage", "circuit_form", "topology", "width", "r0",
                                          "vortex_variant", "out"};
  for (const auto& [k, v] : j.items())
    if (!keys.contains(k)) throw ConfigError("config: unknown key '" + k + "'");
  RunConfig c = std::move(base);
  try {
    if (j.contains("flow")) c.flow = flow_kind_from_string(j["flow"].get<std::string>());
    if (j.contains("nx")) c.nx = j["nx"].get<int>();
    if (j.contains("ny")) c.ny = j["ny"].get<int>();
    if (j.contains("times")) {
      const json& t = j["times"];
      if (t.is_string()) {
        c.times = parse_times(t.get<std::string>());
      } else {
        c.times.clear();
        for (const auto& v : t) c.times.push_back(v.is_string() ? parse_time(v.get<std::string>()) : v.get<double>());
      }
    }
    if (j.contains("shots")) c.shots = j["shots"].get<std::uint64_t>();
    if (j.contains("repeats")) c.repeats = j["repeats"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("scheme")) c.scheme = diff_scheme_from_string(j["scheme"].get<std::string>());
    if (j.contains("exact")) c.exact = j["exact"].get<bool>();
    if (j.contains("error_model")) {
      const json& e = j["error_model"];
      if (e.is_null()) c.error_model.reset();
      else if (e.is_string()) c.error_model = error_model_from_json(read_json_file(dir / e.get<std::string>()));
      else c.error_model = error_model_from_json(e);
    }
    if (j.contains("noise_stage")) c.noise_stage = noise_stage_from_string(j["noise_stage"].get<std::string>());
    if (j.contains("circuit_form")) c.circuit_form = circuit_form_from_string(j["circuit_form"].get<std::string>());
    if (j.contains("topology")) c.topology = topology_from_string(j["topology"].get<std::string>());
    if (j.contains("width")) c.flow_params.width = j["width"].get<double>();
    if (j.contains("r0")) c.flow_params.r0 = j["r0"].get<double>();
    if (j.contains("vortex_variant")) c.flow_params.variant = vortex_variant_from_string(j["vortex_variant"].get<std::string>());
    if (j.contains("out")) c.out = j["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate(true);
  return c;
}

inline json versions_json() {
  std::ostringstream js;
  js << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.' << NLOHMANN_JSON_VERSION_PATCH;
  return {{"qflow", kVersion}, {"nlohmann_json", js.str()}, {"compiler", __VERSION__}};
}

// ---------------------------------------------------------------------------
// Circuits

inline Topology make_topology(TopologyKind kind, int n) {
  switch (kind) {
    case TopologyKind::AllToAll: return Topology::all_to_all(n);
    case TopologyKind::Ladder: return Topology::ladder(n / 2);
    case TopologyKind::Line: return Topology::line(n);
  }
  throw Error("unknown topology");
}

/// Preparation and evolution circuits of one component in the configured form.
struct ComponentCircuits {
  Circuit prepare, evolve;
  Circuit executed;  // prepare + evolve with errors injected
  std::size_t error_gates = 0;
};

inline ComponentCircuits component_circuits(const RunConfig& cfg, const QuantumState& encoded, double t) {
  const int n = cfg.num_qubits();
  ComponentCircuits cc{amplitude_encode(encoded), build_evolution(cfg.nx, cfg.ny, t), Circuit(n, "executed"), 0};
  if (cfg.circuit_form == CircuitForm::Native) {
    const Topology topo = make_topology(cfg.topology, n);
    cc.prepare = transpile(cc.prepare, topo);
    cc.evolve = transpile(cc.evolve, topo);
  }
  if (!cfg.error_model) {
    cc.executed.append(cc.prepare).append(cc.evolve);
  } else if (cfg.noise_stage == NoiseStage::Evolution) {
    cc.executed.append(cc.prepare).append(inject(cc.evolve, *cfg.error_model));
    cc.error_gates = count_single_qubit_gates(cc.evolve, *cfg.error_model);
  } else {
    Circuit both(n);
    both.append(cc.prepare).append(cc.evolve);
    cc.executed.append(inject(both, *cfg.error_model));
    cc.error_gates = count_single_qubit_gates(both, *cfg.error_model);
  }
  return cc;
}

/// Runs the circuit from |0...0> and restores the phase the evolution
/// circuit leaves out, so the result lines up with the spectral oracle.
inline QuantumState execute(const Circuit& c) {
  QuantumState s = run_circuit(c);
  if (c.dropped_phase() != 0.0) {
    const cplx p = std::polar(1.0, c.dropped_phase());
    for (std::size_t i = 0; i < s.dimension(); ++i) s[i] *= p;
  }
  return s;
}

// ---------------------------------------------------------------------------
// One time point

struct TimeResult {
  double t = 0.0;
  std::vector<QuantumState> states;        // circuit outputs, one per component
  std::vector<GateCountReport> prepare_counts, evolve_counts;
  std::vector<std::size_t> error_gates;
  std::vector<double> oracle_deviation;     // max amplitude deviation up to phase
  std::vector<double> weights;
  std::vector<Estimates> estimates;         // sampled path
  std::vector<std::vector<double>> exact_values;  // exact path
  std::vector<FlowFields> runs;             // one per repeat (one on the exact path)
  FlowFields measured;                      // mean over runs
  FlowFields oracle;
};

/// Holds the observable set and plan, which depend only on grid and scheme.
class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const RunConfig& config() const { return cfg_; }

  /// Pipeline for another config that reuses this one's observable set and
  /// plan when grid and scheme agree.
  Pipeline rebind(RunConfig cfg) const {
    Pipeline p(std::move(cfg));
    if (p.cfg_.nx == cfg_.nx && p.cfg_.ny == cfg_.ny && p.cfg_.scheme == cfg_.scheme) {
      p.set_ = set_;
      p.plan_ = plan_;
    }
    return p;
  }

  const ObservableSet& observables() {
    if (!set_) set_ = std::make_shared<ObservableSet>(momentum_observable_set(cfg_.grid(), cfg_.scheme));
    return *set_;
  }

  const MeasurementPlan& plan() {
    if (!plan_) plan_ = std::make_shared<MeasurementPlan>(momentum_plan(observables()));
    return *plan_;
  }

  /// Time index i samples with seed derive_seed(config seed, i).
  TimeResult run_time(std::size_t i) {
    const Grid2D grid = cfg_.grid();
    TimeResult r;
    r.t = cfg_.times.at(i);
    const WaveField psi0 = normalized(initial_field(cfg_.flow, grid, cfg_.flow_params));
    const EncodedField enc = encode(psi0);
    r.weights = enc.weights();
    const WaveField evolved = spectral_evolve(psi0, r.t);
    r.oracle = flow_fields(evolved, cfg_.scheme);
    const EncodedField ref = encode(evolved);
    for (std::size_t c = 0; c < enc.states.size(); ++c) {
      const ComponentCircuits cc = component_circuits(cfg_, enc.states[c], r.t);
      r.states.push_back(execute(cc.executed));
      r.prepare_counts.push_back(gate_count_report(cc.prepare));
      r.evolve_counts.push_back(gate_count_report(cc.evolve));
      r.error_gates.push_back(cc.error_gates);
      r.oracle_deviation.push_back(max_deviation_up_to_phase(r.states.back(), ref.states[c]));
    }
    const ObservableSet& set = observables();
    if (cfg_.exact) {
      std::vector<ComponentFields> comps;
      for (const QuantumState& s : r.states) {
        r.exact_values.push_back(exact_expectations(s, plan()));
        comps.push_back(component_fields(set, r.exact_values.back(), exact_density(s)));
      }
      r.runs.push_back(reconstruct_fields(grid, comps, r.weights));
    } else {
      r.estimates = estimate_components(plan(), r.states, cfg_.shots, cfg_.repeats, derive_seed(cfg_.seed, i));
      r.runs = fields_from_estimates(set, r.estimates, r.weights);
    }
    r.measured = r.runs.size() == 1 ? r.runs.front() : mean_fields(r.runs);
    return r;
  }

 private:
  RunConfig cfg_;
  std::shared_ptr<ObservableSet> set_;
  std::shared_ptr<MeasurementPlan> plan_;
};

// ---------------------------------------------------------------------------
// Summaries

/// Pearson r, or NaN when either field is constant.
inline double safe_pearson(const RealField& a, const RealField& b) {
  try {
    return pearson(a, b);
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// Like correlation_report, but NaN for fields that vanish in the reference
/// (|f| < 1e-12 everywhere), where r would only measure rounding noise.
inline CorrelationReport safe_correlations(const FlowFields& measured, const FlowFields& exact) {
  auto r = [](const RealField& a, const RealField& b) {
    double peak = 0.0;
    for (double v : b) peak = std::max(peak, std::abs(v));
    return peak < 1e-12 ? std::numeric_limits<double>::quiet_NaN() : safe_pearson(a, b);
  };
  return {r(measured.rho, exact.rho), r(measured.jx, exact.jx), r(measured.jy, exact.jy)};
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Mean and sample standard deviation of a per-repeat profile.
struct ProfileStats {
  RealField mean, stddev;
};

template <typename F>
ProfileStats profile_stats(const std::vector<FlowFields>& runs, F&& profile) {
  std::vector<RealField> p;
  for (const FlowFields& f : runs) p.push_back(profile(f));
  ProfileStats s{RealField(p.front().size(), 0.0), RealField(p.front().size(), 0.0)};
  const double n = static_cast<double>(p.size());
  for (const auto& v : p)
    for (std::size_t i = 0; i < v.size(); ++i) s.mean[i] += v[i] / n;
  if (p.size() > 1)
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      double a = 0.0;
      for (const auto& v : p) a += (v[i] - s.mean[i]) * (v[i] - s.mean[i]);
      s.stddev[i] = std::sqrt(a / (n - 1.0));
    }
  return s;
}

inline json gate_counts_json(const GateCountReport& r) {
  json k = json::object();
  for (const auto& [kind, count] : r.by_kind) k[to_string(kind)] = count;
  return {{"single_qubit", r.single_qubit}, {"two_qubit", r.two_qubit}, {"multi_qubit", r.multi_qubit},
          {"total", r.total()},             {"depth", r.depth},         {"by_kind", k}};
}

// ---------------------------------------------------------------------------
// Commands

/// Writes every artifact of one time point; returns its manifest.
inline json write_time_point(const std::filesystem::path& dir, std::size_t i, const TimeResult& r,
                             const MeasurementPlan& plan) {
  const Grid2D& g = r.oracle.grid;
  const std::string tag = "t" + std::to_string(i);
  std::vector<std::string> files;
  auto fields_csv = [&](const std::string& name, const FlowFields& f) {
    write_real_fields_csv(dir / name, g, {"rho", "jx", "jy", "ux", "uy", "omega"},
                          {&f.rho, &f.jx, &f.jy, &f.ux, &f.uy, &f.omega});
    files.push_back(name);
  };
  fields_csv("fields_" + tag + ".csv", r.measured);
  fields_csv("oracle_" + tag + ".csv", r.oracle);
  for (std::size_t c = 0; c < r.states.size(); ++c) {
    const std::string psi = "psi_" + tag + "_c" + std::to_string(c) + ".csv";
    write_complex_field_csv(dir / psi, g, std::vector<cplx>(r.states[c].amplitudes().begin(), r.states[c].amplitudes().end()));
    files.push_back(psi);
    const std::string res = "results_" + tag + "_c" + std::to_string(c) + ".csv";
    if (r.estimates.empty()) write_results_csv(dir / res, plan, r.exact_values[c]);
    else write_results_csv(dir / res, plan, r.estimates[c]);
    files.push_back(res);
  }

  {
    const auto rho = profile_stats(r.runs, [&](const FlowFields& f) { return x_average(f.rho, g); });
    const auto jx = profile_stats(r.runs, [&](const FlowFields& f) { return x_average(f.jx, g); });
    const auto jy = profile_stats(r.runs, [&](const FlowFields& f) { return x_average(f.jy, g); });
    const RealField orho = x_average(r.oracle.rho, g), ojx = x_average(r.oracle.jx, g), ojy = x_average(r.oracle.jy, g);
    const std::string name = "profile_x_" + tag + ".csv";
    auto os = io_detail::open_out(dir / name);
    os << "y,rho_mean,rho_std,rho_oracle,jx_mean,jx_std,jx_oracle,jy_mean,jy_std,jy_oracle\n";
    for (std::size_t l = 0; l < g.Ny(); ++l)
      os << io_detail::num(g.y(l)) << ',' << io_detail::num(rho.mean[l]) << ',' << io_detail::num(rho.stddev[l]) << ','
         << io_detail::num(orho[l]) << ',' << io_detail::num(jx.mean[l]) << ',' << io_detail::num(jx.stddev[l]) << ','
         << io_detail::num(ojx[l]) << ',' << io_detail::num(jy.mean[l]) << ',' << io_detail::num(jy.stddev[l]) << ','
         << io_detail::num(ojy[l]) << '\n';
    files.push_back(name);
  }
  {
    std::vector<std::size_t> counts;
    const RealField oracle = theta_average(r.oracle.omega, g, &counts);
    const auto w = profile_stats(r.runs, [&](const FlowFields& f) { return theta_average(f.omega, g); });
    const std::string name = "profile_theta_" + tag + ".csv";
    auto os = io_detail::open_out(dir / name);
    os << "r,count,omega_mean,omega_std,omega_oracle\n";
    for (std::size_t b = 0; b < oracle.size(); ++b)
      os << io_detail::num((static_cast<double>(b) + 0.5) * g.dx()) << ',' << counts[b] << ','
         << io_detail::num(w.mean[b]) << ',' << io_detail::num(w.stddev[b]) << ',' << io_detail::num(oracle[b]) << '\n';
    files.push_back(name);
  }

  const CorrelationReport corr = safe_correlations(r.measured, r.oracle);
  double field_dev = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    field_dev = std::max(field_dev, std::abs(r.measured.rho[p] - r.oracle.rho[p]));
    field_dev = std::max(field_dev, std::abs(r.measured.jx[p] - r.oracle.jx[p]));
    field_dev = std::max(field_dev, std::abs(r.measured.jy[p] - r.oracle.jy[p]));
  }
  json m;
  m["time"] = r.t;
  m["files"] = files;
  m["weights"] = r.weights;
  json comps = json::array();
  for (std::size_t c = 0; c < r.states.size(); ++c)
    comps.push_back({{"prepare_gates", gate_counts_json(r.prepare_counts[c])},
                     {"evolve_gates", gate_counts_json(r.evolve_counts[c])},
                     {"error_gates", r.error_gates[c]},
                     {"oracle_deviation", r.oracle_deviation[c]}});
  m["components"] = std::move(comps);
  m["mass"] = mass(r.measured.rho, g);
  m["conservation_residual"] = std::abs(mass(r.measured.rho, g) - mass(r.oracle.rho, g));
  m["oracle_mass_residual"] = std::abs(mass(r.oracle.rho, g) - 1.0);
  m["correlation"] = {{"rho", number_or_null(corr.rho)}, {"jx", number_or_null(corr.jx)}, {"jy", number_or_null(corr.jy)}};
  m["max_field_deviation"] = field_dev;
  m["kinetic_energy"] = {{"measured", kinetic_energy(r.measured)}, {"oracle", kinetic_energy(r.oracle)}};
  m["enstrophy"] = {{"measured", enstrophy(r.measured)}, {"oracle", enstrophy(r.oracle)}};
  return m;
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error("cannot create output directory '" + dir.string() + "'");
}

inline json base_manifest(const RunConfig& cfg, const std::string& command) {
  const json config = config_to_json(cfg);
  json m;
  m["manifest_version"] = 1;
  m["command"] = command;
  m["config"] = config;
  m["config_hash"] = config_hash(config);
  m["seed"] = cfg.seed;
  m["versions"] = versions_json();
  m["grid"] = grid_json(cfg.grid());
  return m;
}

/// `run`: every time point plus the run manifest, written last so an
/// interrupted run is recognisably incomplete.
inline json cmd_run(const RunConfig& cfg) {
  cfg.validate();
  ensure_directory(cfg.out);
  Pipeline pipe(cfg);
  const MeasurementPlan& plan = pipe.plan();
  write_json_file(cfg.out / "plan.json", plan_to_json(plan));
  json m = base_manifest(cfg, "run");
  m["plan"] = {{"strings", plan.strings.size()}, {"bases", plan.bases.size()}, {"file", "plan.json"}};
  json times = json::array();
  for (std::size_t i = 0; i < cfg.times.size(); ++i) {
    json tm = write_time_point(cfg.out, i, pipe.run_time(i), plan);
    json per = base_manifest(cfg, "run");
    per["time_index"] = i;
    per.update(tm);
    const std::string name = "manifest_t" + std::to_string(i) + ".json";
    write_json_file(cfg.out / name, per);
    tm["manifest"] = name;
    times.push_back(std::move(tm));
  }
  m["times"] = std::move(times);
  write_json_file(cfg.out / "manifest.json", m);
  return m;
}

/// `report`: summary table of a finished run directory.
inline std::string cmd_report(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  if (!std::filesystem::exists(path)) throw Error("incomplete run: no manifest.json in '" + dir.string() + "'");
  json m;
  try {
    m = read_json_file(path);
  } catch (const ConfigError& e) {
    throw Error(std::string("incomplete run: ") + e.what());
  }
  if (m.value("command", "") != "run" || !m.contains("times") || !m.contains("plan"))
    throw Error("incomplete run: manifest in '" + dir.string() + "' is not a run manifest");
  for (const auto& t : m["times"]) {
    if (!std::filesystem::exists(dir / t.value("manifest", std::string("?"))))
      throw Error("incomplete run: missing " + t.value("manifest", std::string("per-time manifest")));
    for (const auto& f : t["files"])
      if (!std::filesystem::exists(dir / f.get<std::string>())) throw Error("incomplete run: missing " + f.get<std::string>());
  }
  const json& cfg = m["config"];
  auto fmt = [](const json& v, const char* spec) {
    if (v.is_null()) return std::string("n/a");
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v.get<double>());
    return std::string(buf);
  };
  std::ostringstream os;
  os << "run " << dir.string() << "  flow=" << cfg["flow"].get<std::string>() << "  grid=" << cfg["nx"] << 'x' << cfg["ny"]
     << " qubits  scheme=" << cfg["scheme"].get<std::string>() << "  seed=" << m["seed"] << "  hash=" << m["config_hash"].get<std::string>()
     << '\n';
  os << "path: " << (cfg["exact"].get<bool>() ? "exact expectations" : std::to_string(cfg["shots"].get<std::uint64_t>()) + " shots x " + std::to_string(cfg["repeats"].get<std::size_t>()) + " repeats")
     << "  noise: " << (cfg["error_model"].is_null() ? "none" : cfg["error_model"].dump()) << '\n';
  os << "plan: " << m["plan"]["strings"] << " Pauli strings in " << m["plan"]["bases"] << " bases\n";
  const json& c0 = m["times"].front()["components"].front();
  os << "gates (component 0, t index 0): prepare " << c0["prepare_gates"]["total"] << " (" << c0["prepare_gates"]["two_qubit"]
     << " two-qubit), evolve " << c0["evolve_gates"]["total"] << " (" << c0["evolve_gates"]["two_qubit"] << " two-qubit)\n";
  os << "    t   r_rho    r_jx    r_jy  mass_resid  circ_dev    KE        enstrophy\n";
  for (const auto& t : m["times"]) {
    double dev = 0.0;
    for (const auto& c : t["components"]) dev = std::max(dev, c["oracle_deviation"].get<double>());
    os << fmt(t["time"], "%5.3f") << ' ' << fmt(t["correlation"]["rho"], "%7.4f") << ' ' << fmt(t["correlation"]["jx"], "%7.4f")
       << ' ' << fmt(t["correlation"]["jy"], "%7.4f") << ' ' << fmt(t["conservation_residual"], "%10.2e") << ' '
       << fmt(json(dev), "%9.2e") << ' ' << fmt(t["kinetic_energy"]["measured"], "%9.5f") << ' '
       << fmt(t["enstrophy"]["measured"], "%9.5f") << '\n';
  }
  return os.str();
}

/// One row of a noise sweep.
struct SweepRow {
  std::string qubit;
  std::uint64_t seed = 0;
  StripeSpectrum stripes;
  CorrelationReport corr;
};

struct SweepSpec {
  std::vector<int> qubits;            // fixed mode; empty means the x register
  std::vector<std::uint64_t> seeds;   // empty means {config seed}
};

/// Density-error stripes and correlations for each (qubit, seed) pair. In
/// fixed mode the seed drives sampling only; in random mode it also seeds the
/// error angles.
inline std::vector<std::vector<SweepRow>> noise_sweep(const RunConfig& base, const SweepSpec& spec) {
  if (!base.error_model) throw ConfigError("noise-sweep needs an error model");
  base.validate(true);
  std::vector<std::uint64_t> seeds = spec.seeds.empty() ? std::vector<std::uint64_t>{base.seed} : spec.seeds;
  std::vector<int> qubits = spec.qubits;
  if (base.error_model->mode == ErrorMode::Fixed && qubits.empty())
    for (int q = base.ny; q < base.num_qubits(); ++q) qubits.push_back(q);
  for (int q : qubits)
    if (q < 0 || q >= base.num_qubits()) throw ConfigError("noise-sweep: qubit outside the register");

  std::vector<std::vector<SweepRow>> out(base.times.size());
  RunConfig clean = base;
  clean.error_model.reset();
  Pipeline shared(clean);
  shared.plan();
  auto run_case = [&](RunConfig cfg, const std::string& label, Axis axis, std::uint64_t seed) {
    cfg.seed = seed;
    Pipeline pipe = shared.rebind(std::move(cfg));
    for (std::size_t i = 0; i < base.times.size(); ++i) {
      const TimeResult r = pipe.run_time(i);
      RealField err(r.measured.rho.size());
      for (std::size_t p = 0; p < err.size(); ++p) err[p] = r.measured.rho[p] - r.oracle.rho[p];
      out[i].push_back({label, seed, stripe_spectrum(err, base.grid(), axis), safe_correlations(r.measured, r.oracle)});
    }
  };
  for (std::uint64_t seed : seeds) {
    RunConfig cfg = base;
    if (cfg.error_model->mode == ErrorMode::Fixed) {
      for (int q : qubits) {
        cfg.error_model->targets = {q};
        run_case(cfg, std::to_string(q), q >= base.ny ? Axis::X : Axis::Y, seed);
      }
    } else {
      cfg.error_model->seed = seed;
      if (!qubits.empty()) cfg.error_model->targets = qubits;
      std::string label = "all";
      if (!cfg.error_model->targets.empty()) {
        label.clear();
        for (int q : cfg.error_model->targets) label += (label.empty() ? "" : "+") + std::to_string(q);
      }
      run_case(cfg, label, Axis::X, seed);
    }
  }
  return out;
}

}  // namespace qflow

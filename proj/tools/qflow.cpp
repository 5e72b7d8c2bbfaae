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

// qflow command-line driver. Exit codes: 0 success, 2 configuration error,
// 3 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "qflow/pipeline.hpp"

namespace {

using namespace qflow;

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

/// Raw flag values; turned into a RunConfig after parsing.
struct Flags {
  std::string flow = "diverging";
  int nx = 5, ny = 5;
  std::string times = "0,pi/4,pi/2";
  std::uint64_t shots = 100000;
  std::size_t repeats = 5;
  std::uint64_t seed = RunConfig{}.seed;
  std::string scheme = "one-sided-at-boundary";
  std::string error_model;
  std::string out = "qflow-out";
  bool exact = false;
  std::string noise_stage = "evolution";
  std::string circuit_form = "native";
  std::string topology = "all-to-all";
  std::string config;
  // noise-sweep only
  std::string qubits;
  std::string seeds;
};

void add_run_flags(CLI::App* app, Flags& f) {
  app->add_option("--flow", f.flow, "diverging | vortex")->capture_default_str();
  app->add_option("--nx", f.nx, "qubits along x")->capture_default_str();
  app->add_option("--ny", f.ny, "qubits along y")->capture_default_str();
  app->add_option("--times", f.times, "comma list, e.g. 0,pi/4,pi/2")->capture_default_str();
  app->add_option("--shots", f.shots, "shots per basis and repeat")->capture_default_str();
  app->add_option("--repeats", f.repeats, "independent repeats")->capture_default_str();
  app->add_option("--seed", f.seed, "master seed")->capture_default_str();
  app->add_option("--scheme", f.scheme, "periodic-central | one-sided-at-boundary")->capture_default_str();
  app->add_option("--error-model", f.error_model, "error-model JSON file");
  app->add_option("--out", f.out, "output directory")->capture_default_str();
  app->add_flag("--exact", f.exact, "use exact expectations instead of sampling");
  app->add_option("--noise-stage", f.noise_stage, "evolution | full")->capture_default_str();
  app->add_option("--circuit-form", f.circuit_form, "native | logical")->capture_default_str();
  app->add_option("--topology", f.topology, "all-to-all | ladder | line")->capture_default_str();
  app->add_option("--config", f.config, "JSON config or run manifest; its values override flags");
}

RunConfig to_config(const Flags& f, bool sweep = false) {
  RunConfig c;
  c.flow = flow_kind_from_string(f.flow);
  c.nx = f.nx;
  c.ny = f.ny;
  c.times = parse_times(f.times);
  c.shots = f.shots;
  c.repeats = f.repeats;
  c.seed = f.seed;
  try {
    c.scheme = diff_scheme_from_string(f.scheme);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  c.exact = f.exact;
  c.noise_stage = noise_stage_from_string(f.noise_stage);
  c.circuit_form = circuit_form_from_string(f.circuit_form);
  c.topology = topology_from_string(f.topology);
  c.out = f.out;
  if (!f.error_model.empty()) c.error_model = error_model_from_json(read_json_file(f.error_model));
  if (!f.config.empty()) {
    const std::filesystem::path p(f.config);
    c = config_from_json(read_json_file(p), c, p.parent_path());
  }
  c.validate(sweep);
  return c;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  if (s.empty()) return out;
  try {
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
      const std::uint64_t a = std::stoull(s.substr(0, colon)), b = std::stoull(s.substr(colon + 1));
      if (b <= a) throw ConfigError("empty seed range '" + s + "'");
      for (std::uint64_t v = a; v < b; ++v) out.push_back(v);
    } else {
      for (const auto& item : io_detail::split(s, ',')) out.push_back(std::stoull(item));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("bad seed list '" + s + "'");
  }
  return out;
}

std::vector<int> parse_qubits(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  try {
    for (const auto& item : io_detail::split(s, ',')) out.push_back(std::stoi(item));
  } catch (const std::exception&) {
    throw ConfigError("bad qubit list '" + s + "'");
  }
  return out;
}

int do_run(const Flags& f) {
  const RunConfig cfg = to_config(f);
  cmd_run(cfg);
  std::cout << cmd_report(cfg.out);
  return 0;
}

int do_plan(const Flags& f) {
  const RunConfig cfg = to_config(f);
  ensure_directory(cfg.out);
  Pipeline pipe(cfg);
  const MeasurementPlan& plan = pipe.plan();
  write_json_file(cfg.out / "plan.json", plan_to_json(plan));
  json m = base_manifest(cfg, "plan");
  m["files"] = {"plan.json"};
  m["plan"] = {{"strings", plan.strings.size()}, {"bases", plan.bases.size()}};
  write_json_file(cfg.out / "manifest.json", m);
  std::cout << plan.strings.size() << " Pauli strings, " << plan.bases.size() << " bases (including Z) -> "
            << (cfg.out / "plan.json").string() << '\n';
  return 0;
}

int do_circuit(const Flags& f) {
  const RunConfig cfg = to_config(f);
  ensure_directory(cfg.out);
  const EncodedField enc = encode(normalized(initial_field(cfg.flow, cfg.grid(), cfg.flow_params)));
  json m = base_manifest(cfg, "circuit");
  json files = json::array(), counts = json::array();
  for (std::size_t i = 0; i < cfg.times.size(); ++i) {
    for (std::size_t c = 0; c < enc.states.size(); ++c) {
      const ComponentCircuits cc = component_circuits(cfg, enc.states[c], cfg.times[i]);
      const std::string tag = "t" + std::to_string(i) + "_c" + std::to_string(c);
      const std::pair<const char*, const Circuit*> parts[] = {
          {"prepare", &cc.prepare}, {"evolve", &cc.evolve}, {"executed", &cc.executed}};
      json entry{{"time", cfg.times[i]}, {"component", c}};
      for (const auto& [label, circ] : parts) {
        const std::string name = std::string(label) + "_" + tag + ".qc";
        auto os = io_detail::open_out(cfg.out / name);
        os << serialize_circuit(*circ);
        files.push_back(name);
        entry[label] = gate_counts_json(gate_count_report(*circ));
      }
      std::printf("t=%.6f component %zu: prepare %zu gates, evolve %zu gates (%zu two-qubit), depth %d\n", cfg.times[i], c,
                  entry["prepare"]["total"].get<std::size_t>(), entry["evolve"]["total"].get<std::size_t>(),
                  entry["evolve"]["two_qubit"].get<std::size_t>(), entry["evolve"]["depth"].get<int>());
      counts.push_back(std::move(entry));
    }
  }
  m["files"] = std::move(files);
  m["gate_counts"] = std::move(counts);
  write_json_file(cfg.out / "manifest.json", m);
  return 0;
}

int do_sweep(const Flags& f) {
  RunConfig cfg = to_config(f, true);
  if (!cfg.error_model) throw ConfigError("noise-sweep needs --error-model");
  ensure_directory(cfg.out);
  SweepSpec spec{parse_qubits(f.qubits), parse_seeds(f.seeds)};
  const auto rows = noise_sweep(cfg, spec);
  json m = base_manifest(cfg, "noise-sweep");
  m["seeds"] = spec.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : spec.seeds;
  m["qubits"] = spec.qubits;
  json files = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string name = "sweep_t" + std::to_string(i) + ".csv";
    auto os = io_detail::open_out(cfg.out / name);
    os << "qubit,seed,freq,power,r_rho,r_jx,r_jy\n";
    for (const SweepRow& r : rows[i]) {
      os << r.qubit << ',' << r.seed << ',' << r.stripes.frequency << ',' << io_detail::num(r.stripes.power_fraction) << ','
         << io_detail::num(r.corr.rho) << ',' << io_detail::num(r.corr.jx) << ',' << io_detail::num(r.corr.jy) << '\n';
      std::printf("t=%.4f qubit %-4s seed %-6llu freq %2d power %.3f  r_rho %.4f r_jx %.4f r_jy %.4f\n", cfg.times[i],
                  r.qubit.c_str(), static_cast<unsigned long long>(r.seed), r.stripes.frequency, r.stripes.power_fraction,
                  r.corr.rho, r.corr.jx, r.corr.jy);
    }
    files.push_back({{"time", cfg.times[i]}, {"file", name}});
  }
  m["files"] = std::move(files);
  write_json_file(cfg.out / "manifest.json", m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qflow: quantum simulation of 2D free flows"};
  app.require_subcommand(1);
  Flags run_f, sweep_f, plan_f, circ_f;
  std::string report_dir;

  auto* run = app.add_subcommand("run", "encode, evolve, measure and reconstruct; write fields and manifests");
  add_run_flags(run, run_f);
  auto* report = app.add_subcommand("report", "summarise a finished run directory");
  report->add_option("dir", report_dir, "run directory")->required();
  auto* sweep = app.add_subcommand("noise-sweep", "stripe spectra and correlations over error qubits and seeds");
  add_run_flags(sweep, sweep_f);
  sweep->add_option("--qubits", sweep_f.qubits, "comma list of error qubits (default: x register)");
  sweep->add_option("--seeds", sweep_f.seeds, "seed range a:b (b exclusive) or comma list");
  auto* plan = app.add_subcommand("plan", "emit the measurement plan only");
  add_run_flags(plan, plan_f);
  auto* circuit = app.add_subcommand("circuit", "emit serialized circuits and gate counts");
  add_run_flags(circuit, circ_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigExit;
  }

  try {
    if (*run) return do_run(run_f);
    if (*report) {
      std::cout << cmd_report(report_dir);
      return 0;
    }
    if (*sweep) return do_sweep(sweep_f);
    if (*plan) return do_plan(plan_f);
    if (*circuit) return do_circuit(circ_f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
  return kRuntimeExit;
}

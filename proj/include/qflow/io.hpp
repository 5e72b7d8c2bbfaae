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
 * @file io.hpp
 * @brief Field CSV, measurement plan/results and error-model files.
 *
 * Field CSV rows run over l (y) in the outer loop and k (x) in the inner
 * loop, i.e. in flat-index order. Real fields use the header `x,y,<name>`,
 * complex fields `x,y,re,im`.
 */
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qflow/measurement.hpp"
#include "qflow/noise.hpp"

namespace qflow {

using json = nlohmann::ordered_json;

namespace io_detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Fields

inline void write_real_fields_csv(const std::filesystem::path& path, const Grid2D& grid,
                                  const std::vector<std::string>& names, const std::vector<const RealField*>& fields) {
  if (names.size() != fields.size()) throw Error("write_real_fields_csv: name/field count mismatch");
  for (const RealField* f : fields)
    if (f->size() != grid.size()) throw Error("write_real_fields_csv: field size does not match grid");
  auto os = io_detail::open_out(path);
  os << "x,y";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (std::size_t l = 0; l < grid.Ny(); ++l)
    for (std::size_t k = 0; k < grid.Nx(); ++k) {
      os << io_detail::num(grid.x(k)) << ',' << io_detail::num(grid.y(l));
      for (const RealField* f : fields) os << ',' << io_detail::num((*f)[grid.index(k, l)]);
      os << '\n';
    }
}

inline void write_real_field_csv(const std::filesystem::path& path, const Grid2D& grid, const std::string& name,
                                 const RealField& field) {
  write_real_fields_csv(path, grid, {name}, {&field});
}

inline void write_complex_field_csv(const std::filesystem::path& path, const Grid2D& grid,
                                    const std::vector<cplx>& field) {
  if (field.size() != grid.size()) throw Error("write_complex_field_csv: field size does not match grid");
  auto os = io_detail::open_out(path);
  os << "x,y,re,im\n";
  for (std::size_t l = 0; l < grid.Ny(); ++l)
    for (std::size_t k = 0; k < grid.Nx(); ++k) {
      const cplx v = field[grid.index(k, l)];
      os << io_detail::num(grid.x(k)) << ',' << io_detail::num(grid.y(l)) << ',' << io_detail::num(v.real()) << ','
         << io_detail::num(v.imag()) << '\n';
    }
}

/// Reads a field CSV written by the functions above. Returns one column per
/// value column (x and y are checked against the grid and dropped).
inline std::vector<RealField> read_field_csv(const std::filesystem::path& path, const Grid2D& grid,
                                             std::vector<std::string>* header = nullptr) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line)) throw Error("'" + path.string() + "' is empty");
  const auto cols = io_detail::split(line, ',');
  if (cols.size() < 3 || cols[0] != "x" || cols[1] != "y") throw Error("'" + path.string() + "': bad header");
  if (header) header->assign(cols.begin() + 2, cols.end());
  std::vector<RealField> out(cols.size() - 2, RealField(grid.size()));
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto v = io_detail::split(line, ',');
    if (v.size() != cols.size() || row >= grid.size()) throw Error("'" + path.string() + "': bad row " + std::to_string(row));
    const std::size_t k = row % grid.Nx(), l = row / grid.Nx();
    if (std::abs(std::stod(v[0]) - grid.x(k)) > 1e-12 || std::abs(std::stod(v[1]) - grid.y(l)) > 1e-12)
      throw Error("'" + path.string() + "': coordinates do not match the grid");
    for (std::size_t c = 2; c < v.size(); ++c) out[c - 2][row] = std::stod(v[c]);
    ++row;
  }
  if (row != grid.size()) throw Error("'" + path.string() + "': expected " + std::to_string(grid.size()) + " rows");
  return out;
}

inline json grid_json(const Grid2D& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"Nx", g.Nx()}, {"Ny", g.Ny()}, {"dx", g.dx()}, {"dy", g.dy()}};
}

// ---------------------------------------------------------------------------
// Measurement plan and results

inline json plan_to_json(const MeasurementPlan& plan) {
  json j;
  j["num_qubits"] = plan.num_qubits;
  j["num_bases"] = plan.bases.size();
  j["num_strings"] = plan.strings.size();
  j["bases"] = plan.bases;
  json strings = json::array();
  for (std::size_t i = 0; i < plan.strings.size(); ++i)
    strings.push_back({{"string", plan.strings[i].letters()}, {"weight", plan.strings[i].coefficient()}, {"basis", plan.assignment[i]}});
  j["strings"] = std::move(strings);
  return j;
}

inline MeasurementPlan plan_from_json(const json& j) {
  MeasurementPlan plan;
  try {
    plan.num_qubits = j.at("num_qubits").get<int>();
    plan.bases = j.at("bases").get<std::vector<std::string>>();
    for (const auto& s : j.at("strings")) {
      plan.strings.emplace_back(s.at("string").get<std::string>(), s.value("weight", 1.0));
      plan.assignment.push_back(s.at("basis").get<std::size_t>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("plan file: ") + e.what());
  }
  for (std::size_t i = 0; i < plan.strings.size(); ++i) {
    if (plan.assignment[i] >= plan.bases.size() || !basis_covers(plan.bases[plan.assignment[i]], plan.strings[i].letters()))
      throw ConfigError("plan file: string " + plan.strings[i].letters() + " is not covered by its basis");
  }
  return plan;
}

/// `basis,string,estimate,stderr`, one row per plan string.
inline void write_results_csv(const std::filesystem::path& path, const MeasurementPlan& plan, const Estimates& est) {
  auto os = io_detail::open_out(path);
  os << "basis,string,estimate,stderr\n";
  for (std::size_t i = 0; i < plan.strings.size(); ++i)
    os << plan.bases[plan.assignment[i]] << ',' << plan.strings[i].letters() << ',' << io_detail::num(est.mean(i)) << ','
       << io_detail::num(est.stderr_of(i)) << '\n';
}

/// Same layout for exact expectations (stderr 0).
inline void write_results_csv(const std::filesystem::path& path, const MeasurementPlan& plan,
                              const std::vector<double>& exact) {
  auto os = io_detail::open_out(path);
  os << "basis,string,estimate,stderr\n";
  for (std::size_t i = 0; i < plan.strings.size(); ++i)
    os << plan.bases[plan.assignment[i]] << ',' << plan.strings[i].letters() << ',' << io_detail::num(exact[i]) << ",0\n";
}

// ---------------------------------------------------------------------------
// Error model

inline json error_model_to_json(const ErrorModel& m) {
  json j;
  j["mode"] = to_string(m.mode);
  j["targets"] = m.targets;
  if (m.mode == ErrorMode::Fixed) {
    j["gate"] = to_string(m.gate_kind);
    j["params"] = m.params;
  } else {
    j["amplitude"] = m.amplitude;
    j["seed"] = m.seed;
  }
  return j;
}

inline ErrorModel error_model_from_json(const json& j) {
  static const std::set<std::string> keys{"mode", "targets", "gate", "params", "amplitude", "seed"};
  if (!j.is_object()) throw ConfigError("error model: expected a JSON object");
  for (const auto& [k, v] : j.items())
    if (!keys.contains(k)) throw ConfigError("error model: unknown key '" + k + "'");
  ErrorModel m;
  try {
    m.mode = error_mode_from_string(j.at("mode").get<std::string>());
    m.targets = j.value("targets", std::vector<int>{});
    if (m.mode == ErrorMode::Fixed) {
      m.gate_kind = gate_kind_from_string(j.value("gate", std::string("RX")));
      m.params = j.value("params", std::vector<double>{0.025});
    } else {
      m.amplitude = j.value("amplitude", 0.045);
      m.seed = j.value("seed", std::uint64_t{0});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("error model: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("error model: ") + e.what());
  }
  m.validate(false);
  return m;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  auto os = io_detail::open_out(path);
  os << j.dump(2) << '\n';
}

/// FNV-1a over the compact dump; stable across platforms.
inline std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qflow

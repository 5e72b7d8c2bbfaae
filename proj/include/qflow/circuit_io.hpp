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

/// Line-oriented circuit text format.
///
///     # comment
///     QUBITS 4
///     NAME evolution
///     GLOBAL_PHASE 1.5707963267948966
///     DROPPED_PHASE -0.25
///     U3 0 1.5707963267948966 0 3.141592653589793
///     CZ 0 1
///     DIAG 2 3 1 0 1 0 1 0 0.5 0.8660254037844386
///
/// Each gate line is `KIND targets... params...`. DIAG lists its targets and
/// then the real and imaginary part of each diagonal entry. Numbers are
/// written with 17 significant digits, so text -> circuit -> text is stable.
#pragma once

#include <charconv>
#include <optional>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "qflow/statevector.hpp"

namespace qflow {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& tok, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error("circuit line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
}

inline int parse_int(const std::string& tok, int line) {
  int v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw Error("circuit line " + std::to_string(line) + ": bad integer '" + tok + "'");
  return v;
}

}  // namespace detail

inline std::string serialize_circuit(const Circuit& c) {
  std::ostringstream os;
  os << "QUBITS " << c.num_qubits() << '\n';
  if (!c.name().empty()) os << "NAME " << c.name() << '\n';
  if (c.global_phase() != 0.0) os << "GLOBAL_PHASE " << detail::fmt_double(c.global_phase()) << '\n';
  if (c.dropped_phase() != 0.0) os << "DROPPED_PHASE " << detail::fmt_double(c.dropped_phase()) << '\n';
  for (const Gate& g : c.gates()) {
    os << to_string(g.kind);
    for (int t : g.targets) os << ' ' << t;
    for (double p : g.params) os << ' ' << detail::fmt_double(p);
    for (const cplx& e : g.diagonal) os << ' ' << detail::fmt_double(e.real()) << ' ' << detail::fmt_double(e.imag());
    os << '\n';
  }
  return os.str();
}

inline Circuit parse_circuit(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  std::optional<Circuit> c;
  std::string name;
  double global = 0.0, dropped = 0.0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& head = tok[0];
    if (head == "QUBITS") {
      if (tok.size() != 2 || c) throw Error("circuit line " + std::to_string(lineno) + ": bad QUBITS header");
      c.emplace(detail::parse_int(tok[1], lineno));
      continue;
    }
    if (head == "NAME") {
      name = tok.size() > 1 ? tok[1] : "";
      continue;
    }
    if (head == "GLOBAL_PHASE" || head == "DROPPED_PHASE") {
      if (tok.size() != 2) throw Error("circuit line " + std::to_string(lineno) + ": bad phase header");
      (head == "GLOBAL_PHASE" ? global : dropped) = detail::parse_double(tok[1], lineno);
      continue;
    }
    if (!c) throw Error("circuit line " + std::to_string(lineno) + ": gate before QUBITS header");
    const GateKind kind = gate_kind_from_string(head);
    const std::size_t rest = tok.size() - 1;
    Gate g;
    g.kind = kind;
    std::size_t ntargets = 0;
    if (kind == GateKind::DiagonalPhase) {
      // k targets followed by 2^{k+1} numbers.
      for (std::size_t k = 1; k <= 20 && ntargets == 0; ++k)
        if (k + (std::size_t{2} << k) == rest) ntargets = k;
      if (ntargets == 0) throw Error("circuit line " + std::to_string(lineno) + ": bad DIAG token count");
    } else {
      ntargets = static_cast<std::size_t>(fixed_arity(kind));
      if (rest != ntargets + static_cast<std::size_t>(param_count(kind)))
        throw Error("circuit line " + std::to_string(lineno) + ": wrong token count for " + head);
    }
    for (std::size_t i = 0; i < ntargets; ++i) g.targets.push_back(detail::parse_int(tok[1 + i], lineno));
    if (kind == GateKind::DiagonalPhase) {
      for (std::size_t i = 1 + ntargets; i + 1 < tok.size(); i += 2)
        g.diagonal.emplace_back(detail::parse_double(tok[i], lineno), detail::parse_double(tok[i + 1], lineno));
    } else {
      for (std::size_t i = 1 + ntargets; i < tok.size(); ++i) g.params.push_back(detail::parse_double(tok[i], lineno));
    }
    c->add(std::move(g));
  }
  if (!c) throw Error("circuit text has no QUBITS header");
  c->set_name(name);
  c->add_global_phase(global);
  c->add_dropped_phase(dropped);
  return *c;
}

}  // namespace qflow

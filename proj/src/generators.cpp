// Copyright 2026 The qalloc Authors
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

#include "qalloc/generators.hpp"

#include <string>

#include "qalloc/errors.hpp"

namespace qalloc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::InvalidArgument, what);
}

// CNOT skeleton of the standard T-depth Toffoli decomposition.
void append_toffoli(std::vector<Gate>& gates, int c1, int c2, int target) {
  gates.push_back({c2, target});
  gates.push_back({c1, target});
  gates.push_back({c2, target});
  gates.push_back({c1, target});
  gates.push_back({c1, c2});
  gates.push_back({c1, c2});
}

void append_maj(std::vector<Gate>& gates, int x, int y, int z) {
  gates.push_back({z, y});
  gates.push_back({z, x});
  append_toffoli(gates, x, y, z);
}

void append_uma(std::vector<Gate>& gates, int x, int y, int z) {
  append_toffoli(gates, x, y, z);
  gates.push_back({z, x});
  gates.push_back({x, y});
}

void append_qft(std::vector<Gate>& gates, int first, int count, bool inverse) {
  std::vector<Gate> ladder;
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) ladder.push_back({first + j, first + i});
  }
  if (inverse) {
    gates.insert(gates.end(), ladder.rbegin(), ladder.rend());
  } else {
    gates.insert(gates.end(), ladder.begin(), ladder.end());
  }
}

}  // namespace

CircuitKind parse_circuit_kind(std::string_view name) {
  if (name == "qft") return CircuitKind::Qft;
  if (name == "graph_state") return CircuitKind::GraphState;
  if (name == "deutsch_jozsa") return CircuitKind::DeutschJozsa;
  if (name == "cuccaro_adder") return CircuitKind::CuccaroAdder;
  if (name == "draper_adder") return CircuitKind::DraperAdder;
  fail(ErrorKind::InvalidArgument, "unsupported circuit kind '" + std::string(name) + "'");
}

std::string to_string(CircuitKind kind) {
  switch (kind) {
    case CircuitKind::Qft: return "qft";
    case CircuitKind::GraphState: return "graph_state";
    case CircuitKind::DeutschJozsa: return "deutsch_jozsa";
    case CircuitKind::CuccaroAdder: return "cuccaro_adder";
    case CircuitKind::DraperAdder: return "draper_adder";
  }
  return "unknown";
}

Circuit qft_circuit(int num_qubits) {
  require(num_qubits >= 2, "qft needs >= 2 qubits");
  std::vector<Gate> gates;
  append_qft(gates, 0, num_qubits, false);
  return Circuit(num_qubits, std::move(gates));
}

Circuit graph_state_circuit(int num_qubits,
                            const std::vector<std::pair<int, int>>& edges) {
  require(num_qubits >= 2, "graph state needs >= 2 qubits");
  std::vector<Gate> gates;
  gates.reserve(edges.size());
  for (const auto& [u, v] : edges) gates.push_back({u, v});
  return Circuit(num_qubits, std::move(gates));
}

Circuit random_graph_state_circuit(int num_qubits, Rng& rng,
                                   double edge_probability) {
  require(num_qubits >= 2, "graph state needs >= 2 qubits");
  require(edge_probability > 0.0 && edge_probability <= 1.0,
          "edge probability must lie in (0, 1]");
  std::bernoulli_distribution keep(edge_probability);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < num_qubits; ++u) {
    for (int v = u + 1; v < num_qubits; ++v) {
      if (keep(rng)) edges.emplace_back(u, v);
    }
  }
  if (edges.empty()) edges.emplace_back(0, 1);
  return graph_state_circuit(num_qubits, edges);
}

Circuit deutsch_jozsa_circuit(int num_qubits, const std::vector<bool>& oracle_mask) {
  require(num_qubits >= 2, "deutsch-jozsa needs >= 2 qubits");
  const int inputs = num_qubits - 1;
  require(oracle_mask.empty() || static_cast<int>(oracle_mask.size()) == inputs,
          "oracle mask must cover every input qubit");
  std::vector<Gate> gates;
  for (int i = 0; i < inputs; ++i) {
    if (oracle_mask.empty() || oracle_mask[i]) gates.push_back({i, num_qubits - 1});
  }
  require(!gates.empty(), "oracle mask selects no input");
  return Circuit(num_qubits, std::move(gates));
}

Circuit cuccaro_adder_circuit(int num_qubits) {
  require(num_qubits >= 4 && num_qubits % 2 == 0,
          "cuccaro adder needs an even qubit count >= 4");
  const int bits = (num_qubits - 2) / 2;
  auto a = [](int i) { return 1 + 2 * i; };
  auto b = [](int i) { return 2 + 2 * i; };
  const int carry_in = 0;
  const int carry_out = num_qubits - 1;

  std::vector<Gate> gates;
  append_maj(gates, carry_in, b(0), a(0));
  for (int i = 1; i < bits; ++i) append_maj(gates, a(i - 1), b(i), a(i));
  gates.push_back({a(bits - 1), carry_out});
  for (int i = bits - 1; i >= 1; --i) append_uma(gates, a(i - 1), b(i), a(i));
  append_uma(gates, carry_in, b(0), a(0));
  return Circuit(num_qubits, std::move(gates));
}

Circuit draper_adder_circuit(int num_qubits) {
  require(num_qubits >= 2 && num_qubits % 2 == 0,
          "draper adder needs an even qubit count >= 2");
  const int bits = num_qubits / 2;
  std::vector<Gate> gates;
  append_qft(gates, bits, bits, false);
  for (int i = 0; i < bits; ++i) {
    for (int j = 0; j <= i; ++j) gates.push_back({j, bits + i});
  }
  append_qft(gates, bits, bits, true);
  require(!gates.empty(), "draper adder produced no gates");
  return Circuit(num_qubits, std::move(gates));
}

Circuit generate_named_circuit(CircuitKind kind, int num_qubits, Rng* rng) {
  switch (kind) {
    case CircuitKind::Qft: return qft_circuit(num_qubits);
    case CircuitKind::GraphState:
      require(rng != nullptr, "graph state generation needs an rng");
      return random_graph_state_circuit(num_qubits, *rng);
    case CircuitKind::DeutschJozsa: return deutsch_jozsa_circuit(num_qubits);
    case CircuitKind::CuccaroAdder: return cuccaro_adder_circuit(num_qubits);
    case CircuitKind::DraperAdder: return draper_adder_circuit(num_qubits);
  }
  fail(ErrorKind::InvalidArgument, "unsupported circuit kind");
}

}  // namespace qalloc

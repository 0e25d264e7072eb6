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

#include "qalloc/circuit.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "qalloc/errors.hpp"

namespace qalloc {

namespace {

using ordered_json = nlohmann::ordered_json;

void check_gate(const Gate& g, int num_qubits, std::size_t index,
                ErrorKind kind) {
  if (g.a < 0 || g.b < 0 || g.a >= num_qubits || g.b >= num_qubits) {
    fail(kind, "qubit index out of range at index " + std::to_string(index));
  }
  if (g.a == g.b) {
    fail(kind, "self-gate at index " + std::to_string(index));
  }
}

Gate parse_gate(const ordered_json& item, std::size_t index) {
  if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer() ||
      !item[1].is_number_integer()) {
    fail(ErrorKind::Parse, "malformed gate at index " + std::to_string(index));
  }
  return {item[0].get<int>(), item[1].get<int>()};
}

ordered_json gate_json(const Gate& g) { return ordered_json::array({g.a, g.b}); }

}  // namespace

Circuit::Circuit(int num_qubits, std::vector<Gate> gates)
    : num_qubits_(num_qubits), gates_(std::move(gates)) {
  if (num_qubits_ < 0) {
    fail(ErrorKind::InvalidArgument, "negative qubit count");
  }
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    check_gate(gates_[i], num_qubits_, i, ErrorKind::InvalidArgument);
  }
}

SlicedCircuit::SlicedCircuit(int num_qubits, std::vector<TimeSlice> slices)
    : num_qubits_(num_qubits), slices_(std::move(slices)) {
  std::vector<char> used(static_cast<std::size_t>(num_qubits), 0);
  std::size_t index = 0;
  for (std::size_t t = 0; t < slices_.size(); ++t) {
    std::fill(used.begin(), used.end(), 0);
    for (const Gate& g : slices_[t].gates) {
      check_gate(g, num_qubits_, index++, ErrorKind::InvalidArgument);
      if (used[g.a] || used[g.b]) {
        fail(ErrorKind::InvalidArgument,
             "qubit repeated within slice " + std::to_string(t));
      }
      used[g.a] = used[g.b] = 1;
    }
  }
}

std::size_t SlicedCircuit::num_gates() const noexcept {
  std::size_t n = 0;
  for (const auto& s : slices_) n += s.gates.size();
  return n;
}

std::size_t SlicedCircuit::num_gates_after_first_slice() const noexcept {
  return slices_.empty() ? 0 : num_gates() - slices_.front().gates.size();
}

Circuit SlicedCircuit::flatten() const {
  std::vector<Gate> gates;
  gates.reserve(num_gates());
  for (const auto& s : slices_) {
    gates.insert(gates.end(), s.gates.begin(), s.gates.end());
  }
  return Circuit(num_qubits_, std::move(gates));
}

SlicedCircuit slice_circuit(const Circuit& circuit) {
  if (circuit.gates().empty()) {
    fail(ErrorKind::InvalidArgument, "cannot slice a circuit with no gates");
  }
  std::vector<TimeSlice> slices;
  TimeSlice current;
  std::vector<char> used(static_cast<std::size_t>(circuit.num_qubits()), 0);
  for (const Gate& g : circuit.gates()) {
    if (used[g.a] || used[g.b]) {
      slices.push_back(std::move(current));
      current = TimeSlice{};
      std::fill(used.begin(), used.end(), 0);
    }
    current.gates.push_back(g);
    used[g.a] = used[g.b] = 1;
  }
  slices.push_back(std::move(current));
  return SlicedCircuit(circuit.num_qubits(), std::move(slices));
}

Circuit parse_circuit(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::Parse, "circuit must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "num_qubits" && key != "gates" && key != "slices") {
      fail(ErrorKind::Parse, "unknown key '" + key + "'");
    }
  }
  if (!doc.contains("num_qubits") || !doc["num_qubits"].is_number_integer()) {
    fail(ErrorKind::Parse, "missing integer 'num_qubits'");
  }
  const int num_qubits = doc["num_qubits"].get<int>();
  if (num_qubits < 0) fail(ErrorKind::Parse, "negative 'num_qubits'");
  if (doc.contains("gates") == doc.contains("slices")) {
    fail(ErrorKind::Parse, "exactly one of 'gates' or 'slices' is required");
  }

  std::vector<Gate> gates;
  auto take = [&](const ordered_json& item) {
    const Gate g = parse_gate(item, gates.size());
    check_gate(g, num_qubits, gates.size(), ErrorKind::Parse);
    gates.push_back(g);
  };
  if (doc.contains("gates")) {
    if (!doc["gates"].is_array()) fail(ErrorKind::Parse, "'gates' must be an array");
    for (const auto& item : doc["gates"]) take(item);
  } else {
    if (!doc["slices"].is_array()) fail(ErrorKind::Parse, "'slices' must be an array");
    for (const auto& slice : doc["slices"]) {
      if (!slice.is_array()) fail(ErrorKind::Parse, "each slice must be an array");
      for (const auto& item : slice) take(item);
    }
  }
  return Circuit(num_qubits, std::move(gates));
}

std::string serialize_circuit(const Circuit& circuit) {
  ordered_json doc;
  doc["num_qubits"] = circuit.num_qubits();
  doc["gates"] = ordered_json::array();
  for (const Gate& g : circuit.gates()) doc["gates"].push_back(gate_json(g));
  return doc.dump();
}

std::string serialize_sliced_circuit(const SlicedCircuit& circuit) {
  ordered_json doc;
  doc["num_qubits"] = circuit.num_qubits();
  doc["slices"] = ordered_json::array();
  for (const auto& slice : circuit.slices()) {
    ordered_json s = ordered_json::array();
    for (const Gate& g : slice.gates) s.push_back(gate_json(g));
    doc["slices"].push_back(std::move(s));
  }
  return doc.dump();
}

Circuit random_circuit(int num_qubits, int target_slices, Rng& rng) {
  if (num_qubits < 2) fail(ErrorKind::InvalidArgument, "random circuit needs >= 2 qubits");
  if (target_slices < 1) fail(ErrorKind::InvalidArgument, "random circuit needs >= 1 slice");

  std::uniform_int_distribution<int> first(0, num_qubits - 1);
  std::uniform_int_distribution<int> second(0, num_qubits - 2);
  std::vector<Gate> gates;
  std::vector<char> used(static_cast<std::size_t>(num_qubits), 0);
  int slices = 1;
  while (true) {
    int a = first(rng);
    int b = second(rng);
    if (b >= a) ++b;
    if (a > b) std::swap(a, b);
    if (used[a] || used[b]) {
      // This gate would open slice `slices + 1`.
      if (slices == target_slices) break;
      ++slices;
      std::fill(used.begin(), used.end(), 0);
    }
    used[a] = used[b] = 1;
    gates.push_back({a, b});
  }
  return Circuit(num_qubits, std::move(gates));
}

}  // namespace qalloc

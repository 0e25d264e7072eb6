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

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qalloc/circuit.hpp"
#include "qalloc/rng.hpp"

namespace qalloc {

// Two-qubit interaction skeletons of standard circuit families. Single-qubit
// gates never influence an allocation and are not emitted.

enum class CircuitKind { Qft, GraphState, DeutschJozsa, CuccaroAdder, DraperAdder };

CircuitKind parse_circuit_kind(std::string_view name);
std::string to_string(CircuitKind kind);

/// Controlled-phase ladder of the textbook QFT, without the final swaps.
Circuit qft_circuit(int num_qubits);

/// One CZ per edge, in the given order.
Circuit graph_state_circuit(int num_qubits,
                            const std::vector<std::pair<int, int>>& edges);
/// Erdos-Renyi edge set, each unordered pair kept with `edge_probability`.
Circuit random_graph_state_circuit(int num_qubits, Rng& rng,
                                   double edge_probability = 0.5);

/// Inputs are qubits 0..n-2, the oracle target is qubit n-1. `oracle_mask`
/// selects which inputs drive a CNOT onto the target; empty means all of them.
Circuit deutsch_jozsa_circuit(int num_qubits,
                              const std::vector<bool>& oracle_mask = {});

/// Ripple-carry adder on the interleaved layout
/// c0, a0, b0, a1, b1, ..., a(k-1), b(k-1), z. Needs an even qubit count >= 4.
/// Toffolis expand to their six-CNOT skeleton.
Circuit cuccaro_adder_circuit(int num_qubits);

/// QFT-based adder with register a = 0..k-1 and b = k..2k-1.
Circuit draper_adder_circuit(int num_qubits);

/// Dispatch by kind; `rng` is only consulted for graph states.
Circuit generate_named_circuit(CircuitKind kind, int num_qubits,
                               Rng* rng = nullptr);

}  // namespace qalloc

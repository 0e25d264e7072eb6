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

#include <span>
#include <vector>

#include "qalloc/circuit.hpp"
#include "qalloc/matrix.hpp"

namespace qalloc {

/// Symmetric 0/1 interaction matrix of a single slice.
Matrix adjacency(const TimeSlice& slice, int num_qubits);

/// E_t(i,j) = sum_{k >= t} 2^-(k-t+1) A_k(i,j), via the backward recurrence
/// E_t = (A_t + E_{t+1}) / 2 with E_T = 0.
std::vector<Matrix> circuit_embedding(const SlicedCircuit& circuit);

/// N_t(i,j) = (T - k) / (T - t) where k >= t is the pair's next interacting
/// slice, 0 if the pair never interacts again.
std::vector<Matrix> next_interaction(const SlicedCircuit& circuit);

/// Sum of `embedding(qubit, i)` over every qubit i currently placed on
/// `core`. `placement[i]` is the core of qubit i or -1 if unplaced.
double attraction(const Matrix& embedding, std::span<const int> placement,
                  int qubit, int core);

/// Both per-slice feature stacks for one circuit.
struct CircuitEncoding {
  std::vector<Matrix> embedding;
  std::vector<Matrix> next_interaction;

  static CircuitEncoding build(const SlicedCircuit& circuit);
};

}  // namespace qalloc

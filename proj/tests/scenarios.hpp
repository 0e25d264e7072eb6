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


// Random mid-slice policy inputs shared by the unit and acceptance tests.
#pragma once

#include <vector>

#include "qalloc/circuit.hpp"
#include "qalloc/encoding.hpp"
#include "qalloc/policy.hpp"
#include "qalloc/rng.hpp"

namespace qalloc::testing {

/// A mid-slice state: random previous assignment, some qubits already placed
/// in the current slice, and one unit (pair or single) left to place.
struct Scenario {
  int cores = 0;
  int qubits = 0;
  Matrix cost;
  Matrix embedding;
  Matrix next;
  std::vector<int> previous;
  std::vector<int> current;
  std::vector<int> free_capacity;
  int qa = 0;
  int qb = -1;

  StepContext context(bool first_slice = false) const {
    StepContext ctx;
    ctx.slice = first_slice ? 0 : 1;
    ctx.qubit_a = qa;
    ctx.qubit_b = qb;
    if (!first_slice) ctx.previous = previous;
    ctx.current = current;
    ctx.free_capacity = free_capacity;
    ctx.cost = &cost;
    ctx.embedding = &embedding;
    ctx.next_interaction = &next;
    return ctx;
  }
};

inline Scenario random_scenario(Rng& rng, int cores, int qubits, bool pair) {
  Scenario s;
  s.cores = cores;
  s.qubits = qubits;
  s.cost = Matrix(cores, cores);
  for (int i = 0; i < cores; ++i) {
    for (int j = i + 1; j < cores; ++j) {
      s.cost(i, j) = s.cost(j, i) = static_cast<double>(1 + rng() % 4);
    }
  }
  SlicedCircuit c = slice_circuit(random_circuit(qubits, 6, rng));
  CircuitEncoding enc = CircuitEncoding::build(c);
  s.embedding = enc.embedding[1 % enc.embedding.size()];
  s.next = enc.next_interaction[1 % enc.next_interaction.size()];
  const int cap = (qubits + cores - 1) / cores + 2;
  s.free_capacity.assign(cores, cap);
  s.previous.resize(qubits);
  std::vector<int> load(cores, 0);
  for (int q = 0; q < qubits; ++q) {
    int k;
    do {
      k = static_cast<int>(rng() % cores);
    } while (load[k] >= cap);
    ++load[k];
    s.previous[q] = k;
  }
  s.qa = static_cast<int>(rng() % qubits);
  if (pair) {
    do {
      s.qb = static_cast<int>(rng() % qubits);
    } while (s.qb == s.qa);
  }
  s.current.assign(qubits, -1);
  for (int q = 0; q < qubits; ++q) {
    if (q == s.qa || q == s.qb || rng() % 2 == 0) continue;
    const int k = static_cast<int>(rng() % cores);
    if (s.free_capacity[k] > 2) {
      s.current[q] = k;
      --s.free_capacity[k];
    }
  }
  return s;
}

inline std::vector<double> logits_of(const Policy& p, const StepContext& ctx) {
  FeatureBatch b;
  b.append(build_features(ctx));
  nn::Tensor t = p.logits(b);
  return {t.data().begin(), t.data().end()};
}

}  // namespace qalloc::testing

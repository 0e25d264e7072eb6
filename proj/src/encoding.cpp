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

#include "qalloc/encoding.hpp"

namespace qalloc {

Matrix adjacency(const TimeSlice& slice, int num_qubits) {
  const auto q = static_cast<std::size_t>(num_qubits);
  Matrix a(q, q);
  for (const Gate& g : slice.gates) {
    a(g.a, g.b) = 1.0;
    a(g.b, g.a) = 1.0;
  }
  return a;
}

std::vector<Matrix> circuit_embedding(const SlicedCircuit& circuit) {
  const auto q = static_cast<std::size_t>(circuit.num_qubits());
  const std::size_t slices = circuit.num_slices();
  std::vector<Matrix> e(slices);
  Matrix later(q, q);
  for (std::size_t t = slices; t-- > 0;) {
    Matrix cur = later;
    for (double& v : cur.data()) v *= 0.5;
    for (const Gate& g : circuit.slice(t).gates) {
      cur(g.a, g.b) += 0.5;
      cur(g.b, g.a) += 0.5;
    }
    e[t] = cur;
    later = std::move(cur);
  }
  return e;
}

std::vector<Matrix> next_interaction(const SlicedCircuit& circuit) {
  const auto q = static_cast<std::size_t>(circuit.num_qubits());
  const std::size_t slices = circuit.num_slices();
  constexpr long kNever = -1;
  // next[i*q+j]: earliest slice >= t where the pair interacts.
  std::vector<long> next(q * q, kNever);
  std::vector<Matrix> n(slices);
  for (std::size_t t = slices; t-- > 0;) {
    for (const Gate& g : circuit.slice(t).gates) {
      next[g.a * q + g.b] = static_cast<long>(t);
      next[g.b * q + g.a] = static_cast<long>(t);
    }
    Matrix cur(q, q);
    const double span = static_cast<double>(slices - t);
    for (std::size_t i = 0; i < q * q; ++i) {
      if (next[i] != kNever) {
        cur.data()[i] = static_cast<double>(static_cast<long>(slices) - next[i]) / span;
      }
    }
    n[t] = std::move(cur);
  }
  return n;
}

double attraction(const Matrix& embedding, std::span<const int> placement,
                  int qubit, int core) {
  double total = 0.0;
  const auto row = embedding.row(static_cast<std::size_t>(qubit));
  for (std::size_t i = 0; i < placement.size(); ++i) {
    if (placement[i] == core) total += row[i];
  }
  return total;
}

CircuitEncoding CircuitEncoding::build(const SlicedCircuit& circuit) {
  return {circuit_embedding(circuit), qalloc::next_interaction(circuit)};
}

}  // namespace qalloc

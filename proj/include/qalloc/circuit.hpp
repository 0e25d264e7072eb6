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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qalloc/rng.hpp"

namespace qalloc {

/// Two-qubit interaction. Only two-qubit gates matter for allocation, so this
/// is the whole gate model.
struct Gate {
  int a = 0;
  int b = 0;

  [[nodiscard]] bool touches(int q) const noexcept { return a == q || b == q; }
  friend bool operator==(const Gate&, const Gate&) = default;
};

/// Chronologically ordered gate list over `num_qubits` logical qubits.
class Circuit {
 public:
  Circuit() = default;
  /// Throws InvalidArgument on a self-gate or an out-of-range index.
  Circuit(int num_qubits, std::vector<Gate> gates);

  [[nodiscard]] int num_qubits() const noexcept { return num_qubits_; }
  [[nodiscard]] const std::vector<Gate>& gates() const noexcept {
    return gates_;
  }

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  int num_qubits_ = 0;
  std::vector<Gate> gates_;
};

struct TimeSlice {
  std::vector<Gate> gates;

  friend bool operator==(const TimeSlice&, const TimeSlice&) = default;
};

class SlicedCircuit {
 public:
  SlicedCircuit(int num_qubits, std::vector<TimeSlice> slices);

  [[nodiscard]] int num_qubits() const noexcept { return num_qubits_; }
  [[nodiscard]] std::size_t num_slices() const noexcept {
    return slices_.size();
  }
  [[nodiscard]] const std::vector<TimeSlice>& slices() const noexcept {
    return slices_;
  }
  [[nodiscard]] const TimeSlice& slice(std::size_t t) const {
    return slices_.at(t);
  }
  [[nodiscard]] std::size_t num_gates() const noexcept;
  /// Gates that can ever require a move: everything outside slice 0.
  [[nodiscard]] std::size_t num_gates_after_first_slice() const noexcept;
  /// Concatenation of all slices, i.e. the source gate order.
  [[nodiscard]] Circuit flatten() const;

 private:
  int num_qubits_ = 0;
  std::vector<TimeSlice> slices_;
};

/// Greedy left-to-right slicing: a new slice opens exactly when an incoming
/// gate reuses a qubit already present in the current slice.
SlicedCircuit slice_circuit(const Circuit& circuit);

/// Accepts `{"num_qubits": n, "gates": [[a,b], ...]}`. A document carrying
/// `"slices": [[[a,b],...],...]` instead of `"gates"` is accepted and
/// flattened in order. Unknown keys are rejected.
Circuit parse_circuit(std::string_view json);
std::string serialize_circuit(const Circuit& circuit);
std::string serialize_sliced_circuit(const SlicedCircuit& circuit);

/// Uniform random circuit that slices into exactly `target_slices` slices.
Circuit random_circuit(int num_qubits, int target_slices, Rng& rng);

}  // namespace qalloc

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
#include <vector>

#include "qalloc/circuit.hpp"
#include "qalloc/encoding.hpp"
#include "qalloc/hardware.hpp"
#include "qalloc/policy.hpp"
#include "qalloc/rng.hpp"

namespace qalloc {

enum class AllocationMode { Sequential, Parallel, Ensemble, Baseline };

std::string to_string(AllocationMode mode);

/// assignment[t][q] is the core holding qubit q during slice t.
using Assignment = std::vector<std::vector<int>>;

struct Allocation {
  Assignment assignment;
  double total_cost = 0.0;
  AllocationMode mode = AllocationMode::Sequential;
  double wall_time_seconds = 0.0;
};

/// A gate pair (b >= 0, stored with a < b) or a single free qubit (b == -1).
struct AllocationUnit {
  int a = 0;
  int b = -1;

  [[nodiscard]] bool is_pair() const noexcept { return b >= 0; }
  [[nodiscard]] int size() const noexcept { return is_pair() ? 2 : 1; }
  friend bool operator==(const AllocationUnit&, const AllocationUnit&) = default;
};

/// Total movement cost: sum over consecutive slices and qubits of
/// F(R(t-1, q), R(t, q)).
double allocation_cost(const Assignment& assignment, const Matrix& cost);

struct Violation {
  enum class Kind { Shape, CoreRange, CoLocation, Capacity };
  Kind kind;
  int slice;
  /// Gate index within the slice, core index, or qubit index depending on kind.
  int index;

  [[nodiscard]] std::string describe() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Every broken constraint; an empty result means the allocation is valid.
std::vector<Violation> validate_allocation(const Assignment& assignment,
                                           const SlicedCircuit& circuit,
                                           const Hardware& hardware);

/// Gate pairs by E_t(a, b) descending, then free qubits by their largest
/// E_t row entry descending. Ties go to the smaller index (then the smaller
/// partner).
std::vector<AllocationUnit> sequential_order(const TimeSlice& slice,
                                             const Matrix& embedding, int num_qubits);

enum class Selection { Greedy, Sample };

struct AllocatorOptions {
  Selection selection = Selection::Greedy;
  /// Exploration noise ratio applied to every sampled distribution.
  double noise = 0.0;
  /// When false, cores without room stay selectable; choosing one is an
  /// illegal step and the unit's qubits stay on their previous-slice cores
  /// (slice 0: the lowest-index core with room).
  bool masking = true;
  /// Keep the feature tensor of every step in the trace.
  bool record_features = false;
};

struct StepRecord {
  int slice = 0;
  AllocationUnit unit;
  int action = 0;
  /// log pi(action | state) under the policy's own (un-noised) distribution.
  double log_prob = 0.0;
  bool legal = true;
  FeatureTensor features;
};

struct AllocationResult {
  Allocation allocation;
  std::vector<StepRecord> trace;
  std::size_t illegal_steps = 0;
  /// True when the final assignment satisfies every constraint.
  bool valid = true;
};

/// Slice by slice, units in sequential_order(), one policy call per unit.
/// Throws Infeasible when masking is on and some unit has no legal core.
AllocationResult allocate_sequential(const SlicedCircuit& circuit, const Hardware& hardware,
                                     const Policy& policy, const AllocatorOptions& options,
                                     Rng& rng);

/// `episodes` independent sequential episodes run in lockstep so every
/// policy call is batched across them. Unit order depends only on the
/// circuit, so step k of every episode places the same unit.
std::vector<AllocationResult> allocate_sequential_batch(
    const SlicedCircuit& circuit, const CircuitEncoding& encoding, const Hardware& hardware,
    const Policy& policy, const AllocatorOptions& options, std::size_t episodes, Rng& rng);

/// Per slice, first the pairs then the free qubits form a pool; each round
/// scores every (unit, core) combination in one flattened softmax, commits
/// the selected unit and removes it from the pool.
AllocationResult allocate_parallel(const SlicedCircuit& circuit, const Hardware& hardware,
                                   const Policy& policy, const AllocatorOptions& options,
                                   Rng& rng);

/// Greedy sequential and greedy parallel; the cheaper one wins, sequential
/// on ties. Wall time is the sum of both runs.
Allocation allocate_ensemble(const SlicedCircuit& circuit, const Hardware& hardware,
                             const Policy& policy);

}  // namespace qalloc

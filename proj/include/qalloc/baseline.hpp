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

#include <vector>

#include "qalloc/allocator.hpp"
#include "qalloc/circuit.hpp"
#include "qalloc/hardware.hpp"
#include "qalloc/matrix.hpp"

namespace qalloc {

struct AssignmentSolution {
  /// Column chosen for each row.
  std::vector<int> row_to_col;
  double total_cost = 0.0;
};

/// Minimum-cost assignment of every row to a distinct column (Kuhn-Munkres
/// with potentials, O(n^2 m)). Requires rows <= cols and finite entries.
AssignmentSolution hungarian(const Matrix& cost);

/// Cost used for slots a unit must not take.
inline constexpr double kForbiddenSlotCost = 1e9;

struct HqaOptions {
  /// Weight of the attraction term against movement cost.
  double attraction_weight = 1.0;
};

/// Non-learning comparator. Slice 0 is placed greedily by attraction among
/// already-placed qubits; every later slice solves two assignment problems,
/// gate pairs onto per-core pair slots, then free qubits onto the remaining
/// slots, with cost F(previous core, core) - weight * attraction, the
/// attraction measured against the previous slice's placement.
Allocation hqa_allocate(const SlicedCircuit& circuit, const Hardware& hardware,
                        const HqaOptions& options = {});

}  // namespace qalloc

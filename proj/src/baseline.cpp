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

#include "qalloc/baseline.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "qalloc/encoding.hpp"
#include "qalloc/errors.hpp"

namespace qalloc {

AssignmentSolution hungarian(const Matrix& cost) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  if (n > m) fail(ErrorKind::InvalidArgument, "assignment needs rows <= cols");
  for (double v : cost.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "assignment costs must be finite");
  }
  AssignmentSolution sol;
  if (n == 0) return sol;

  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  sol.row_to_col.assign(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] != 0) sol.row_to_col[owner[j] - 1] = static_cast<int>(j - 1);
  }
  for (std::size_t i = 0; i < n; ++i) sol.total_cost += cost(i, sol.row_to_col[i]);
  return sol;
}

namespace {

void place_first_slice(const SlicedCircuit& circuit, const Matrix& embedding,
                       const Hardware& hardware, std::vector<int>& row) {
  std::vector<int> room = hardware.capacities();
  const auto order = sequential_order(circuit.slice(0), embedding, circuit.num_qubits());
  for (const AllocationUnit& unit : order) {
    int best = -1;
    double best_attr = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < hardware.num_cores(); ++c) {
      if (room[c] < unit.size()) continue;
      double attr = attraction(embedding, row, unit.a, c);
      if (unit.is_pair()) attr += attraction(embedding, row, unit.b, c);
      if (attr > best_attr) {
        best_attr = attr;
        best = c;
      }
    }
    if (best < 0) fail(ErrorKind::Infeasible, "no core has room in slice 0");
    row[unit.a] = best;
    room[best] -= 1;
    if (unit.is_pair()) {
      row[unit.b] = best;
      room[best] -= 1;
    }
  }
}

}  // namespace

Allocation hqa_allocate(const SlicedCircuit& circuit, const Hardware& hardware,
                        const HqaOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const int q = circuit.num_qubits();
  if (hardware.total_capacity() < q) {
    fail(ErrorKind::Infeasible, "hardware holds fewer qubits than the circuit needs");
  }
  const auto embedding = circuit_embedding(circuit);
  const int cores = hardware.num_cores();
  const double weight = options.attraction_weight;

  Allocation out;
  out.mode = AllocationMode::Baseline;
  out.assignment.assign(circuit.num_slices(), std::vector<int>(static_cast<std::size_t>(q), -1));
  place_first_slice(circuit, embedding[0], hardware, out.assignment[0]);

  for (std::size_t t = 1; t < circuit.num_slices(); ++t) {
    const auto& prev = out.assignment[t - 1];
    auto& row = out.assignment[t];
    const Matrix& e = embedding[t];
    const auto order = sequential_order(circuit.slice(t), e, q);
    std::vector<AllocationUnit> pairs, singles;
    for (const auto& u : order) (u.is_pair() ? pairs : singles).push_back(u);

    auto unit_cost = [&](const AllocationUnit& u, int core) {
      double c = hardware.cost(prev[u.a], core) - weight * attraction(e, prev, u.a, core);
      if (u.is_pair()) c += hardware.cost(prev[u.b], core) - weight * attraction(e, prev, u.b, core);
      return c;
    };

    std::vector<int> used(static_cast<std::size_t>(cores), 0);
    if (!pairs.empty()) {
      std::vector<int> slot_core;
      for (int c = 0; c < cores; ++c) {
        for (int s = 0; s < hardware.capacity(c) / 2; ++s) slot_core.push_back(c);
      }
      if (slot_core.size() < pairs.size()) {
        fail(ErrorKind::Infeasible, "not enough room to co-locate the gates of slice " + std::to_string(t));
      }
      Matrix cost(pairs.size(), slot_core.size());
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (std::size_t j = 0; j < slot_core.size(); ++j) cost(i, j) = unit_cost(pairs[i], slot_core[j]);
      }
      const auto sol = hungarian(cost);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const int c = slot_core[sol.row_to_col[i]];
        row[pairs[i].a] = row[pairs[i].b] = c;
        used[c] += 2;
      }
    }
    if (!singles.empty()) {
      std::vector<int> slot_core;
      std::vector<char> taken;
      for (int c = 0; c < cores; ++c) {
        for (int s = 0; s < hardware.capacity(c); ++s) {
          slot_core.push_back(c);
          taken.push_back(s < used[c]);
        }
      }
      Matrix cost(singles.size(), slot_core.size());
      for (std::size_t i = 0; i < singles.size(); ++i) {
        for (std::size_t j = 0; j < slot_core.size(); ++j) {
          cost(i, j) = taken[j] ? kForbiddenSlotCost : unit_cost(singles[i], slot_core[j]);
        }
      }
      const auto sol = hungarian(cost);
      for (std::size_t i = 0; i < singles.size(); ++i) {
        const auto j = static_cast<std::size_t>(sol.row_to_col[i]);
        if (taken[j]) fail(ErrorKind::Infeasible, "free qubits do not fit in slice " + std::to_string(t));
        row[singles[i].a] = slot_core[j];
      }
    }
  }
  out.total_cost = allocation_cost(out.assignment, hardware.cost_matrix());
  out.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace qalloc

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

#include "qalloc/matrix.hpp"
#include "qalloc/rng.hpp"

namespace qalloc {

/// Multi-core device: per-core qubit capacities and a completed C x C
/// inter-core movement cost matrix.
class Hardware {
 public:
  Hardware() = default;
  /// `cost_matrix` must already be complete: symmetric, zero diagonal,
  /// non-negative. Use complete_cost_matrix() for sparse link descriptions.
  Hardware(std::vector<int> capacities, Matrix cost_matrix);

  /// Unit cost between every pair of distinct cores.
  static Hardware uniform(std::vector<int> capacities);
  static Hardware uniform(int num_cores, int capacity);

  [[nodiscard]] int num_cores() const noexcept {
    return static_cast<int>(capacities_.size());
  }
  [[nodiscard]] const std::vector<int>& capacities() const noexcept {
    return capacities_;
  }
  [[nodiscard]] int capacity(int core) const { return capacities_.at(core); }
  [[nodiscard]] int total_capacity() const noexcept;
  [[nodiscard]] const Matrix& cost_matrix() const noexcept { return cost_; }
  [[nodiscard]] double cost(int from, int to) const { return cost_(from, to); }

  friend bool operator==(const Hardware&, const Hardware&) = default;

 private:
  std::vector<int> capacities_;
  Matrix cost_;
};

/// Raw link description: entry (i, j) is the direct cost of the i-j link or
/// nullopt when the cores are not directly connected. Links are undirected;
/// if both (i, j) and (j, i) are given the cheaper one is used.
using RawCostMatrix = std::vector<std::vector<std::optional<double>>>;

/// All-pairs shortest-path closure. Throws InvalidArgument when a cost is
/// negative or the core graph is disconnected (naming an unreachable pair).
Matrix complete_cost_matrix(const RawCostMatrix& raw);

struct IntRange {
  int lo = 0;
  int hi = 0;
};

/// Samples core count and capacities uniformly from the ranges, resampling
/// until the device has at least `required_capacity + 2` slots and enough
/// even room to co-locate floor(required_capacity / 2) gates at once. Unit
/// costs. Throws InvalidArgument if the resample budget runs out.
Hardware random_hardware(Rng& rng, IntRange core_range, IntRange capacity_range,
                         int required_capacity);

/// `{"capacities": [...], "cost_matrix": [[...]] | "uniform"}`; null entries
/// in an explicit matrix are missing links and get completed.
Hardware parse_hardware(std::string_view json);
std::string serialize_hardware(const Hardware& hardware);

}  // namespace qalloc

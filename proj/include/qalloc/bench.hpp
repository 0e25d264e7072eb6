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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qalloc/allocator.hpp"
#include "qalloc/circuit.hpp"
#include "qalloc/hardware.hpp"
#include "qalloc/policy.hpp"

namespace qalloc {

struct BenchCircuit {
  std::string name;
  SlicedCircuit circuit;
  /// Member of the random set averaged into the "Random Avg" rows.
  bool random = false;
};

struct BenchRow {
  std::string circuit;
  int qubits = 0;
  int slices = 0;
  AllocationMode method = AllocationMode::Sequential;
  std::optional<double> total_cost;
  std::optional<double> normalized_cost;
  double wall_time_seconds = 0.0;
  /// Empty when the cell succeeded; otherwise why it failed.
  std::string error;
};

struct BenchmarkReport {
  std::vector<BenchRow> rows;
};

inline constexpr const char* kRandomAverageName = "Random Avg";
inline constexpr const char* kBenchHeader =
    "circuit,qubits,slices,method,total_cost,normalized_cost,wall_time_s,status";

/// Report label of a method; the baseline is "hqa_like".
std::string method_label(AllocationMode mode);

/// One row per (circuit, method), then one "Random Avg" row per method when
/// any circuit is marked random. Every allocation is re-validated and its
/// cost recomputed from the assignment before it is reported; failures are
/// kept as rows with an error. `policy` may be null when only the baseline
/// is requested.
BenchmarkReport benchmark_suite(const std::vector<BenchCircuit>& circuits,
                                const Hardware& hardware,
                                const std::vector<AllocationMode>& methods,
                                const Policy* policy);

/// `count` random circuits with `num_qubits` qubits and `slices` target
/// slices, named random_000, random_001, ...
std::vector<BenchCircuit> random_bench_circuits(std::size_t count, int num_qubits, int slices,
                                                std::uint64_t seed);

/// "5x10" or "10x10": that many cores of that capacity, unit costs.
Hardware bench_preset(const std::string& name);

/// `{"cost", "normalized_cost", "mode", "wall_time_s", "assignment"}`;
/// normalized_cost is null for single-slice circuits.
std::string allocation_to_json(const Allocation& allocation, const SlicedCircuit& circuit);

std::string report_csv(const BenchmarkReport& report);
std::string report_table(const BenchmarkReport& report);

}  // namespace qalloc

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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qalloc/allocator.hpp"
#include "qalloc/circuit.hpp"
#include "qalloc/hardware.hpp"
#include "qalloc/policy.hpp"

namespace qalloc {

struct ScheduleChange {
  std::size_t iteration = 0;
  double value = 0.0;

  friend bool operator==(const ScheduleChange&, const ScheduleChange&) = default;
};

struct TrainConfig {
  std::uint64_t seed = 0;
  std::size_t iterations = 28100;
  std::size_t group_size = 32;
  double learning_rate = 1e-4;

  IntRange qubits{4, 20};
  IntRange slices{4, 16};
  IntRange cores{2, 8};
  IntRange capacity{2, 12};

  /// Exploration noise: starts at `noise_initial`, multiplied by
  /// `noise_decay` after every iteration, overwritten at each reset.
  double noise_initial = 0.2;
  double noise_decay = 0.999;
  std::vector<ScheduleChange> noise_resets{{16000, 0.05}};
  /// Illegal-step penalty beta, piecewise constant from each change onwards.
  std::vector<ScheduleChange> penalty{{0, 0.3}, {16000, 0.5}};
  /// Kept for completeness; every step of an episode shares one advantage.
  double discount = 1.0;

  std::size_t validation_period = 25;
  std::size_t validation_circuits = 32;
  std::uint64_t validation_seed = 12345;
  IntRange validation_qubits{8, 20};
  IntRange validation_slices{4, 16};

  /// Abort when the valid-move ratio falls below this after the grace period.
  double min_valid_ratio = 0.05;
  std::size_t grace_iterations = 500;

  /// Steps per backward pass when replaying a group.
  std::size_t replay_chunk = 256;

  PolicyConfig policy;

  void validate() const;
  [[nodiscard]] double penalty_at(std::size_t iteration) const;
  [[nodiscard]] std::string to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(const std::string& json);
};

/// (c - mean) / population std; all zeros when std < 1e-8.
std::vector<double> normalized_advantage(std::span<const double> costs);

/// Movement cost per gate outside slice 0; nullopt for single-slice circuits.
std::optional<double> normalized_cost(double total_cost, const SlicedCircuit& circuit);
std::optional<double> normalized_cost(const Allocation& allocation, const SlicedCircuit& circuit);

/// N sampled sequential episodes with masking off and features recorded.
std::vector<AllocationResult> rollout_group(const SlicedCircuit& circuit,
                                            const CircuitEncoding& encoding,
                                            const Hardware& hardware, const Policy& policy,
                                            std::size_t group_size, double noise, Rng& rng);

struct LossResult {
  double loss = 0.0;
  std::size_t steps = 0;
};

/// Accumulates into the policy's gradient buffers the gradient of
///   sum_n sum_steps [legal: (1 - beta) A_n log pi(a|s); illegal: beta log pi(a|s)]
/// by replaying the recorded features. Throws Numeric on a non-finite loss.
LossResult grpo_reinforce_loss(Policy& policy, std::span<const AllocationResult> records,
                               std::span<const double> advantages, double penalty,
                               std::size_t chunk = 256);

struct MetricsRow {
  std::size_t iteration = 0;
  std::optional<double> mean_group_cost;
  std::optional<double> validation_cost;
  std::optional<double> valid_move_ratio;
  double noise = 0.0;
  double penalty = 0.0;
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
};

/// Fixed validation instances drawn from `validation_seed`.
struct ValidationSet {
  std::vector<SlicedCircuit> circuits;
  std::vector<Hardware> hardware;

  static ValidationSet build(const TrainConfig& config);
};

/// Mean normalized cost of greedy masked sequential allocation.
double validation_cost(const Policy& policy, const ValidationSet& set);

using MetricsCallback = std::function<void(const MetricsRow&)>;

/// Training loop. Validation runs before the update of every
/// `validation_period`-th iteration and once more after the last one (that
/// final row carries iteration == config.iterations).
TrainResult train(const TrainConfig& config, Policy& policy, const MetricsCallback& on_row = {});

inline constexpr const char* kMetricsHeader =
    "iteration,mean_group_cost,validation_cost,valid_move_ratio,alpha,beta";
std::string format_metrics_row(const MetricsRow& row);
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

}  // namespace qalloc

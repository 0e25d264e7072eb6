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
#include <span>
#include <string>
#include <vector>

#include "qalloc/matrix.hpp"
#include "qalloc/nn/autograd.hpp"
#include "qalloc/nn/layers.hpp"
#include "qalloc/nn/parameters.hpp"
#include "qalloc/rng.hpp"

namespace qalloc {

inline constexpr std::size_t kFeatureCount = 10;

struct PolicyConfig {
  std::size_t hidden = 64;
  /// Layers in each of the two transformer encoders.
  std::size_t layers = 2;
  std::size_t heads = 2;

  void validate() const;
  [[nodiscard]] std::string to_json() const;
  static PolicyConfig from_json(const std::string& json);

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

/// Everything the policy sees when placing one unit (a gate pair or a single
/// qubit) during slice `slice`.
struct StepContext {
  int slice = 0;
  int qubit_a = 0;
  /// -1 for a single-qubit step.
  int qubit_b = -1;
  /// Core of every qubit in the previous slice; empty for slice 0.
  std::span<const int> previous;
  /// Core of every qubit placed so far in this slice, -1 if not yet placed.
  std::span<const int> current;
  /// Remaining room per core at this step.
  std::span<const int> free_capacity;
  const Matrix* cost = nullptr;
  const Matrix* embedding = nullptr;
  const Matrix* next_interaction = nullptr;
};

/// key: [C, Q, 10], query: [C, 2, 10], both row-major.
struct FeatureTensor {
  std::size_t cores = 0;
  std::size_t qubits = 0;
  std::vector<double> key;
  std::vector<double> query;
};

/// Stack of feature tensors sharing (C, Q); the leading batch axis.
struct FeatureBatch {
  std::size_t batch = 0;
  std::size_t cores = 0;
  std::size_t qubits = 0;
  std::vector<double> key;
  std::vector<double> query;

  void append(const FeatureTensor& features);
};

/// The ten per-(core, qubit) features. Pair steps are canonicalised so the
/// lower qubit index plays q_a; the features of an unordered gate do not
/// depend on how it was written. Throws InvalidArgument when a qubit under
/// allocation is already placed in this slice.
FeatureTensor build_features(const StepContext& context);
void build_features_into(const StepContext& context, std::span<double> key,
                         std::span<double> query);

/// Size-agnostic allocation policy. Key features are projected and encoded
/// per core over the qubit axis, the combined query reads each core's
/// encoded qubits through cross attention, core summaries attend to each
/// other, and a linear head emits one logit per core.
class Policy {
 public:
  explicit Policy(PolicyConfig config = {}, std::uint64_t seed = 0);

  Policy(Policy&&) noexcept = default;
  Policy& operator=(Policy&&) noexcept = default;
  Policy(const Policy&) = delete;
  Policy& operator=(const Policy&) = delete;

  [[nodiscard]] Policy clone() const;

  [[nodiscard]] const PolicyConfig& config() const noexcept { return config_; }

  /// Logits [B, C], recorded for backprop when grad mode is on.
  [[nodiscard]] nn::Var forward(const FeatureBatch& batch) const;
  /// Logits [B, C] without building a graph.
  [[nodiscard]] nn::Tensor logits(const FeatureBatch& batch) const;

  nn::ParameterStore& parameters() noexcept { return store_; }
  [[nodiscard]] const nn::ParameterStore& parameters() const noexcept { return store_; }

  void save(const std::filesystem::path& path) const;
  static Policy load(const std::filesystem::path& path);
  [[nodiscard]] std::string encode() const;
  static Policy decode(const std::string& bytes);

 private:
  PolicyConfig config_;
  nn::ParameterStore store_;
  nn::Linear key_projection_;
  nn::Linear query_projection_;
  nn::Encoder qubit_encoder_;
  nn::MultiHeadAttention core_readout_;
  nn::Encoder core_encoder_;
  nn::Linear head_;
};

/// Softmax over the legal cores (all cores when `legal` is empty), then
/// exploration noise p' = alpha * x + (1 - alpha) * p with x ~ U(0,1) on the
/// legal entries, renormalised. alpha == 0 returns the softmax unchanged and
/// draws nothing from `rng`. Throws Infeasible when no core is legal.
std::vector<double> action_distribution(std::span<const double> logits,
                                        std::span<const char> legal, double alpha,
                                        Rng& rng);

/// Highest-probability index, lowest index on ties.
int argmax_index(std::span<const double> probs);
/// Draws an index; zero-probability entries are never returned.
int sample_index(std::span<const double> probs, Rng& rng);

}  // namespace qalloc

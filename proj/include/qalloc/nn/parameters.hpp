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
#include <filesystem>
#include <string>
#include <vector>

#include "qalloc/nn/autograd.hpp"
#include "qalloc/rng.hpp"

namespace qalloc::nn {

/// Named trainable tensors plus their Adam moment buffers.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Var param;
    Tensor first_moment;
    Tensor second_moment;
  };

  /// Registers a parameter; names must be unique.
  Var add(std::string name, Tensor init);
  [[nodiscard]] Var find(const std::string& name) const;

  [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::vector<Entry>& entries() noexcept { return entries_; }
  [[nodiscard]] std::size_t num_parameters() const noexcept;

  void zero_grad();

  /// Copies values, moments and the step counter from `other`, which must
  /// hold the same names and shapes in the same order.
  void assign_from(const ParameterStore& other);

  std::uint64_t step = 0;

 private:
  std::vector<Entry> entries_;
};

/// Xavier-uniform [fan_in, fan_out] matrix.
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update from the gradients accumulated on each
/// parameter. Parameters without a gradient buffer are treated as zero
/// gradient. Throws Numeric (and leaves the store untouched) if any gradient
/// is non-finite.
void adam_step(ParameterStore& store, const AdamConfig& config);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_json;
  ParameterStore store;
};

/// Binary, little-endian: magic, version, config JSON, step, then per tensor
/// name, shape, values, first and second moments as IEEE-754 binary64, and a
/// trailing CRC-32 over everything before it.
void save_checkpoint(const ParameterStore& store, const std::string& config_json,
                     const std::filesystem::path& path);
/// Throws Checkpoint on I/O failure, bad magic, version mismatch,
/// truncation, or checksum mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string encode_checkpoint(const ParameterStore& store, const std::string& config_json);
Checkpoint decode_checkpoint(const std::string& bytes);

}  // namespace qalloc::nn

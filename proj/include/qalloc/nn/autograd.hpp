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
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace qalloc::nn {

/// Dense row-major tensor of doubles. Most ops view it as a matrix whose
/// column count is the last dimension.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  [[nodiscard]] const std::vector<std::size_t>& shape() const noexcept {
    return shape_;
  }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] std::size_t cols() const noexcept {
    return shape_.empty() ? 1 : shape_.back();
  }
  [[nodiscard]] std::size_t rows() const noexcept {
    return cols() == 0 ? 0 : data_.size() / cols();
  }

  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* ptr() noexcept { return data_.data(); }
  [[nodiscard]] const double* ptr() const noexcept { return data_.data(); }

  /// Same data, new shape; the element count must match.
  [[nodiscard]] Tensor reshaped(std::vector<std::size_t> shape) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::size_t element_count(const std::vector<std::size_t>& shape);

struct Node;
using Var = std::shared_ptr<Node>;

/// A value in the computation graph. Gradients accumulate into `grad`, which
/// is allocated the first time something flows into it.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<Var> inputs;
  std::function<void(Node&)> backward_fn;

  /// Zero-initialised gradient buffer matching `value`.
  Tensor& grad_buffer();
};

/// Disables graph recording for the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled() noexcept;

Var constant(Tensor value);
Var parameter(Tensor value);

/// Back-propagates from a scalar root (seed gradient 1).
void backward(const Var& root);

// Ops. Shapes are [rows, cols] views unless stated otherwise.

/// x [n, k] times w [k, m].
Var matmul(const Var& x, const Var& w);
/// x [n, m] plus bias [m] broadcast over rows.
Var add_bias(const Var& x, const Var& bias);
Var add(const Var& a, const Var& b);
Var relu(const Var& x);
/// Normalises each row, then scales by gamma [m] and shifts by beta [m].
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
/// Multi-head scaled dot-product attention on already-projected inputs.
/// q is [groups * len_q, d], k and v are [groups * len_k, d]; each group is
/// an independent sequence and d is split evenly across `heads`.
Var attention(const Var& q, const Var& k, const Var& v, std::size_t groups,
              std::size_t heads);
/// [n * group, m] -> [n, m], summing consecutive blocks of `group` rows.
Var sum_row_groups(const Var& x, std::size_t group);
Var reshape(const Var& x, std::vector<std::size_t> shape);
/// Scalar sum_b weights[b] * log softmax(logits[b])[actions[b]].
Var weighted_log_prob(const Var& logits, std::span<const int> actions,
                      std::span<const double> weights);
/// Scalar sum of all entries times `weights` (same size); used as a probe
/// in gradient checks.
Var weighted_sum(const Var& x, std::span<const double> weights);

}  // namespace qalloc::nn

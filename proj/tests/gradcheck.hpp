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

// Central finite-difference gradient checking for the autograd ops.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "qalloc/nn/autograd.hpp"
#include "qalloc/rng.hpp"

namespace qalloc::testing {

inline nn::Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  nn::Tensor t(std::move(shape));
  std::normal_distribution<double> n(0.0, scale);
  for (double& v : t.data()) v = n(rng);
  return t;
}

struct GradCheck {
  /// Worst leaf's ||analytic - numeric|| / max(||analytic||, ||numeric||, floor)
  /// with floor = 1e-2 * (norm of the whole analytic gradient, at least 1e-6).
  /// The floor covers leaves whose gradient is identically zero (key biases,
  /// for one): there both sides are round-off and only an absolute
  /// comparison means anything.
  double error = 0.0;
  std::size_t checked = 0;
  /// Coordinates left out because the difference stencil straddles a ReLU
  /// kink: the two one-sided slopes disagree far beyond what the curvature
  /// of a smooth function allows at this step.
  std::size_t skipped = 0;

  [[nodiscard]] double skipped_fraction() const {
    return checked + skipped == 0 ? 0.0
                                  : static_cast<double>(skipped) / static_cast<double>(checked + skipped);
  }
};

/// Random linear probe sum(w * build()) differentiated analytically and by
/// central differences with step `eps` in every entry of every leaf.
inline GradCheck check_gradients(const std::vector<nn::Var>& leaves,
                                 const std::function<nn::Var()>& build, Rng& rng,
                                 double eps = 1e-4) {
  nn::Var out = build();
  std::vector<double> w(out->value.size());
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : w) v = n(rng);
  for (const auto& leaf : leaves) leaf->grad = nn::Tensor();
  nn::backward(nn::weighted_sum(out, w));

  auto probe = [&] {
    nn::NoGradGuard guard;
    nn::Var o = build();
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * o->value[i];
    return s;
  };

  double total2 = 0;
  for (const auto& leaf : leaves) {
    for (double g : leaf->grad_buffer().data()) total2 += g * g;
  }
  const double floor = std::max(1e-2 * std::sqrt(total2), 1e-6);

  GradCheck result;
  const double base = probe();
  for (const auto& leaf : leaves) {
    const nn::Tensor analytic = leaf->grad_buffer();
    double diff2 = 0, a2 = 0, f2 = 0;
    for (std::size_t i = 0; i < leaf->value.size(); ++i) {
      const double saved = leaf->value[i];
      leaf->value[i] = saved + eps;
      const double plus = probe();
      leaf->value[i] = saved - eps;
      const double minus = probe();
      leaf->value[i] = saved;
      const double forward_slope = (plus - base) / eps;
      const double backward_slope = (base - minus) / eps;
      if (std::abs(forward_slope - backward_slope) >
          1e-2 * std::max(1.0, std::abs(forward_slope) + std::abs(backward_slope))) {
        ++result.skipped;
        continue;
      }
      ++result.checked;
      const double numeric = (plus - minus) / (2 * eps);
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += analytic[i] * analytic[i];
      f2 += numeric * numeric;
    }
    const double denom = std::max({std::sqrt(a2), std::sqrt(f2), floor});
    result.error = std::max(result.error, std::sqrt(diff2) / denom);
  }
  return result;
}

inline double gradient_error(const std::vector<nn::Var>& leaves,
                             const std::function<nn::Var()>& build, Rng& rng,
                             double eps = 1e-4) {
  return check_gradients(leaves, build, rng, eps).error;
}

}  // namespace qalloc::testing

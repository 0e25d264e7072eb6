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

#include "qalloc/nn/autograd.hpp"
#include "qalloc/nn/parameters.hpp"
#include "qalloc/rng.hpp"

namespace qalloc::nn {

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, std::size_t in,
         std::size_t out, Rng& rng);

  [[nodiscard]] Var operator()(const Var& x) const;

  [[nodiscard]] const Var& weight() const noexcept { return weight_; }
  [[nodiscard]] const Var& bias() const noexcept { return bias_; }

 private:
  Var weight_;
  Var bias_;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, std::size_t width);

  [[nodiscard]] Var operator()(const Var& x) const;

 private:
  Var gamma_;
  Var beta_;
};

/// Projections around attention(); query and context rows are grouped into
/// `groups` independent sequences.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore& store, const std::string& name,
                     std::size_t width, std::size_t heads, Rng& rng);

  [[nodiscard]] Var operator()(const Var& query, const Var& context,
                               std::size_t groups) const;

 private:
  Linear q_, k_, v_, o_;
  std::size_t heads_ = 1;
};

/// Post-norm transformer layer: x = LN(x + MHA(x)); x = LN(x + FFN(x)) with
/// a ReLU feed-forward of width 2 * width.
class EncoderLayer {
 public:
  EncoderLayer() = default;
  EncoderLayer(ParameterStore& store, const std::string& name, std::size_t width,
               std::size_t heads, Rng& rng);

  [[nodiscard]] Var operator()(const Var& x, std::size_t groups) const;

 private:
  MultiHeadAttention attention_;
  LayerNorm norm1_, norm2_;
  Linear ff1_, ff2_;
};

class Encoder {
 public:
  Encoder() = default;
  Encoder(ParameterStore& store, const std::string& name, std::size_t width,
          std::size_t heads, std::size_t layers, Rng& rng);

  [[nodiscard]] Var operator()(Var x, std::size_t groups) const;

 private:
  std::vector<EncoderLayer> layers_;
};

/// Softmax over the entries whose mask is set; masked entries get exactly 0.
/// Returns an empty vector when nothing is unmasked. An empty mask means
/// everything is allowed.
std::vector<double> masked_softmax(std::span<const double> logits,
                                   std::span<const char> mask = {});

}  // namespace qalloc::nn

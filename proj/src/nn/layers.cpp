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

#include "qalloc/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "qalloc/errors.hpp"

namespace qalloc::nn {

Linear::Linear(ParameterStore& store, const std::string& name, std::size_t in,
               std::size_t out, Rng& rng)
    : weight_(store.add(name + ".weight", xavier_uniform(in, out, rng))),
      bias_(store.add(name + ".bias", Tensor({out}, 0.0))) {}

Var Linear::operator()(const Var& x) const { return add_bias(matmul(x, weight_), bias_); }

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, std::size_t width)
    : gamma_(store.add(name + ".gamma", Tensor({width}, 1.0))),
      beta_(store.add(name + ".beta", Tensor({width}, 0.0))) {}

Var LayerNorm::operator()(const Var& x) const { return layer_norm(x, gamma_, beta_); }

MultiHeadAttention::MultiHeadAttention(ParameterStore& store, const std::string& name,
                                       std::size_t width, std::size_t heads, Rng& rng)
    : q_(store, name + ".q", width, width, rng),
      k_(store, name + ".k", width, width, rng),
      v_(store, name + ".v", width, width, rng),
      o_(store, name + ".o", width, width, rng),
      heads_(heads) {
  if (heads == 0 || width % heads != 0) {
    fail(ErrorKind::InvalidArgument, "attention width must be divisible by the head count");
  }
}

Var MultiHeadAttention::operator()(const Var& query, const Var& context,
                                   std::size_t groups) const {
  return o_(attention(q_(query), k_(context), v_(context), groups, heads_));
}

EncoderLayer::EncoderLayer(ParameterStore& store, const std::string& name,
                           std::size_t width, std::size_t heads, Rng& rng)
    : attention_(store, name + ".attn", width, heads, rng),
      norm1_(store, name + ".norm1", width),
      norm2_(store, name + ".norm2", width),
      ff1_(store, name + ".ff1", width, 2 * width, rng),
      ff2_(store, name + ".ff2", 2 * width, width, rng) {}

Var EncoderLayer::operator()(const Var& x, std::size_t groups) const {
  Var h = norm1_(add(x, attention_(x, x, groups)));
  return norm2_(add(h, ff2_(relu(ff1_(h)))));
}

Encoder::Encoder(ParameterStore& store, const std::string& name, std::size_t width,
                 std::size_t heads, std::size_t layers, Rng& rng) {
  layers_.reserve(layers);
  for (std::size_t i = 0; i < layers; ++i) {
    layers_.emplace_back(store, name + "." + std::to_string(i), width, heads, rng);
  }
}

Var Encoder::operator()(Var x, std::size_t groups) const {
  for (const auto& layer : layers_) x = layer(x, groups);
  return x;
}

std::vector<double> masked_softmax(std::span<const double> logits,
                                   std::span<const char> mask) {
  const bool masked = !mask.empty();
  double peak = -INFINITY;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!masked || mask[i]) peak = std::max(peak, logits[i]);
  }
  if (peak == -INFINITY) return {};
  std::vector<double> p(logits.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!masked || mask[i]) {
      p[i] = std::exp(logits[i] - peak);
      z += p[i];
    }
  }
  for (double& v : p) v /= z;
  return p;
}

}  // namespace qalloc::nn

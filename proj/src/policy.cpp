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

#include "qalloc/policy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "qalloc/encoding.hpp"
#include "qalloc/errors.hpp"

namespace qalloc {

void PolicyConfig::validate() const {
  if (hidden == 0 || heads == 0 || hidden % heads != 0) {
    fail(ErrorKind::Config, "policy hidden width must be a positive multiple of the head count");
  }
  if (layers == 0) fail(ErrorKind::Config, "policy needs at least one encoder layer");
}

std::string PolicyConfig::to_json() const {
  nlohmann::ordered_json j;
  j["hidden"] = hidden;
  j["layers"] = layers;
  j["heads"] = heads;
  return j.dump();
}

PolicyConfig PolicyConfig::from_json(const std::string& text) {
  PolicyConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) fail(ErrorKind::Config, "policy config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key != "hidden" && key != "layers" && key != "heads") {
        fail(ErrorKind::Config, "unknown key '" + key + "' in policy config");
      }
      if (!value.is_number_unsigned()) {
        fail(ErrorKind::Config, "policy '" + key + "' must be a non-negative integer");
      }
    }
    c.hidden = j.value("hidden", c.hidden);
    c.layers = j.value("layers", c.layers);
    c.heads = j.value("heads", c.heads);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("bad policy config: ") + e.what());
  }
  c.validate();
  return c;
}

void FeatureBatch::append(const FeatureTensor& f) {
  if (batch == 0) {
    cores = f.cores;
    qubits = f.qubits;
  } else if (f.cores != cores || f.qubits != qubits) {
    fail(ErrorKind::InvalidArgument, "feature batch mixes problem sizes");
  }
  key.insert(key.end(), f.key.begin(), f.key.end());
  query.insert(query.end(), f.query.begin(), f.query.end());
  ++batch;
}

void build_features_into(const StepContext& ctx, std::span<double> key,
                         std::span<double> query) {
  const auto cores = ctx.free_capacity.size();
  const auto qubits = ctx.current.size();
  if (!ctx.cost || !ctx.embedding || !ctx.next_interaction) {
    fail(ErrorKind::InvalidArgument, "step context is missing matrices");
  }
  if (key.size() != cores * qubits * kFeatureCount || query.size() != cores * 2 * kFeatureCount) {
    fail(ErrorKind::InvalidArgument, "feature buffers have the wrong size");
  }
  const bool pair = ctx.qubit_b >= 0;
  const int qa = pair ? std::min(ctx.qubit_a, ctx.qubit_b) : ctx.qubit_a;
  const int qb = pair ? std::max(ctx.qubit_a, ctx.qubit_b) : -1;
  if (qa < 0 || static_cast<std::size_t>(qa) >= qubits ||
      (pair && static_cast<std::size_t>(qb) >= qubits)) {
    fail(ErrorKind::InvalidArgument, "qubit under allocation is out of range");
  }
  if (pair && qa == qb) fail(ErrorKind::InvalidArgument, "pair step needs two distinct qubits");
  if (ctx.current[qa] >= 0 || (pair && ctx.current[qb] >= 0)) {
    fail(ErrorKind::InvalidArgument, "qubit under allocation is already placed in this slice");
  }
  const bool first_slice = ctx.previous.empty();
  if (!first_slice && ctx.previous.size() != qubits) {
    fail(ErrorKind::InvalidArgument, "previous assignment has the wrong length");
  }

  const Matrix& e = *ctx.embedding;
  const Matrix& n = *ctx.next_interaction;
  const Matrix& f = *ctx.cost;
  for (std::size_t c = 0; c < cores; ++c) {
    const int core = static_cast<int>(c);
    const double free_term =
        1.0 / (static_cast<double>(std::max(ctx.free_capacity[c], 0)) + 1.0);
    double move = 0.0;
    if (!first_slice) {
      move = f(ctx.previous[qa], c);
      if (pair) move += f(ctx.previous[qb], c);
    }
    const double move_term = 1.0 / (move + 1.0);
    double attr = attraction(e, ctx.current, qa, core);
    if (pair) attr = 0.5 * (attr + attraction(e, ctx.current, qb, core));

    for (std::size_t q = 0; q < qubits; ++q) {
      double* x = key.data() + (c * qubits + q) * kFeatureCount;
      const int qi = static_cast<int>(q);
      x[0] = (qi == qa || qi == qb) ? 1.0 : 0.0;
      x[1] = (!first_slice && ctx.previous[q] == core) ? 1.0 : 0.0;
      x[2] = ctx.current[q] == core ? 1.0 : 0.0;
      x[3] = free_term;
      x[4] = move_term;
      x[5] = attr;
      x[6] = e(q, qa);
      x[7] = pair ? e(q, qb) : 0.0;
      x[8] = n(q, qa);
      x[9] = pair ? n(q, qb) : 0.0;
    }
    double* qa_row = query.data() + (c * 2) * kFeatureCount;
    const double* src_a = key.data() + (c * qubits + qa) * kFeatureCount;
    std::copy(src_a, src_a + kFeatureCount, qa_row);
    double* qb_row = qa_row + kFeatureCount;
    if (pair) {
      const double* src_b = key.data() + (c * qubits + qb) * kFeatureCount;
      std::copy(src_b, src_b + kFeatureCount, qb_row);
    } else {
      std::fill(qb_row, qb_row + kFeatureCount, 0.0);
    }
  }
}

FeatureTensor build_features(const StepContext& ctx) {
  FeatureTensor t;
  t.cores = ctx.free_capacity.size();
  t.qubits = ctx.current.size();
  t.key.assign(t.cores * t.qubits * kFeatureCount, 0.0);
  t.query.assign(t.cores * 2 * kFeatureCount, 0.0);
  build_features_into(ctx, t.key, t.query);
  return t;
}

Policy::Policy(PolicyConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const std::size_t h = config_.hidden;
  key_projection_ = nn::Linear(store_, "key_projection", kFeatureCount, h, rng);
  query_projection_ = nn::Linear(store_, "query_projection", kFeatureCount, h, rng);
  qubit_encoder_ = nn::Encoder(store_, "qubit_encoder", h, config_.heads, config_.layers, rng);
  core_readout_ = nn::MultiHeadAttention(store_, "core_readout", h, config_.heads, rng);
  core_encoder_ = nn::Encoder(store_, "core_encoder", h, config_.heads, config_.layers, rng);
  head_ = nn::Linear(store_, "head", h, 1, rng);
}

Policy Policy::clone() const { return decode(encode()); }

nn::Var Policy::forward(const FeatureBatch& batch) const {
  const std::size_t b = batch.batch, c = batch.cores, q = batch.qubits;
  if (b == 0 || c == 0 || q == 0) fail(ErrorKind::InvalidArgument, "empty feature batch");
  if (batch.key.size() != b * c * q * kFeatureCount || batch.query.size() != b * c * 2 * kFeatureCount) {
    fail(ErrorKind::InvalidArgument, "feature batch has inconsistent sizes");
  }
  auto key = nn::constant(nn::Tensor({b * c * q, kFeatureCount}, batch.key));
  auto query = nn::constant(nn::Tensor({b * c * 2, kFeatureCount}, batch.query));

  nn::Var keys = qubit_encoder_(key_projection_(key), b * c);
  nn::Var combined = nn::sum_row_groups(query_projection_(query), 2);
  nn::Var per_core = core_readout_(combined, keys, b * c);
  nn::Var cores = core_encoder_(per_core, b);
  return nn::reshape(head_(cores), {b, c});
}

nn::Tensor Policy::logits(const FeatureBatch& batch) const {
  nn::NoGradGuard guard;
  return forward(batch)->value;
}

std::string Policy::encode() const { return nn::encode_checkpoint(store_, config_.to_json()); }

Policy Policy::decode(const std::string& bytes) {
  nn::Checkpoint ck = nn::decode_checkpoint(bytes);
  PolicyConfig config;
  try {
    config = PolicyConfig::from_json(ck.config_json);
  } catch (const Error& e) {
    fail(ErrorKind::Checkpoint, e.what());
  }
  Policy p(config, 0);
  p.store_.assign_from(ck.store);
  return p;
}

void Policy::save(const std::filesystem::path& path) const {
  nn::save_checkpoint(store_, config_.to_json(), path);
}

Policy Policy::load(const std::filesystem::path& path) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  PolicyConfig config;
  try {
    config = PolicyConfig::from_json(ck.config_json);
  } catch (const Error& e) {
    fail(ErrorKind::Checkpoint, e.what());
  }
  Policy p(config, 0);
  p.store_.assign_from(ck.store);
  return p;
}

std::vector<double> action_distribution(std::span<const double> logits,
                                        std::span<const char> legal, double alpha,
                                        Rng& rng) {
  if (alpha < 0.0 || alpha > 1.0) fail(ErrorKind::InvalidArgument, "noise ratio must lie in [0, 1]");
  std::vector<double> p = nn::masked_softmax(logits, legal);
  if (p.empty()) fail(ErrorKind::Infeasible, "no legal action");
  if (alpha == 0.0) return p;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = u(rng);
    if (legal.empty() || legal[i]) {
      p[i] = alpha * x + (1.0 - alpha) * p[i];
      total += p[i];
    }
  }
  for (double& v : p) v /= total;
  return p;
}

int argmax_index(std::span<const double> probs) {
  int best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = static_cast<int>(i);
  }
  return best;
}

int sample_index(std::span<const double> probs, Rng& rng) {
  double total = 0.0;
  for (double p : probs) total += p;
  std::uniform_real_distribution<double> u(0.0, total);
  const double r = u(rng);
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = static_cast<int>(i);
    if (r < acc) return last_positive;
  }
  if (last_positive < 0) fail(ErrorKind::Infeasible, "no action with positive probability");
  return last_positive;
}

}  // namespace qalloc

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

#include "qalloc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <type_traits>

#include "qalloc/encoding.hpp"
#include "qalloc/errors.hpp"

namespace qalloc {

namespace {

using json = nlohmann::ordered_json;

json range_to_json(IntRange r) { return json::array({r.lo, r.hi}); }

IntRange range_from_json(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer()) {
    fail(ErrorKind::Config, std::string("'") + key + "' must be [lo, hi]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

json schedule_to_json(const std::vector<ScheduleChange>& s) {
  json out = json::array();
  for (const auto& c : s) out.push_back(json::array({c.iteration, c.value}));
  return out;
}

std::vector<ScheduleChange> schedule_from_json(const json& j, const char* key) {
  if (!j.is_array()) fail(ErrorKind::Config, std::string("'") + key + "' must be a list");
  std::vector<ScheduleChange> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number()) {
      fail(ErrorKind::Config,
           std::string("'") + key + "' entries must be [iteration, value]");
    }
    out.push_back({e[0].get<std::size_t>(), e[1].get<double>()});
  }
  return out;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) fail(ErrorKind::Config, std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) fail(ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  // get<unsigned>() silently wraps negatives and truncates fractions.
  const bool ok = std::is_floating_point_v<T> ? v.is_number()
                  : std::is_unsigned_v<T>     ? v.is_number_unsigned()
                                              : v.is_number_integer();
  if (!ok) fail(ErrorKind::Config, std::string("bad value for '") + key + "'");
  try {
    out = v.get<T>();
  } catch (const json::exception&) {
    fail(ErrorKind::Config, std::string("bad value for '") + key + "'");
  }
}

void check_range(IntRange r, int min_lo, const char* name) {
  if (r.lo < min_lo || r.hi < r.lo) {
    fail(ErrorKind::Config, std::string(name) + " range must satisfy " +
                                std::to_string(min_lo) + " <= lo <= hi");
  }
}

int draw(Rng& rng, IntRange r) { return std::uniform_int_distribution<int>(r.lo, r.hi)(rng); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations == 0) fail(ErrorKind::Config, "iterations must be positive");
  if (group_size < 2) fail(ErrorKind::Config, "group_size must be at least 2");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorKind::Config, "learning_rate must be positive");
  }
  check_range(qubits, 2, "qubits");
  check_range(slices, 1, "slices");
  check_range(cores, 1, "cores");
  check_range(capacity, 1, "capacity");
  check_range(validation_qubits, 2, "validation qubits");
  check_range(validation_slices, 1, "validation slices");
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(noise_initial) || !in_unit(noise_decay)) {
    fail(ErrorKind::Config, "noise initial and decay must lie in [0, 1]");
  }
  for (const auto& r : noise_resets) {
    if (!in_unit(r.value)) fail(ErrorKind::Config, "noise reset values must lie in [0, 1]");
  }
  if (penalty.empty()) fail(ErrorKind::Config, "penalty schedule must not be empty");
  for (const auto& p : penalty) {
    if (!(p.value > 0.0 && p.value < 1.0)) {
      fail(ErrorKind::Config, "penalty values must lie strictly between 0 and 1");
    }
  }
  if (validation_period == 0) fail(ErrorKind::Config, "validation period must be positive");
  if (validation_circuits == 0) fail(ErrorKind::Config, "validation circuits must be positive");
  if (replay_chunk == 0) fail(ErrorKind::Config, "replay_chunk must be positive");
  if (!in_unit(min_valid_ratio)) fail(ErrorKind::Config, "min_valid_ratio must lie in [0, 1]");
  policy.validate();
}

double TrainConfig::penalty_at(std::size_t iteration) const {
  double beta = penalty.empty() ? 0.0 : penalty.front().value;
  std::size_t best = 0;
  bool found = false;
  for (const auto& p : penalty) {
    if (p.iteration <= iteration && (!found || p.iteration >= best)) {
      beta = p.value;
      best = p.iteration;
      found = true;
    }
  }
  return beta;
}

std::string TrainConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["iterations"] = iterations;
  j["group_size"] = group_size;
  j["learning_rate"] = learning_rate;
  j["qubits"] = range_to_json(qubits);
  j["slices"] = range_to_json(slices);
  j["cores"] = range_to_json(cores);
  j["capacity"] = range_to_json(capacity);
  j["noise"] = {{"initial", noise_initial},
                {"decay", noise_decay},
                {"resets", schedule_to_json(noise_resets)}};
  j["penalty"] = schedule_to_json(penalty);
  j["discount"] = discount;
  j["validation"] = {{"period", validation_period},
                     {"circuits", validation_circuits},
                     {"seed", validation_seed},
                     {"qubits", range_to_json(validation_qubits)},
                     {"slices", range_to_json(validation_slices)}};
  j["min_valid_ratio"] = min_valid_ratio;
  j["grace_iterations"] = grace_iterations;
  j["replay_chunk"] = replay_chunk;
  j["policy"] = json::parse(policy.to_json());
  return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
  }
  check_keys(j,
             {"seed", "iterations", "group_size", "learning_rate", "qubits", "slices", "cores",
              "capacity", "noise", "penalty", "discount", "validation", "min_valid_ratio",
              "grace_iterations", "replay_chunk", "policy"},
             "training config");
  TrainConfig c;
  read(j, "seed", c.seed);
  read(j, "iterations", c.iterations);
  read(j, "group_size", c.group_size);
  read(j, "learning_rate", c.learning_rate);
  read(j, "discount", c.discount);
  read(j, "min_valid_ratio", c.min_valid_ratio);
  read(j, "grace_iterations", c.grace_iterations);
  read(j, "replay_chunk", c.replay_chunk);
  if (j.contains("qubits")) c.qubits = range_from_json(j["qubits"], "qubits");
  if (j.contains("slices")) c.slices = range_from_json(j["slices"], "slices");
  if (j.contains("cores")) c.cores = range_from_json(j["cores"], "cores");
  if (j.contains("capacity")) c.capacity = range_from_json(j["capacity"], "capacity");
  if (j.contains("noise")) {
    const json& n = j["noise"];
    check_keys(n, {"initial", "decay", "resets"}, "noise");
    read(n, "initial", c.noise_initial);
    read(n, "decay", c.noise_decay);
    if (n.contains("resets")) c.noise_resets = schedule_from_json(n["resets"], "resets");
  }
  if (j.contains("penalty")) c.penalty = schedule_from_json(j["penalty"], "penalty");
  if (j.contains("validation")) {
    const json& v = j["validation"];
    check_keys(v, {"period", "circuits", "seed", "qubits", "slices"}, "validation");
    read(v, "period", c.validation_period);
    read(v, "circuits", c.validation_circuits);
    read(v, "seed", c.validation_seed);
    if (v.contains("qubits")) c.validation_qubits = range_from_json(v["qubits"], "qubits");
    if (v.contains("slices")) c.validation_slices = range_from_json(v["slices"], "slices");
  }
  if (j.contains("policy")) {
    try {
      c.policy = PolicyConfig::from_json(j["policy"].dump());
    } catch (const Error& e) {
      fail(ErrorKind::Config, e.what());
    }
  }
  c.validate();
  return c;
}

std::vector<double> normalized_advantage(std::span<const double> costs) {
  std::vector<double> out(costs.size(), 0.0);
  if (costs.empty()) return out;
  double mean = 0.0;
  for (double c : costs) mean += c;
  mean /= static_cast<double>(costs.size());
  double var = 0.0;
  for (double c : costs) var += (c - mean) * (c - mean);
  const double sd = std::sqrt(var / static_cast<double>(costs.size()));
  if (sd < 1e-8) return out;
  for (std::size_t i = 0; i < costs.size(); ++i) out[i] = (costs[i] - mean) / sd;
  return out;
}

std::optional<double> normalized_cost(double total_cost, const SlicedCircuit& circuit) {
  const std::size_t gates = circuit.num_gates_after_first_slice();
  if (gates == 0) return std::nullopt;
  return total_cost / static_cast<double>(gates);
}

std::optional<double> normalized_cost(const Allocation& allocation,
                                      const SlicedCircuit& circuit) {
  return normalized_cost(allocation.total_cost, circuit);
}

std::vector<AllocationResult> rollout_group(const SlicedCircuit& circuit,
                                            const CircuitEncoding& encoding,
                                            const Hardware& hardware, const Policy& policy,
                                            std::size_t group_size, double noise, Rng& rng) {
  AllocatorOptions options;
  options.selection = Selection::Sample;
  options.noise = noise;
  options.masking = false;
  options.record_features = true;
  return allocate_sequential_batch(circuit, encoding, hardware, policy, options, group_size,
                                   rng);
}

LossResult grpo_reinforce_loss(Policy& policy, std::span<const AllocationResult> records,
                               std::span<const double> advantages, double penalty,
                               std::size_t chunk) {
  if (records.size() != advantages.size()) {
    fail(ErrorKind::InvalidArgument, "one advantage per episode is required");
  }
  if (chunk == 0) chunk = 1;
  struct Item {
    const FeatureTensor* features;
    int action;
    double weight;
  };
  std::vector<Item> items;
  for (std::size_t n = 0; n < records.size(); ++n) {
    for (const auto& step : records[n].trace) {
      const double w = step.legal ? (1.0 - penalty) * advantages[n] : penalty;
      if (w == 0.0) continue;
      if (step.features.key.empty()) {
        fail(ErrorKind::InvalidArgument, "trace was recorded without features");
      }
      items.push_back({&step.features, step.action, w});
    }
  }

  LossResult result;
  result.steps = items.size();
  // Chunks only group steps with equal (C, Q); within one circuit and device
  // that is every step, but stay general.
  std::size_t begin = 0;
  while (begin < items.size()) {
    FeatureBatch batch;
    std::vector<int> actions;
    std::vector<double> weights;
    const std::size_t cores = items[begin].features->cores;
    const std::size_t qubits = items[begin].features->qubits;
    std::size_t end = begin;
    while (end < items.size() && end - begin < chunk && items[end].features->cores == cores &&
           items[end].features->qubits == qubits) {
      batch.append(*items[end].features);
      actions.push_back(items[end].action);
      weights.push_back(items[end].weight);
      ++end;
    }
    nn::Var logits = policy.forward(batch);
    nn::Var objective = nn::weighted_log_prob(logits, actions, weights);
    const double value = objective->value[0];
    if (!std::isfinite(value)) fail(ErrorKind::Numeric, "non-finite training loss");
    nn::backward(objective);
    result.loss += value;
    begin = end;
  }
  return result;
}

ValidationSet ValidationSet::build(const TrainConfig& config) {
  ValidationSet set;
  Rng rng(config.validation_seed);
  for (std::size_t i = 0; i < config.validation_circuits; ++i) {
    const int q = draw(rng, config.validation_qubits);
    const int t = draw(rng, config.validation_slices);
    Hardware hw = random_hardware(rng, config.cores, config.capacity, q);
    set.circuits.push_back(slice_circuit(random_circuit(q, t, rng)));
    set.hardware.push_back(std::move(hw));
  }
  return set;
}

double validation_cost(const Policy& policy, const ValidationSet& set) {
  double sum = 0.0;
  std::size_t counted = 0;
  Rng unused(0);
  for (std::size_t i = 0; i < set.circuits.size(); ++i) {
    const AllocationResult r =
        allocate_sequential(set.circuits[i], set.hardware[i], policy, {}, unused);
    if (auto c = normalized_cost(r.allocation, set.circuits[i])) {
      sum += *c;
      ++counted;
    }
  }
  return counted == 0 ? 0.0 : sum / static_cast<double>(counted);
}

TrainResult train(const TrainConfig& config, Policy& policy, const MetricsCallback& on_row) {
  config.validate();
  const ValidationSet validation = ValidationSet::build(config);
  Rng rng(config.seed);
  nn::AdamConfig adam;
  adam.learning_rate = config.learning_rate;

  TrainResult result;
  auto emit = [&](MetricsRow row) {
    if (on_row) on_row(row);
    result.metrics.push_back(std::move(row));
  };

  double alpha = config.noise_initial;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    for (const auto& r : config.noise_resets) {
      if (r.iteration == it) alpha = r.value;
    }
    const double beta = config.penalty_at(it);

    MetricsRow row;
    row.iteration = it;
    row.noise = alpha;
    row.penalty = beta;
    if (it % config.validation_period == 0) row.validation_cost = validation_cost(policy, validation);

    const int q = draw(rng, config.qubits);
    const int t = draw(rng, config.slices);
    const Hardware hw = random_hardware(rng, config.cores, config.capacity, q);
    const SlicedCircuit circuit = slice_circuit(random_circuit(q, t, rng));
    const CircuitEncoding encoding = CircuitEncoding::build(circuit);

    const std::vector<AllocationResult> group =
        rollout_group(circuit, encoding, hw, policy, config.group_size, alpha, rng);

    std::vector<double> costs;
    std::size_t steps = 0;
    std::size_t illegal = 0;
    double cost_sum = 0.0;
    for (const auto& g : group) {
      costs.push_back(g.allocation.total_cost);
      cost_sum += g.allocation.total_cost;
      steps += g.trace.size();
      illegal += g.illegal_steps;
    }
    const std::vector<double> advantages = normalized_advantage(costs);

    policy.parameters().zero_grad();
    // The objective is minimised: gradient descent on it lowers the
    // probability of expensive (positive advantage) and illegal actions.
    grpo_reinforce_loss(policy, group, advantages, beta, config.replay_chunk);
    nn::adam_step(policy.parameters(), adam);

    row.mean_group_cost = cost_sum / static_cast<double>(group.size());
    const double ratio =
        steps == 0 ? 1.0 : static_cast<double>(steps - illegal) / static_cast<double>(steps);
    row.valid_move_ratio = ratio;
    emit(row);

    if (it >= config.grace_iterations && ratio < config.min_valid_ratio) {
      fail(ErrorKind::Numeric, "training diverged: valid-move ratio " + format_double(ratio) +
                                   " at iteration " + std::to_string(it));
    }
    alpha *= config.noise_decay;
  }

  MetricsRow last;
  last.iteration = config.iterations;
  last.noise = alpha;
  last.penalty = config.penalty_at(config.iterations);
  last.validation_cost = validation_cost(policy, validation);
  emit(last);
  return result;
}

std::string format_metrics_row(const MetricsRow& row) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  return std::to_string(row.iteration) + "," + opt(row.mean_group_cost) + "," +
         opt(row.validation_cost) + "," + opt(row.valid_move_ratio) + "," +
         format_double(row.noise) + "," + format_double(row.penalty);
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << kMetricsHeader << '\n';
  for (const auto& row : rows) out << format_metrics_row(row) << '\n';
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace qalloc

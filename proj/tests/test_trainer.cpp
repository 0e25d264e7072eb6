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


#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "qalloc/errors.hpp"
#include "qalloc/trainer.hpp"

using namespace qalloc;

namespace {

bool is_kind(const std::function<void()>& fn, ErrorKind kind) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

PolicyConfig tiny_policy() {
  PolicyConfig p;
  p.hidden = 8;
  p.layers = 1;
  p.heads = 2;
  return p;
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.iterations = 30;
  c.group_size = 4;
  c.qubits = {4, 6};
  c.slices = {2, 4};
  c.cores = {2, 3};
  c.capacity = {2, 4};
  c.validation_circuits = 3;
  c.validation_qubits = {4, 6};
  c.validation_slices = {2, 4};
  c.noise_resets = {{10, 0.05}};
  c.penalty = {{0, 0.3}, {20, 0.5}};
  c.policy = tiny_policy();
  return c;
}

double sum_squared_gradients(const Policy& p) {
  double s = 0.0;
  for (const auto& e : p.parameters().entries()) {
    for (double g : e.param->grad.data()) s += g * g;
  }
  return s;
}

double loss_of(Policy& p, const std::vector<AllocationResult>& group,
               const std::vector<double>& adv, double beta) {
  p.parameters().zero_grad();
  return grpo_reinforce_loss(p, group, adv, beta).loss;
}

struct Group {
  SlicedCircuit circuit;
  Hardware hardware;
  std::vector<AllocationResult> episodes;
};

Group make_group(std::uint64_t seed, int capacity, double noise, std::size_t n,
                 const Policy& policy) {
  Rng rng(seed);
  SlicedCircuit c = slice_circuit(random_circuit(6, 4, rng));
  Hardware hw = Hardware::uniform(3, capacity);
  CircuitEncoding enc = CircuitEncoding::build(c);
  auto eps = rollout_group(c, enc, hw, policy, n, noise, rng);
  return {std::move(c), std::move(hw), std::move(eps)};
}

}  // namespace

TEST_CASE("group advantages are population z-scores") {
  const std::vector<double> c{2, 4, 6};
  const auto a = normalized_advantage(c);
  const double sd = std::sqrt(8.0 / 3.0);
  CHECK(a[0] == Catch::Approx(-2.0 / sd));
  CHECK(a[1] == Catch::Approx(0.0).margin(1e-15));
  CHECK(a[2] == Catch::Approx(2.0 / sd));
  CHECK(a[2] == Catch::Approx(1.224744871391589));

  for (const auto& same : {std::vector<double>{3, 3, 3}, std::vector<double>{1, 1 + 1e-10}}) {
    for (double v : normalized_advantage(same)) CHECK(v == 0.0);
  }
  CHECK(normalized_advantage(std::vector<double>{}).empty());

  Rng rng(1);
  std::uniform_real_distribution<double> u(0, 50);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(2 + rng() % 30);
    for (double& v : x) v = u(rng);
    const auto z = normalized_advantage(x);
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
    double var = 0;
    for (double v : z) var += (v - mean) * (v - mean);
    CHECK(mean == Catch::Approx(0.0).margin(1e-12));
    CHECK(var / static_cast<double>(z.size()) == Catch::Approx(1.0));
  }
}

TEST_CASE("normalized cost divides by gates after the first slice") {
  SlicedCircuit c(4, {TimeSlice{{{0, 1}}}, TimeSlice{{{1, 2}, {0, 3}}},
                      TimeSlice{{{0, 1}, {2, 3}}}, TimeSlice{{{0, 2}}}});
  REQUIRE(c.num_gates_after_first_slice() == 5);
  CHECK(normalized_cost(10.0, c) == 2.0);
  Allocation a;
  a.total_cost = 5;
  CHECK(normalized_cost(a, c) == 1.0);
  CHECK_FALSE(normalized_cost(3.0, SlicedCircuit(2, {TimeSlice{{{0, 1}}}})).has_value());
}

TEST_CASE("zero advantages and no illegal steps give no gradient") {
  Policy policy(tiny_policy(), 3);
  Group g = make_group(5, 6, 0.2, 4, policy);
  for (const auto& e : g.episodes) REQUIRE(e.illegal_steps == 0);
  const std::vector<double> zeros(g.episodes.size(), 0.0);
  policy.parameters().zero_grad();
  LossResult r = grpo_reinforce_loss(policy, g.episodes, zeros, 0.3);
  CHECK(r.loss == 0.0);
  CHECK(r.steps == 0);
  CHECK(sum_squared_gradients(policy) == 0.0);
}

TEST_CASE("loss gradient matches finite differences") {
  Policy policy(tiny_policy(), 4);
  Group g = make_group(6, 2, 0.5, 4, policy);
  std::vector<double> costs;
  for (const auto& e : g.episodes) costs.push_back(e.allocation.total_cost + e.illegal_steps);
  const auto adv = normalized_advantage(costs);
  const double beta = 0.4;
  policy.parameters().zero_grad();
  grpo_reinforce_loss(policy, g.episodes, adv, beta);
  REQUIRE(sum_squared_gradients(policy) > 0.0);
  std::vector<std::vector<double>> analytic;
  for (const auto& e : policy.parameters().entries()) {
    const auto g = e.param->grad.data();
    analytic.emplace_back(g.begin(), g.end());
  }

  Rng rng(1);
  auto& entries = policy.parameters().entries();
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = rng() % entries.size();
    auto values = entries[k].param->value.data();
    const std::size_t i = rng() % values.size();
    const double h = 1e-6;
    const double saved = values[i];
    values[i] = saved + h;
    const double up = loss_of(policy, g.episodes, adv, beta);
    values[i] = saved - h;
    const double down = loss_of(policy, g.episodes, adv, beta);
    values[i] = saved;
    CHECK(analytic[k][i] == Catch::Approx((up - down) / (2 * h)).margin(1e-5).epsilon(1e-3));
  }
}

TEST_CASE("one update lowers the objective on its own group") {
  Policy policy(tiny_policy(), 5);
  Group g = make_group(7, 3, 0.3, 8, policy);
  std::vector<double> costs;
  for (const auto& e : g.episodes) costs.push_back(e.allocation.total_cost);
  const auto adv = normalized_advantage(costs);
  nn::AdamConfig adam;
  adam.learning_rate = 1e-3;
  const double before = loss_of(policy, g.episodes, adv, 0.3);
  nn::adam_step(policy.parameters(), adam);
  const double after = loss_of(policy, g.episodes, adv, 0.3);
  CHECK(after < before);
}

TEST_CASE("the penalty alone pushes probability away from illegal actions") {
  Policy policy(tiny_policy(), 6);
  Group g = make_group(8, 2, 1.0, 8, policy);
  std::size_t illegal = 0;
  for (const auto& e : g.episodes) illegal += e.illegal_steps;
  REQUIRE(illegal > 0);
  const std::vector<double> zeros(g.episodes.size(), 0.0);
  auto illegal_log_prob = [&] {
    policy.parameters().zero_grad();
    return grpo_reinforce_loss(policy, g.episodes, zeros, 1.0).loss;
  };
  const double before = illegal_log_prob();
  policy.parameters().zero_grad();
  LossResult r = grpo_reinforce_loss(policy, g.episodes, zeros, 0.5);
  CHECK(r.steps == illegal);
  CHECK(r.loss == Catch::Approx(0.5 * before));
  nn::AdamConfig adam;
  adam.learning_rate = 1e-3;
  nn::adam_step(policy.parameters(), adam);
  CHECK(illegal_log_prob() < before);
}

TEST_CASE("training config round trips and rejects bad input") {
  TrainConfig c = tiny_config();
  c.seed = 77;
  c.learning_rate = 3e-4;
  const TrainConfig back = TrainConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.noise_resets == c.noise_resets);
  CHECK(back.penalty == c.penalty);
  CHECK(back.policy == c.policy);

  const TrainConfig defaults = TrainConfig::from_json("{}");
  CHECK(defaults.to_json() == TrainConfig{}.to_json());
  CHECK(TrainConfig::from_json(R"({"group_size": 8})").group_size == 8);

  for (const char* bad :
       {"[", R"({"bogus": 1})", R"({"group_size": "x"})", R"({"group_size": 1})",
        R"({"learning_rate": 0})", R"({"qubits": [10, 4]})", R"({"qubits": [4]})",
        R"({"noise": {"initial": 2}})", R"({"noise": {"extra": 0}})", R"({"penalty": []})",
        R"({"penalty": [[0, 1.5]]})", R"({"penalty": [[0, 0]]})", R"({"validation": {"period": 0}})",
        R"({"policy": {"hidden": 10, "heads": 4}})", R"({"policy": {"width": 8}})",
        R"({"iterations": 0})", R"({"iterations": -1})", R"({"group_size": 2.5})",
        R"({"seed": -3})", R"({"policy": {"hidden": -8}})", R"({"learning_rate": "fast"})"}) {
    INFO(bad);
    CHECK(is_kind([&] { (void)TrainConfig::from_json(bad); }, ErrorKind::Config));
  }
}

TEST_CASE("penalty schedule is piecewise constant") {
  TrainConfig c;
  CHECK(c.penalty_at(0) == 0.3);
  CHECK(c.penalty_at(15999) == 0.3);
  CHECK(c.penalty_at(16000) == 0.5);
  CHECK(c.penalty_at(28099) == 0.5);
  c.penalty = {{100, 0.7}, {0, 0.1}};
  CHECK(c.penalty_at(50) == 0.1);
  CHECK(c.penalty_at(100) == 0.7);
}

TEST_CASE("short training runs log a consistent, reproducible history") {
  const TrainConfig c = tiny_config();
  Policy a(c.policy, c.seed);
  std::vector<MetricsRow> streamed;
  TrainResult ra = train(c, a, [&](const MetricsRow& r) { streamed.push_back(r); });
  REQUIRE(ra.metrics.size() == c.iterations + 1);
  REQUIRE(streamed.size() == ra.metrics.size());

  double alpha = c.noise_initial;
  for (std::size_t it = 0; it < c.iterations; ++it) {
    const MetricsRow& r = ra.metrics[it];
    if (it == 10) alpha = 0.05;
    CHECK(r.iteration == it);
    CHECK(r.noise == Catch::Approx(alpha).epsilon(1e-12));
    CHECK(r.penalty == (it < 20 ? 0.3 : 0.5));
    CHECK(r.mean_group_cost.has_value());
    REQUIRE(r.valid_move_ratio.has_value());
    CHECK(*r.valid_move_ratio >= 0.0);
    CHECK(*r.valid_move_ratio <= 1.0);
    CHECK(r.validation_cost.has_value() == (it % 25 == 0));
    CHECK(format_metrics_row(r) == format_metrics_row(streamed[it]));
    alpha *= c.noise_decay;
  }
  const MetricsRow& last = ra.metrics.back();
  CHECK(last.iteration == c.iterations);
  CHECK(last.validation_cost.has_value());
  CHECK_FALSE(last.mean_group_cost.has_value());

  Policy b(c.policy, c.seed);
  TrainResult rb = train(c, b);
  REQUIRE(rb.metrics.size() == ra.metrics.size());
  for (std::size_t i = 0; i < ra.metrics.size(); ++i) {
    CHECK(format_metrics_row(ra.metrics[i]) == format_metrics_row(rb.metrics[i]));
  }
  CHECK(a.encode() == b.encode());

  const auto path = std::filesystem::temp_directory_path() / "qalloc_test_metrics.csv";
  write_metrics_csv(ra.metrics, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == kMetricsHeader);
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == ra.metrics.size());
  std::filesystem::remove(path);
}

TEST_CASE("validation set is fixed by its seed") {
  const TrainConfig c = tiny_config();
  const ValidationSet x = ValidationSet::build(c);
  const ValidationSet y = ValidationSet::build(c);
  REQUIRE(x.circuits.size() == c.validation_circuits);
  for (std::size_t i = 0; i < x.circuits.size(); ++i) {
    CHECK(x.circuits[i].slices() == y.circuits[i].slices());
    CHECK(x.hardware[i] == y.hardware[i]);
    CHECK(x.hardware[i].total_capacity() >= x.circuits[i].num_qubits());
  }
  Policy p(c.policy, 1);
  const double v = validation_cost(p, x);
  CHECK(std::isfinite(v));
  CHECK(v >= 0.0);
  CHECK(validation_cost(p, y) == v);
}

TEST_CASE("divergence guard aborts collapsing runs") {
  TrainConfig c = tiny_config();
  c.iterations = 3;
  c.grace_iterations = 1;
  c.min_valid_ratio = 1.0;
  c.capacity = {2, 2};
  c.noise_initial = 1.0;
  c.noise_decay = 1.0;
  c.noise_resets.clear();
  c.qubits = {6, 6};
  c.cores = {4, 4};
  Policy p(c.policy, 0);
  CHECK(is_kind([&] { (void)train(c, p); }, ErrorKind::Numeric));
}

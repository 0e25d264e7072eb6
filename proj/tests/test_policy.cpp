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

#include <filesystem>
#include <numeric>

#include "qalloc/circuit.hpp"
#include "qalloc/encoding.hpp"
#include "qalloc/errors.hpp"
#include "qalloc/hardware.hpp"
#include "qalloc/policy.hpp"
#include "scenarios.hpp"

using namespace qalloc;
using qalloc::testing::logits_of;
using qalloc::testing::random_scenario;
using qalloc::testing::Scenario;

namespace {

const double* feature(const FeatureTensor& f, int core, int qubit) {
  return f.key.data() + (static_cast<std::size_t>(core) * f.qubits + qubit) * kFeatureCount;
}

}  // namespace

TEST_CASE("feature construction") {
  Rng rng(1);
  Scenario s = random_scenario(rng, 3, 6, true);
  s.free_capacity = {3, 0, 5};
  FeatureTensor f = build_features(s.context());
  REQUIRE(f.key.size() == 3 * 6 * kFeatureCount);
  REQUIRE(f.query.size() == 3 * 2 * kFeatureCount);
  for (int c = 0; c < 3; ++c) {
    for (int q = 0; q < 6; ++q) {
      const double* x = feature(f, c, q);
      CHECK(x[0] == ((q == s.qa || q == s.qb) ? 1.0 : 0.0));
      CHECK(x[1] == (s.previous[q] == c ? 1.0 : 0.0));
      CHECK(x[2] == (s.current[q] == c ? 1.0 : 0.0));
      for (std::size_t k = 3; k < kFeatureCount; ++k) {
        CHECK(x[k] >= 0.0);
        CHECK(x[k] <= 1.0);
      }
    }
  }
  CHECK(feature(f, 0, 0)[3] == 0.25);
  CHECK(feature(f, 1, 0)[3] == 1.0);

  SECTION("query rows are the key rows of the allocated qubits") {
    const int lo = std::min(s.qa, s.qb), hi = std::max(s.qa, s.qb);
    for (int c = 0; c < 3; ++c) {
      for (std::size_t k = 0; k < kFeatureCount; ++k) {
        CHECK(f.query[(c * 2) * kFeatureCount + k] == feature(f, c, lo)[k]);
        CHECK(f.query[(c * 2 + 1) * kFeatureCount + k] == feature(f, c, hi)[k]);
      }
    }
  }
  SECTION("single-qubit steps have a zero second query row") {
    s.qb = -1;
    FeatureTensor g = build_features(s.context());
    for (int c = 0; c < 3; ++c) {
      for (std::size_t k = 0; k < kFeatureCount; ++k) {
        CHECK(g.query[(c * 2 + 1) * kFeatureCount + k] == 0.0);
      }
      for (int q = 0; q < 6; ++q) {
        CHECK(feature(g, c, q)[7] == 0.0);
        CHECK(feature(g, c, q)[9] == 0.0);
      }
    }
  }
  SECTION("both qubits already on the core: no movement") {
    s.previous[s.qa] = 2;
    s.previous[s.qb] = 2;
    s.cost = Hardware::uniform(3, 4).cost_matrix();
    FeatureTensor g = build_features(s.context());
    CHECK(feature(g, 2, 0)[4] == 1.0);
    CHECK(feature(g, 1, 0)[4] == Catch::Approx(1.0 / 3.0));
  }
  SECTION("first slice: no previous placement, no movement cost") {
    FeatureTensor g = build_features(s.context(true));
    for (int c = 0; c < 3; ++c) {
      for (int q = 0; q < 6; ++q) {
        CHECK(feature(g, c, q)[1] == 0.0);
        CHECK(feature(g, c, q)[4] == 1.0);
      }
    }
  }
  SECTION("mean attraction of the pair") {
    FeatureTensor g = build_features(s.context());
    for (int c = 0; c < 3; ++c) {
      const double expected = 0.5 * (attraction(s.embedding, s.current, s.qa, c) +
                                     attraction(s.embedding, s.current, s.qb, c));
      CHECK(feature(g, c, 0)[5] == Catch::Approx(expected).margin(1e-15));
    }
  }
  SECTION("a qubit placed twice is rejected") {
    s.current[s.qa] = 0;
    CHECK_THROWS_AS(build_features(s.context()), Error);
  }
}

TEST_CASE("logits permute with the cores") {
  Policy policy({}, 3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int cores = 2 + static_cast<int>(seed % 5);
    Scenario s = random_scenario(rng, cores, 4 + static_cast<int>(seed % 9), seed % 2 == 0);
    std::vector<int> perm(cores);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    Scenario p = s;
    for (int& k : p.previous) k = perm[k];
    for (int& k : p.current) k = k < 0 ? k : perm[k];
    for (int c = 0; c < cores; ++c) p.free_capacity[perm[c]] = s.free_capacity[c];
    for (int i = 0; i < cores; ++i) {
      for (int j = 0; j < cores; ++j) p.cost(perm[i], perm[j]) = s.cost(i, j);
    }
    const auto a = logits_of(policy, s.context());
    const auto b = logits_of(policy, p.context());
    for (int c = 0; c < cores; ++c) CHECK(std::abs(b[perm[c]] - a[c]) < 1e-6);
  }
}

TEST_CASE("swapping the gate's qubits changes nothing") {
  Policy policy({}, 4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Scenario s = random_scenario(rng, 3, 8, true);
    Scenario t = s;
    std::swap(t.qa, t.qb);
    CHECK(build_features(s.context()).key == build_features(t.context()).key);
    CHECK(logits_of(policy, s.context()) == logits_of(policy, t.context()));
  }
}

TEST_CASE("permuting unallocated qubits leaves logits unchanged") {
  Policy policy({}, 5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const int q = 6;
    Scenario s = random_scenario(rng, 3, q, seed % 2 == 0);
    // Relabel only the qubits outside the unit, keeping q_a < q_b intact.
    std::vector<int> others;
    for (int i = 0; i < q; ++i) {
      if (i != s.qa && i != s.qb) others.push_back(i);
    }
    std::vector<int> shuffled = others;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<int> perm(q);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < others.size(); ++i) perm[others[i]] = shuffled[i];

    Scenario p = s;
    for (int i = 0; i < q; ++i) {
      p.previous[perm[i]] = s.previous[i];
      p.current[perm[i]] = s.current[i];
      for (int j = 0; j < q; ++j) {
        p.embedding(perm[i], perm[j]) = s.embedding(i, j);
        p.next(perm[i], perm[j]) = s.next(i, j);
      }
    }
    const auto a = logits_of(policy, s.context());
    const auto b = logits_of(policy, p.context());
    for (std::size_t c = 0; c < a.size(); ++c) CHECK(std::abs(a[c] - b[c]) < 1e-9);
  }
}

TEST_CASE("one parameter set runs at any size") {
  Policy policy({}, 6);
  Rng rng(7);
  for (auto [c, q] : {std::pair{2, 4}, std::pair{8, 20}, std::pair{10, 100}}) {
    Scenario s = random_scenario(rng, c, q, true);
    const auto logits = logits_of(policy, s.context());
    REQUIRE(logits.size() == static_cast<std::size_t>(c));
    for (double v : logits) CHECK(std::isfinite(v));
  }
}

TEST_CASE("batched logits equal one-by-one logits") {
  Policy policy({}, 8);
  Rng rng(8);
  FeatureBatch batch;
  std::vector<std::vector<double>> single;
  for (int i = 0; i < 5; ++i) {
    Scenario s = random_scenario(rng, 4, 7, i % 2 == 0);
    batch.append(build_features(s.context()));
    single.push_back(logits_of(policy, s.context()));
  }
  nn::Tensor all = policy.logits(batch);
  for (int i = 0; i < 5; ++i) {
    for (int c = 0; c < 4; ++c) CHECK(all[i * 4 + c] == Catch::Approx(single[i][c]).margin(1e-12));
  }
}

TEST_CASE("policy determinism and checkpoints") {
  Policy a({}, 11), b({}, 11), other({}, 12);
  Rng rng(9);
  Scenario s = random_scenario(rng, 3, 6, true);
  const auto la = logits_of(a, s.context());
  CHECK(la == logits_of(b, s.context()));
  CHECK(la != logits_of(other, s.context()));
  CHECK(logits_of(a.clone(), s.context()) == la);

  const auto path = std::filesystem::temp_directory_path() / "qalloc_policy_test.ckpt";
  a.save(path);
  Policy loaded = Policy::load(path);
  CHECK(loaded.config() == a.config());
  CHECK(logits_of(loaded, s.context()) == la);
  std::filesystem::remove(path);

  // Width 64, two layers, two heads: reported for reference only.
  CHECK(a.parameters().num_parameters() > 0);
}

TEST_CASE("policy config") {
  PolicyConfig c;
  c.hidden = 30;
  c.heads = 4;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(Policy(c, 0), Error);
  PolicyConfig d;
  d.hidden = 16;
  d.layers = 1;
  CHECK(PolicyConfig::from_json(d.to_json()) == d);
  CHECK_THROWS_AS(PolicyConfig::from_json(R"({"hidden":16,"depth":2})"), Error);
}

TEST_CASE("action distribution") {
  const std::vector<double> logits{0.3, -1.0, 2.0, 0.0};
  const std::vector<char> legal{1, 0, 1, 1};
  const auto soft = nn::masked_softmax(logits, legal);

  SECTION("alpha zero is the masked softmax and draws nothing") {
    Rng rng(1), untouched(1);
    CHECK(action_distribution(logits, legal, 0.0, rng) == soft);
    CHECK(rng == untouched);
  }
  SECTION("alpha one ignores the logits") {
    Rng r1(2), r2(2);
    const std::vector<double> other{5.0, 5.0, -3.0, 1.0};
    const auto p = action_distribution(logits, legal, 1.0, r1);
    const auto q = action_distribution(other, legal, 1.0, r2);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(p[i] == Catch::Approx(q[i]).margin(1e-15));
      if (legal[i]) CHECK(p[i] > 0.0);
    }
  }
  SECTION("always normalised, masked entries zero") {
    Rng rng(3);
    for (double alpha : {0.0, 0.05, 0.2, 0.5, 0.9, 1.0}) {
      const auto p = action_distribution(logits, legal, alpha, rng);
      CHECK(std::accumulate(p.begin(), p.end(), 0.0) == Catch::Approx(1.0).margin(1e-12));
      CHECK(p[1] == 0.0);
    }
  }
  SECTION("no legal core") {
    Rng rng(4);
    CHECK_THROWS_AS(action_distribution(logits, std::vector<char>(4, 0), 0.1, rng), Error);
  }
  SECTION("masked cores are never sampled") {
    Rng rng(5);
    const std::vector<double> strong{-2.0, 9.0, 0.0, -5.0};
    for (int i = 0; i < 100000; ++i) {
      const auto p = action_distribution(strong, legal, 0.3, rng);
      REQUIRE(legal[sample_index(p, rng)]);
    }
  }
  SECTION("argmax takes the lowest index on ties") {
    CHECK(argmax_index(std::vector<double>{0.25, 0.5, 0.5}) == 1);
    CHECK(argmax_index(std::vector<double>{1.0}) == 0);
  }
}

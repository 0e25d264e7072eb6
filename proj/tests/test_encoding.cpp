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

#include "oracles.hpp"
#include "qalloc/circuit.hpp"
#include "qalloc/encoding.hpp"

using namespace qalloc;

namespace {

SlicedCircuit sliced(int q, std::initializer_list<std::vector<Gate>> s) {
  std::vector<TimeSlice> out;
  for (const auto& g : s) out.push_back({g});
  return SlicedCircuit(q, out);
}

SlicedCircuit random_sliced(Rng& rng) {
  const int q = 2 + static_cast<int>(rng() % 12);
  const int t = 1 + static_cast<int>(rng() % 12);
  return slice_circuit(random_circuit(q, t, rng));
}

}  // namespace

TEST_CASE("slice adjacency") {
  Matrix a = adjacency({{{0, 1}}}, 3);
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 0) == 1.0);
  double sum = 0;
  for (double v : a.data()) sum += v;
  CHECK(sum == 2.0);
  CHECK(adjacency({}, 3) == Matrix(3, 3));
  Matrix b = adjacency({{{0, 1}, {2, 3}}}, 4);
  sum = 0;
  for (double v : b.data()) sum += v;
  CHECK(sum == 4.0);
}

TEST_CASE("circuit embedding") {
  SECTION("one gate, two slices") {
    auto e = circuit_embedding(sliced(3, {{{0, 1}}, {{1, 2}}}));
    CHECK(e[0](0, 1) == 0.5);
    CHECK(e[1](0, 1) == 0.0);
    CHECK(e[0](1, 2) == 0.25);
  }
  SECTION("repeated gate") {
    auto e = circuit_embedding(sliced(2, {{{0, 1}}, {{0, 1}}}));
    CHECK(e[0](0, 1) == 0.75);
  }
  SECTION("matches direct summation and its invariants") {
    Rng rng(21);
    for (int trial = 0; trial < 500; ++trial) {
      SlicedCircuit c = random_sliced(rng);
      auto e = circuit_embedding(c);
      auto oracle_e = oracle::direct_sum_embedding(c);
      REQUIRE(e.size() == c.num_slices());
      for (std::size_t t = 0; t < e.size(); ++t) {
        const Matrix a = adjacency(c.slice(t), c.num_qubits());
        for (int i = 0; i < c.num_qubits(); ++i) {
          for (int j = 0; j < c.num_qubits(); ++j) {
            REQUIRE(std::abs(e[t](i, j) - oracle_e[t](i, j)) < 1e-12);
            CHECK(e[t](i, j) == e[t](j, i));
            CHECK(e[t](i, j) >= 0.0);
            CHECK(e[t](i, j) < 1.0);
            CHECK((e[t](i, j) >= 0.5) == (a(i, j) == 1.0));
            const double next = t + 1 < e.size() ? e[t + 1](i, j) : 0.0;
            CHECK(std::abs(e[t](i, j) - (0.5 * a(i, j) + 0.5 * next)) < 1e-12);
          }
          CHECK(e[t](i, i) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("next interaction") {
  SECTION("late interaction") {
    auto n = next_interaction(sliced(3, {{{1, 2}}, {{1, 2}}, {{0, 1}}}));
    CHECK(n[0](0, 1) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(n[1](0, 1) == 0.5);
    CHECK(n[2](0, 1) == 1.0);
    CHECK(n[0](0, 2) == 0.0);
  }
  SECTION("matches the brute-force max and its invariants") {
    Rng rng(22);
    for (int trial = 0; trial < 500; ++trial) {
      SlicedCircuit c = random_sliced(rng);
      auto n = next_interaction(c);
      auto e = circuit_embedding(c);
      auto oracle_n = oracle::brute_max_next_interaction(c);
      for (std::size_t t = 0; t < n.size(); ++t) {
        const Matrix a = adjacency(c.slice(t), c.num_qubits());
        for (int i = 0; i < c.num_qubits(); ++i) {
          for (int j = 0; j < c.num_qubits(); ++j) {
            REQUIRE(n[t](i, j) == oracle_n[t](i, j));
            CHECK(n[t](i, j) == n[t](j, i));
            CHECK(n[t](i, j) >= 0.0);
            CHECK(n[t](i, j) <= 1.0);
            CHECK((n[t](i, j) == 1.0) == (a(i, j) == 1.0));
            CHECK((n[t](i, j) == 0.0) == (e[t](i, j) == 0.0));
          }
        }
      }
    }
  }
}

TEST_CASE("features follow qubit relabelling") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    SlicedCircuit c = random_sliced(rng);
    const int q = c.num_qubits();
    std::vector<int> perm(q);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<TimeSlice> relabelled;
    for (const auto& s : c.slices()) {
      TimeSlice r;
      for (const Gate& g : s.gates) r.gates.push_back({perm[g.a], perm[g.b]});
      relabelled.push_back(r);
    }
    SlicedCircuit p(q, relabelled);
    auto e = circuit_embedding(c), ep = circuit_embedding(p);
    auto n = next_interaction(c), np = next_interaction(p);
    for (std::size_t t = 0; t < e.size(); ++t) {
      for (int i = 0; i < q; ++i) {
        for (int j = 0; j < q; ++j) {
          CHECK(ep[t](perm[i], perm[j]) == e[t](i, j));
          CHECK(np[t](perm[i], perm[j]) == n[t](i, j));
        }
      }
    }
  }
}

TEST_CASE("attraction") {
  Matrix e(4, 4);
  e(0, 2) = e(2, 0) = 0.5;
  e(0, 3) = e(3, 0) = 0.25;
  std::vector<int> placement{-1, 0, 1, 1};
  CHECK(attraction(e, placement, 0, 1) == 0.75);
  CHECK(attraction(e, placement, 0, 2) == 0.0);

  SECTION("summing over cores gives the sum over placed qubits") {
    Rng rng(24);
    for (int trial = 0; trial < 200; ++trial) {
      SlicedCircuit c = random_sliced(rng);
      auto emb = circuit_embedding(c);
      const int cores = 1 + static_cast<int>(rng() % 5);
      std::vector<int> place(c.num_qubits());
      for (int& p : place) p = static_cast<int>(rng() % (cores + 1)) - 1;
      for (int j = 0; j < c.num_qubits(); ++j) {
        double by_core = 0, direct = 0;
        for (int k = 0; k < cores; ++k) by_core += attraction(emb[0], place, j, k);
        for (int i = 0; i < c.num_qubits(); ++i) {
          if (place[i] >= 0) direct += emb[0](j, i);
        }
        CHECK(by_core == Catch::Approx(direct).margin(1e-12));
      }
    }
  }
}

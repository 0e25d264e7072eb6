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

#include "qalloc/hardware.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qalloc/errors.hpp"

namespace qalloc {

namespace {

constexpr int kResampleBudget = 10000;

bool pairs_fit(const std::vector<int>& capacities, int required) {
  int total = 0;
  int pair_slots = 0;
  for (int c : capacities) {
    total += c;
    pair_slots += c / 2;
  }
  return total >= required + 2 && pair_slots >= required / 2;
}

}  // namespace

Hardware::Hardware(std::vector<int> capacities, Matrix cost_matrix)
    : capacities_(std::move(capacities)), cost_(std::move(cost_matrix)) {
  const std::size_t n = capacities_.size();
  if (n < 1) fail(ErrorKind::InvalidArgument, "hardware needs at least one core");
  for (int c : capacities_) {
    if (c < 1) fail(ErrorKind::InvalidArgument, "core capacities must be >= 1");
  }
  if (cost_.rows() != n || cost_.cols() != n) {
    fail(ErrorKind::InvalidArgument, "cost matrix must be C x C");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cost_(i, i) != 0.0) fail(ErrorKind::InvalidArgument, "cost matrix diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(cost_(i, j)) || cost_(i, j) < 0.0) {
        fail(ErrorKind::InvalidArgument, "cost matrix entries must be finite and >= 0");
      }
      if (cost_(i, j) != cost_(j, i)) {
        fail(ErrorKind::InvalidArgument, "cost matrix must be symmetric");
      }
    }
  }
}

Hardware Hardware::uniform(std::vector<int> capacities) {
  const std::size_t n = capacities.size();
  Matrix cost(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) cost(i, i) = 0.0;
  return Hardware(std::move(capacities), std::move(cost));
}

Hardware Hardware::uniform(int num_cores, int capacity) {
  if (num_cores < 1) fail(ErrorKind::InvalidArgument, "hardware needs at least one core");
  return uniform(std::vector<int>(static_cast<std::size_t>(num_cores), capacity));
}

int Hardware::total_capacity() const noexcept {
  return std::accumulate(capacities_.begin(), capacities_.end(), 0);
}

Matrix complete_cost_matrix(const RawCostMatrix& raw) {
  const std::size_t n = raw.size();
  for (const auto& row : raw) {
    if (row.size() != n) fail(ErrorKind::InvalidArgument, "raw cost matrix must be square");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  Matrix dist(n, n, inf);
  for (std::size_t i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !raw[i][j]) continue;
      const double c = *raw[i][j];
      if (!std::isfinite(c) || c < 0.0) {
        fail(ErrorKind::InvalidArgument, "link costs must be finite and non-negative");
      }
      dist(i, j) = std::min(dist(i, j), c);
      dist(j, i) = std::min(dist(j, i), c);
    }
  }
  // Floyd-Warshall.
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (dist(i, k) == inf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double via = dist(i, k) + dist(k, j);
        if (via < dist(i, j)) dist(i, j) = via;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dist(i, j) == inf) {
        fail(ErrorKind::InvalidArgument, "core graph is disconnected: no path between cores " +
                                             std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }
  return dist;
}

Hardware random_hardware(Rng& rng, IntRange core_range, IntRange capacity_range,
                         int required_capacity) {
  if (core_range.lo < 1 || core_range.hi < core_range.lo || capacity_range.lo < 1 ||
      capacity_range.hi < capacity_range.lo) {
    fail(ErrorKind::InvalidArgument, "invalid hardware sampling ranges");
  }
  std::uniform_int_distribution<int> cores(core_range.lo, core_range.hi);
  std::uniform_int_distribution<int> capacity(capacity_range.lo, capacity_range.hi);
  for (int attempt = 0; attempt < kResampleBudget; ++attempt) {
    std::vector<int> caps(static_cast<std::size_t>(cores(rng)));
    for (int& c : caps) c = capacity(rng);
    if (pairs_fit(caps, required_capacity)) return Hardware::uniform(std::move(caps));
  }
  fail(ErrorKind::InvalidArgument,
       "hardware ranges cannot host " + std::to_string(required_capacity) + " qubits");
}

Hardware parse_hardware(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::Parse, "hardware must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "capacities" && key != "cost_matrix") {
      fail(ErrorKind::Parse, "unknown key '" + key + "'");
    }
  }
  if (!doc.contains("capacities") || !doc["capacities"].is_array()) {
    fail(ErrorKind::Parse, "missing array 'capacities'");
  }
  std::vector<int> caps;
  for (const auto& c : doc["capacities"]) {
    if (!c.is_number_integer()) fail(ErrorKind::Parse, "capacities must be integers");
    caps.push_back(c.get<int>());
  }
  const auto& cm = doc.contains("cost_matrix") ? doc["cost_matrix"] : nlohmann::json("uniform");
  try {
    if (cm.is_string()) {
      if (cm.get<std::string>() != "uniform") {
        fail(ErrorKind::Parse, "cost_matrix must be a matrix or \"uniform\"");
      }
      return Hardware::uniform(std::move(caps));
    }
    if (!cm.is_array() || cm.size() != caps.size()) {
      fail(ErrorKind::Parse, "cost_matrix must be C x C");
    }
    RawCostMatrix raw;
    for (const auto& row : cm) {
      if (!row.is_array() || row.size() != caps.size()) {
        fail(ErrorKind::Parse, "cost_matrix must be C x C");
      }
      auto& out = raw.emplace_back();
      for (const auto& v : row) {
        if (v.is_null()) {
          out.emplace_back(std::nullopt);
        } else if (v.is_number()) {
          out.emplace_back(v.get<double>());
        } else {
          fail(ErrorKind::Parse, "cost_matrix entries must be numbers or null");
        }
      }
    }
    return Hardware(std::move(caps), complete_cost_matrix(raw));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    fail(ErrorKind::Parse, e.what());
  }
}

std::string serialize_hardware(const Hardware& hardware) {
  nlohmann::ordered_json doc;
  doc["capacities"] = hardware.capacities();
  auto rows = nlohmann::ordered_json::array();
  const auto n = static_cast<std::size_t>(hardware.num_cores());
  for (std::size_t i = 0; i < n; ++i) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(hardware.cost_matrix()(i, j));
    rows.push_back(std::move(row));
  }
  doc["cost_matrix"] = std::move(rows);
  return doc.dump();
}

}  // namespace qalloc

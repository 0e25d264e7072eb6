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

#include "qalloc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qalloc/baseline.hpp"
#include "qalloc/errors.hpp"
#include "qalloc/trainer.hpp"

namespace qalloc {

namespace {

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string fmt_cost(double v) {
  // Costs are sums of matrix entries; keep integers readable.
  if (v == std::floor(v) && std::abs(v) < 1e15) return fmt(v, 0);
  return fmt(v, 6);
}

Allocation run_method(AllocationMode mode, const SlicedCircuit& circuit,
                      const Hardware& hardware, const Policy* policy) {
  if (mode == AllocationMode::Baseline) return hqa_allocate(circuit, hardware);
  if (policy == nullptr) fail(ErrorKind::InvalidArgument, "method needs a policy checkpoint");
  Rng rng(0);
  const auto start = std::chrono::steady_clock::now();
  Allocation out;
  switch (mode) {
    case AllocationMode::Sequential:
      out = allocate_sequential(circuit, hardware, *policy, {}, rng).allocation;
      break;
    case AllocationMode::Parallel:
      out = allocate_parallel(circuit, hardware, *policy, {}, rng).allocation;
      break;
    case AllocationMode::Ensemble:
      return allocate_ensemble(circuit, hardware, *policy);
    case AllocationMode::Baseline:
      break;
  }
  out.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::string method_label(AllocationMode mode) {
  return mode == AllocationMode::Baseline ? "hqa_like" : to_string(mode);
}

BenchmarkReport benchmark_suite(const std::vector<BenchCircuit>& circuits,
                                const Hardware& hardware,
                                const std::vector<AllocationMode>& methods,
                                const Policy* policy) {
  BenchmarkReport report;
  struct Sums {
    double cost = 0, normalized = 0, time = 0, qubits = 0, slices = 0;
    std::size_t n = 0, normalized_n = 0, failed = 0;
  };
  std::map<AllocationMode, Sums> random_sums;

  for (const auto& bc : circuits) {
    for (AllocationMode mode : methods) {
      BenchRow row;
      row.circuit = bc.name;
      row.qubits = bc.circuit.num_qubits();
      row.slices = bc.circuit.num_slices();
      row.method = mode;
      try {
        const Allocation a = run_method(mode, bc.circuit, hardware, policy);
        row.wall_time_seconds = a.wall_time_seconds;
        const auto violations = validate_allocation(a.assignment, bc.circuit, hardware);
        if (!violations.empty()) {
          row.error = "invalid allocation: " + violations.front().describe();
        } else {
          const double total = allocation_cost(a.assignment, hardware.cost_matrix());
          row.total_cost = total;
          row.normalized_cost = normalized_cost(total, bc.circuit);
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      if (bc.random) {
        Sums& s = random_sums[mode];
        s.qubits += row.qubits;
        s.slices += row.slices;
        s.time += row.wall_time_seconds;
        if (row.total_cost) {
          s.cost += *row.total_cost;
          ++s.n;
        } else {
          ++s.failed;
        }
        if (row.normalized_cost) {
          s.normalized += *row.normalized_cost;
          ++s.normalized_n;
        }
      }
      report.rows.push_back(std::move(row));
    }
  }

  for (AllocationMode mode : methods) {
    auto it = random_sums.find(mode);
    if (it == random_sums.end()) continue;
    const Sums& s = it->second;
    const double count = static_cast<double>(s.n + s.failed);
    BenchRow row;
    row.circuit = kRandomAverageName;
    row.method = mode;
    row.qubits = static_cast<int>(std::lround(s.qubits / count));
    row.slices = static_cast<int>(std::lround(s.slices / count));
    row.wall_time_seconds = s.time / count;
    if (s.failed > 0) {
      row.error = std::to_string(s.failed) + " random circuit(s) failed";
    } else {
      row.total_cost = s.cost / static_cast<double>(s.n);
      if (s.normalized_n > 0) row.normalized_cost = s.normalized / static_cast<double>(s.normalized_n);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<BenchCircuit> random_bench_circuits(std::size_t count, int num_qubits, int slices,
                                                std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BenchCircuit> out;
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "random_%03zu", i);
    out.push_back({name, slice_circuit(random_circuit(num_qubits, slices, rng)), true});
  }
  return out;
}

Hardware bench_preset(const std::string& name) {
  if (name == "5x10") return Hardware::uniform(5, 10);
  if (name == "10x10") return Hardware::uniform(10, 10);
  fail(ErrorKind::InvalidArgument, "unknown hardware preset '" + name + "' (5x10, 10x10)");
}

std::string allocation_to_json(const Allocation& allocation, const SlicedCircuit& circuit) {
  nlohmann::ordered_json j;
  j["cost"] = allocation.total_cost;
  if (auto n = normalized_cost(allocation, circuit)) {
    j["normalized_cost"] = *n;
  } else {
    j["normalized_cost"] = nullptr;
  }
  j["mode"] = to_string(allocation.mode);
  j["wall_time_s"] = allocation.wall_time_seconds;
  j["assignment"] = allocation.assignment;
  return j.dump();
}

std::string report_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << kBenchHeader << '\n';
  for (const auto& r : report.rows) {
    out << sanitize(r.circuit) << ',' << r.qubits << ',' << r.slices << ','
        << method_label(r.method) << ',' << (r.total_cost ? fmt(*r.total_cost) : "") << ','
        << (r.normalized_cost ? fmt(*r.normalized_cost) : "") << ','
        << fmt(r.wall_time_seconds) << ',' << (r.error.empty() ? "ok" : sanitize(r.error))
        << '\n';
  }
  return out.str();
}

std::string report_table(const BenchmarkReport& report) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"circuit", "Q", "T", "method", "cost", "norm. cost", "time (s)", "status"});
  for (const auto& r : report.rows) {
    cells.push_back({r.circuit, std::to_string(r.qubits), std::to_string(r.slices),
                     method_label(r.method), r.total_cost ? fmt_cost(*r.total_cost) : "-",
                     r.normalized_cost ? fmt(*r.normalized_cost, 4) : "-",
                     fmt(r.wall_time_seconds, 3), r.error.empty() ? "ok" : r.error});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < cells[i].size(); ++c) {
      const std::string& s = cells[i][c];
      const bool numeric = c == 1 || c == 2 || (c >= 4 && c <= 6);
      const std::string pad(width[c] - s.size(), ' ');
      if (c > 0) out << "  ";
      out << (numeric ? pad + s : (c + 1 == cells[i].size() ? s : s + pad));
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace qalloc

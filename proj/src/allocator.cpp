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

#include "qalloc/allocator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "qalloc/errors.hpp"

namespace qalloc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_capacity(const SlicedCircuit& circuit, const Hardware& hardware) {
  if (hardware.total_capacity() < circuit.num_qubits()) {
    fail(ErrorKind::Infeasible, "hardware holds " + std::to_string(hardware.total_capacity()) +
                                    " qubits but the circuit needs " +
                                    std::to_string(circuit.num_qubits()));
  }
}

/// Partial allocation of one episode.
class EpisodeState {
 public:
  EpisodeState(const SlicedCircuit& circuit, const CircuitEncoding& encoding,
               const Hardware& hardware)
      : circuit_(circuit), encoding_(encoding), hardware_(hardware) {
    const auto q = static_cast<std::size_t>(circuit.num_qubits());
    current_.assign(q, -1);
    assignment_.reserve(circuit.num_slices());
  }

  void begin_slice(std::size_t t) {
    slice_ = t;
    std::fill(current_.begin(), current_.end(), -1);
    free_ = hardware_.capacities();
  }

  [[nodiscard]] StepContext context(const AllocationUnit& unit) const {
    StepContext ctx;
    ctx.slice = static_cast<int>(slice_);
    ctx.qubit_a = unit.a;
    ctx.qubit_b = unit.b;
    if (slice_ > 0) ctx.previous = assignment_.back();
    ctx.current = current_;
    ctx.free_capacity = free_;
    ctx.cost = &hardware_.cost_matrix();
    ctx.embedding = &encoding_.embedding[slice_];
    ctx.next_interaction = &encoding_.next_interaction[slice_];
    return ctx;
  }

  [[nodiscard]] bool fits(const AllocationUnit& unit, int core) const {
    return free_[core] >= unit.size();
  }

  [[nodiscard]] std::vector<char> legal_mask(const AllocationUnit& unit) const {
    std::vector<char> mask(free_.size());
    for (std::size_t c = 0; c < free_.size(); ++c) mask[c] = fits(unit, static_cast<int>(c));
    return mask;
  }

  void place(int qubit, int core) {
    current_[qubit] = core;
    --free_[core];
  }

  void place(const AllocationUnit& unit, int core) {
    place(unit.a, core);
    if (unit.is_pair()) place(unit.b, core);
  }

  /// Outcome of an illegal step.
  void place_fallback(const AllocationUnit& unit) {
    if (slice_ > 0) {
      const auto& prev = assignment_.back();
      place(unit.a, prev[unit.a]);
      if (unit.is_pair()) place(unit.b, prev[unit.b]);
      return;
    }
    auto first_with_room = [&](int room) {
      for (std::size_t c = 0; c < free_.size(); ++c) {
        if (free_[c] >= room) return static_cast<int>(c);
      }
      return -1;
    };
    if (unit.is_pair()) {
      const int both = first_with_room(2);
      if (both >= 0) {
        place(unit, both);
        return;
      }
    }
    for (int q : {unit.a, unit.b}) {
      if (q < 0) continue;
      const int c = first_with_room(1);
      place(q, c >= 0 ? c : 0);
    }
  }

  void end_slice() { assignment_.push_back(current_); }

  [[nodiscard]] Assignment& assignment() { return assignment_; }

 private:
  const SlicedCircuit& circuit_;
  const CircuitEncoding& encoding_;
  const Hardware& hardware_;
  std::size_t slice_ = 0;
  std::vector<int> current_;
  std::vector<int> free_;
  Assignment assignment_;
};

struct Choice {
  int action = 0;
  double log_prob = 0.0;
};

Choice choose(std::span<const double> logits, std::span<const char> mask,
              const AllocatorOptions& options, Rng& rng) {
  const std::vector<double> p = action_distribution(logits, mask, options.noise, rng);
  const int action =
      options.selection == Selection::Greedy ? argmax_index(p) : sample_index(p, rng);
  const std::vector<double> base =
      options.noise == 0.0 ? p : nn::masked_softmax(logits, mask);
  return {action, std::log(base[action])};
}

AllocationResult finish(EpisodeState& state, const SlicedCircuit& circuit,
                        const Hardware& hardware, AllocationMode mode,
                        std::vector<StepRecord> trace, std::size_t illegal,
                        Clock::time_point start) {
  AllocationResult r;
  r.allocation.assignment = std::move(state.assignment());
  r.allocation.total_cost = allocation_cost(r.allocation.assignment, hardware.cost_matrix());
  r.allocation.mode = mode;
  r.trace = std::move(trace);
  r.illegal_steps = illegal;
  r.valid = validate_allocation(r.allocation.assignment, circuit, hardware).empty();
  r.allocation.wall_time_seconds = seconds_since(start);
  return r;
}

[[noreturn]] void no_room(const AllocationUnit& unit, std::size_t slice) {
  std::string what = "no core has room for ";
  what += unit.is_pair() ? "gate (" + std::to_string(unit.a) + "," + std::to_string(unit.b) + ")"
                         : "qubit " + std::to_string(unit.a);
  fail(ErrorKind::Infeasible, what + " in slice " + std::to_string(slice));
}

std::vector<AllocationUnit> free_qubits(const TimeSlice& slice, int num_qubits) {
  std::vector<char> busy(static_cast<std::size_t>(num_qubits), 0);
  for (const Gate& g : slice.gates) busy[g.a] = busy[g.b] = 1;
  std::vector<AllocationUnit> out;
  for (int q = 0; q < num_qubits; ++q) {
    if (!busy[q]) out.push_back({q, -1});
  }
  return out;
}

}  // namespace

std::string to_string(AllocationMode mode) {
  switch (mode) {
    case AllocationMode::Sequential: return "sequential";
    case AllocationMode::Parallel: return "parallel";
    case AllocationMode::Ensemble: return "ensemble";
    case AllocationMode::Baseline: return "baseline";
  }
  return "unknown";
}

double allocation_cost(const Assignment& assignment, const Matrix& cost) {
  double total = 0.0;
  for (std::size_t t = 1; t < assignment.size(); ++t) {
    const auto& prev = assignment[t - 1];
    const auto& cur = assignment[t];
    for (std::size_t q = 0; q < cur.size(); ++q) total += cost(prev[q], cur[q]);
  }
  return total;
}

std::string Violation::describe() const {
  const std::string where = " in slice " + std::to_string(slice);
  switch (kind) {
    case Kind::Shape: return "assignment shape mismatch" + where;
    case Kind::CoreRange: return "qubit " + std::to_string(index) + " on a nonexistent core" + where;
    case Kind::CoLocation: return "gate " + std::to_string(index) + " split across cores" + where;
    case Kind::Capacity: return "core " + std::to_string(index) + " over capacity" + where;
  }
  return "unknown violation";
}

std::vector<Violation> validate_allocation(const Assignment& assignment,
                                           const SlicedCircuit& circuit,
                                           const Hardware& hardware) {
  std::vector<Violation> out;
  const auto q = static_cast<std::size_t>(circuit.num_qubits());
  if (assignment.size() != circuit.num_slices()) {
    out.push_back({Violation::Kind::Shape, -1, -1});
    return out;
  }
  const int cores = hardware.num_cores();
  for (std::size_t t = 0; t < assignment.size(); ++t) {
    const int slice = static_cast<int>(t);
    const auto& row = assignment[t];
    if (row.size() != q) {
      out.push_back({Violation::Kind::Shape, slice, -1});
      continue;
    }
    bool in_range = true;
    for (std::size_t i = 0; i < q; ++i) {
      if (row[i] < 0 || row[i] >= cores) {
        out.push_back({Violation::Kind::CoreRange, slice, static_cast<int>(i)});
        in_range = false;
      }
    }
    const auto& gates = circuit.slice(t).gates;
    for (std::size_t g = 0; g < gates.size(); ++g) {
      if (row[gates[g].a] != row[gates[g].b]) {
        out.push_back({Violation::Kind::CoLocation, slice, static_cast<int>(g)});
      }
    }
    if (!in_range) continue;
    std::vector<int> load(static_cast<std::size_t>(cores), 0);
    for (int c : row) ++load[c];
    for (int c = 0; c < cores; ++c) {
      if (load[c] > hardware.capacity(c)) out.push_back({Violation::Kind::Capacity, slice, c});
    }
  }
  return out;
}

std::vector<AllocationUnit> sequential_order(const TimeSlice& slice, const Matrix& embedding,
                                             int num_qubits) {
  struct Ranked {
    AllocationUnit unit;
    double score;
  };
  std::vector<Ranked> pairs;
  for (const Gate& g : slice.gates) {
    const AllocationUnit u{std::min(g.a, g.b), std::max(g.a, g.b)};
    pairs.push_back({u, embedding(u.a, u.b)});
  }
  std::vector<Ranked> singles;
  for (const AllocationUnit& u : free_qubits(slice, num_qubits)) {
    const auto row = embedding.row(static_cast<std::size_t>(u.a));
    singles.push_back({u, row.empty() ? 0.0 : *std::max_element(row.begin(), row.end())});
  }
  auto by_score = [](const Ranked& x, const Ranked& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.unit.a != y.unit.a) return x.unit.a < y.unit.a;
    return x.unit.b < y.unit.b;
  };
  std::sort(pairs.begin(), pairs.end(), by_score);
  std::sort(singles.begin(), singles.end(), by_score);
  std::vector<AllocationUnit> out;
  out.reserve(pairs.size() + singles.size());
  for (const auto& r : pairs) out.push_back(r.unit);
  for (const auto& r : singles) out.push_back(r.unit);
  return out;
}

std::vector<AllocationResult> allocate_sequential_batch(
    const SlicedCircuit& circuit, const CircuitEncoding& encoding, const Hardware& hardware,
    const Policy& policy, const AllocatorOptions& options, std::size_t episodes, Rng& rng) {
  if (episodes == 0) return {};
  if (options.masking) check_capacity(circuit, hardware);
  const auto start = Clock::now();
  const auto cores = static_cast<std::size_t>(hardware.num_cores());
  const auto qubits = static_cast<std::size_t>(circuit.num_qubits());

  std::vector<EpisodeState> states;
  states.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) states.emplace_back(circuit, encoding, hardware);
  std::vector<std::vector<StepRecord>> traces(episodes);
  std::vector<std::size_t> illegal(episodes, 0);

  FeatureBatch batch;
  batch.batch = episodes;
  batch.cores = cores;
  batch.qubits = qubits;
  const std::size_t key_size = cores * qubits * kFeatureCount;
  const std::size_t query_size = cores * 2 * kFeatureCount;
  batch.key.assign(episodes * key_size, 0.0);
  batch.query.assign(episodes * query_size, 0.0);

  for (std::size_t t = 0; t < circuit.num_slices(); ++t) {
    for (auto& s : states) s.begin_slice(t);
    const auto order = sequential_order(circuit.slice(t), encoding.embedding[t], circuit.num_qubits());
    for (const AllocationUnit& unit : order) {
      for (std::size_t e = 0; e < episodes; ++e) {
        build_features_into(states[e].context(unit),
                            std::span<double>(batch.key).subspan(e * key_size, key_size),
                            std::span<double>(batch.query).subspan(e * query_size, query_size));
      }
      const nn::Tensor logits = policy.logits(batch);
      for (std::size_t e = 0; e < episodes; ++e) {
        EpisodeState& state = states[e];
        const std::span<const double> row(logits.ptr() + e * cores, cores);
        std::vector<char> mask;
        if (options.masking) {
          mask = state.legal_mask(unit);
          if (std::none_of(mask.begin(), mask.end(), [](char m) { return m != 0; })) {
            no_room(unit, t);
          }
        }
        const Choice c = choose(row, mask, options, rng);
        StepRecord rec;
        rec.slice = static_cast<int>(t);
        rec.unit = unit;
        rec.action = c.action;
        rec.log_prob = c.log_prob;
        rec.legal = state.fits(unit, c.action);
        if (options.record_features) {
          rec.features.cores = cores;
          rec.features.qubits = qubits;
          rec.features.key.assign(batch.key.begin() + e * key_size,
                                  batch.key.begin() + (e + 1) * key_size);
          rec.features.query.assign(batch.query.begin() + e * query_size,
                                    batch.query.begin() + (e + 1) * query_size);
        }
        if (rec.legal) {
          state.place(unit, c.action);
        } else {
          ++illegal[e];
          state.place_fallback(unit);
        }
        traces[e].push_back(std::move(rec));
      }
    }
    for (auto& s : states) s.end_slice();
  }

  std::vector<AllocationResult> results;
  results.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    results.push_back(finish(states[e], circuit, hardware, AllocationMode::Sequential,
                             std::move(traces[e]), illegal[e], start));
  }
  return results;
}

AllocationResult allocate_sequential(const SlicedCircuit& circuit, const Hardware& hardware,
                                     const Policy& policy, const AllocatorOptions& options,
                                     Rng& rng) {
  const CircuitEncoding encoding = CircuitEncoding::build(circuit);
  auto start = Clock::now();
  auto results = allocate_sequential_batch(circuit, encoding, hardware, policy, options, 1, rng);
  results.front().allocation.wall_time_seconds = seconds_since(start);
  return std::move(results.front());
}

AllocationResult allocate_parallel(const SlicedCircuit& circuit, const Hardware& hardware,
                                   const Policy& policy, const AllocatorOptions& options,
                                   Rng& rng) {
  if (options.masking) check_capacity(circuit, hardware);
  const auto start = Clock::now();
  const CircuitEncoding encoding = CircuitEncoding::build(circuit);
  const auto cores = static_cast<std::size_t>(hardware.num_cores());
  EpisodeState state(circuit, encoding, hardware);
  std::vector<StepRecord> trace;
  std::size_t illegal = 0;

  for (std::size_t t = 0; t < circuit.num_slices(); ++t) {
    state.begin_slice(t);
    const auto order = sequential_order(circuit.slice(t), encoding.embedding[t], circuit.num_qubits());
    std::vector<AllocationUnit> pairs, singles;
    for (const auto& u : order) (u.is_pair() ? pairs : singles).push_back(u);

    for (std::vector<AllocationUnit>* pool : {&pairs, &singles}) {
      while (!pool->empty()) {
        FeatureBatch batch;
        std::vector<char> mask;
        for (const auto& unit : *pool) {
          batch.append(build_features(state.context(unit)));
          if (options.masking) {
            const auto m = state.legal_mask(unit);
            mask.insert(mask.end(), m.begin(), m.end());
          }
        }
        if (options.masking &&
            std::none_of(mask.begin(), mask.end(), [](char m) { return m != 0; })) {
          no_room(pool->front(), t);
        }
        const nn::Tensor logits = policy.logits(batch);
        const Choice c = choose(logits.data(), mask, options, rng);
        const auto which = static_cast<std::size_t>(c.action) / cores;
        const int core = static_cast<int>(static_cast<std::size_t>(c.action) % cores);
        const AllocationUnit unit = (*pool)[which];

        StepRecord rec;
        rec.slice = static_cast<int>(t);
        rec.unit = unit;
        rec.action = core;
        rec.log_prob = c.log_prob;
        rec.legal = state.fits(unit, core);
        if (options.record_features) {
          rec.features.cores = cores;
          rec.features.qubits = batch.qubits;
          const std::size_t ks = cores * batch.qubits * kFeatureCount;
          const std::size_t qs = cores * 2 * kFeatureCount;
          rec.features.key.assign(batch.key.begin() + which * ks, batch.key.begin() + (which + 1) * ks);
          rec.features.query.assign(batch.query.begin() + which * qs,
                                    batch.query.begin() + (which + 1) * qs);
        }
        if (rec.legal) {
          state.place(unit, core);
        } else {
          ++illegal;
          state.place_fallback(unit);
        }
        trace.push_back(std::move(rec));
        pool->erase(pool->begin() + static_cast<std::ptrdiff_t>(which));
      }
    }
    state.end_slice();
  }
  return finish(state, circuit, hardware, AllocationMode::Parallel, std::move(trace), illegal, start);
}

Allocation allocate_ensemble(const SlicedCircuit& circuit, const Hardware& hardware,
                             const Policy& policy) {
  Rng unused(0);
  const AllocatorOptions greedy;
  std::optional<Allocation> seq, par;
  std::optional<Error> first_error;
  try {
    seq = allocate_sequential(circuit, hardware, policy, greedy, unused).allocation;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Infeasible) throw;
    first_error = e;
  }
  try {
    par = allocate_parallel(circuit, hardware, policy, greedy, unused).allocation;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Infeasible) throw;
    if (!first_error) first_error = e;
  }
  if (!seq && !par) throw *first_error;
  const double elapsed =
      (seq ? seq->wall_time_seconds : 0.0) + (par ? par->wall_time_seconds : 0.0);
  Allocation best;
  if (seq && (!par || seq->total_cost <= par->total_cost)) {
    best = std::move(*seq);
  } else {
    best = std::move(*par);
  }
  best.mode = AllocationMode::Ensemble;
  best.wall_time_seconds = elapsed;
  return best;
}

}  // namespace qalloc

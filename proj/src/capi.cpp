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

#include "qalloc/qalloc.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "qalloc/allocator.hpp"
#include "qalloc/baseline.hpp"
#include "qalloc/bench.hpp"
#include "qalloc/circuit.hpp"
#include "qalloc/errors.hpp"
#include "qalloc/generators.hpp"
#include "qalloc/hardware.hpp"
#include "qalloc/policy.hpp"
#include "qalloc/trainer.hpp"

struct qa_circuit {
  qalloc::Circuit original;
  qalloc::SlicedCircuit sliced;
};

struct qa_hardware {
  qalloc::Hardware hardware;
};

struct qa_policy {
  qalloc::Policy policy;
};

namespace {

thread_local std::string last_error;

qa_status status_of(qalloc::ErrorKind kind) {
  using qalloc::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return QA_ERR_INVALID_ARGUMENT;
    case ErrorKind::Parse: return QA_ERR_PARSE;
    case ErrorKind::Config: return QA_ERR_CONFIG;
    case ErrorKind::Io: return QA_ERR_IO;
    case ErrorKind::Infeasible: return QA_ERR_INFEASIBLE;
    case ErrorKind::Checkpoint: return QA_ERR_CHECKPOINT;
    case ErrorKind::Numeric: return QA_ERR_NUMERIC;
  }
  return QA_ERR_INTERNAL;
}

qa_status set_error(qa_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <class F>
qa_status guarded(F&& body) {
  try {
    body();
    return QA_OK;
  } catch (const qalloc::Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(QA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(QA_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) qalloc::fail(qalloc::ErrorKind::InvalidArgument, what);
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qa_circuit* make_circuit(qalloc::Circuit c) {
  qalloc::SlicedCircuit sliced = qalloc::slice_circuit(c);
  return new qa_circuit{std::move(c), std::move(sliced)};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) qalloc::fail(qalloc::ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<qalloc::AllocationMode> parse_methods(const std::string& list) {
  std::vector<qalloc::AllocationMode> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item == "seq" || item == "sequential") {
      out.push_back(qalloc::AllocationMode::Sequential);
    } else if (item == "par" || item == "parallel") {
      out.push_back(qalloc::AllocationMode::Parallel);
    } else if (item == "ensemble") {
      out.push_back(qalloc::AllocationMode::Ensemble);
    } else if (item == "hqa") {
      out.push_back(qalloc::AllocationMode::Baseline);
    } else {
      qalloc::fail(qalloc::ErrorKind::InvalidArgument, "unknown method '" + item + "'");
    }
  }
  if (out.empty()) qalloc::fail(qalloc::ErrorKind::InvalidArgument, "no methods given");
  return out;
}

}  // namespace

extern "C" {

const char* qa_version(void) { return "0.1.0"; }

const char* qa_last_error(void) { return last_error.c_str(); }

const char* qa_status_name(qa_status status) {
  switch (status) {
    case QA_OK: return "ok";
    case QA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case QA_ERR_PARSE: return "parse error";
    case QA_ERR_CONFIG: return "config error";
    case QA_ERR_IO: return "I/O error";
    case QA_ERR_INFEASIBLE: return "infeasible";
    case QA_ERR_CHECKPOINT: return "checkpoint error";
    case QA_ERR_NUMERIC: return "numeric error";
    case QA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void qa_string_free(char* s) { std::free(s); }

qa_status qa_circuit_parse(const char* json, qa_circuit** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "null argument");
    *out = make_circuit(qalloc::parse_circuit(json));
  });
}

qa_status qa_circuit_generate(const char* kind, int num_qubits, uint64_t seed,
                              qa_circuit** out) {
  return guarded([&] {
    require(kind != nullptr && out != nullptr, "null argument");
    qalloc::Rng rng(seed);
    *out = make_circuit(
        qalloc::generate_named_circuit(qalloc::parse_circuit_kind(kind), num_qubits, &rng));
  });
}

qa_status qa_circuit_random(int num_qubits, int target_slices, uint64_t seed,
                            qa_circuit** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    qalloc::Rng rng(seed);
    *out = make_circuit(qalloc::random_circuit(num_qubits, target_slices, rng));
  });
}

qa_status qa_circuit_to_json(const qa_circuit* circuit, char** out) {
  return guarded([&] {
    require(circuit != nullptr && out != nullptr, "null argument");
    *out = duplicate(qalloc::serialize_circuit(circuit->original));
  });
}

qa_status qa_circuit_sliced_json(const qa_circuit* circuit, char** out) {
  return guarded([&] {
    require(circuit != nullptr && out != nullptr, "null argument");
    *out = duplicate(qalloc::serialize_sliced_circuit(circuit->sliced));
  });
}

int qa_circuit_num_qubits(const qa_circuit* circuit) {
  return circuit == nullptr ? -1 : circuit->sliced.num_qubits();
}

int qa_circuit_num_slices(const qa_circuit* circuit) {
  return circuit == nullptr ? -1 : static_cast<int>(circuit->sliced.num_slices());
}

int qa_circuit_num_gates(const qa_circuit* circuit) {
  return circuit == nullptr ? -1 : static_cast<int>(circuit->sliced.num_gates());
}

void qa_circuit_free(qa_circuit* circuit) { delete circuit; }

qa_status qa_hardware_parse(const char* json, qa_hardware** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "null argument");
    *out = new qa_hardware{qalloc::parse_hardware(json)};
  });
}

qa_status qa_hardware_preset(const char* name, qa_hardware** out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    *out = new qa_hardware{qalloc::bench_preset(name)};
  });
}

qa_status qa_hardware_to_json(const qa_hardware* hardware, char** out) {
  return guarded([&] {
    require(hardware != nullptr && out != nullptr, "null argument");
    *out = duplicate(qalloc::serialize_hardware(hardware->hardware));
  });
}

int qa_hardware_num_cores(const qa_hardware* hardware) {
  return hardware == nullptr ? -1 : hardware->hardware.num_cores();
}

int qa_hardware_total_capacity(const qa_hardware* hardware) {
  return hardware == nullptr ? -1 : hardware->hardware.total_capacity();
}

void qa_hardware_free(qa_hardware* hardware) { delete hardware; }

qa_status qa_policy_new(const char* config_json, uint64_t seed, qa_policy** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    qalloc::PolicyConfig config;
    if (config_json != nullptr) config = qalloc::PolicyConfig::from_json(config_json);
    *out = new qa_policy{qalloc::Policy(config, seed)};
  });
}

qa_status qa_policy_load(const char* path, qa_policy** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new qa_policy{qalloc::Policy::load(path)};
  });
}

qa_status qa_policy_save(const qa_policy* policy, const char* path) {
  return guarded([&] {
    require(policy != nullptr && path != nullptr, "null argument");
    policy->policy.save(path);
  });
}

size_t qa_policy_num_parameters(const qa_policy* policy) {
  return policy == nullptr ? 0 : policy->policy.parameters().num_parameters();
}

void qa_policy_free(qa_policy* policy) { delete policy; }

void qa_allocate_options_init(qa_allocate_options* options) {
  if (options == nullptr) return;
  options->mode = QA_MODE_ENSEMBLE;
  options->sample = 0;
  options->noise = 0.0;
  options->seed = 0;
}

qa_status qa_allocate(const qa_circuit* circuit, const qa_hardware* hardware,
                      const qa_policy* policy, const qa_allocate_options* options,
                      char** allocation_json) {
  return guarded([&] {
    require(circuit != nullptr && hardware != nullptr && allocation_json != nullptr,
            "null argument");
    qa_allocate_options opts;
    qa_allocate_options_init(&opts);
    if (options != nullptr) opts = *options;
    const auto& sc = circuit->sliced;
    const auto& hw = hardware->hardware;
    if (opts.mode != QA_MODE_HQA) require(policy != nullptr, "this mode needs a policy");
    qalloc::AllocatorOptions a;
    a.selection = opts.sample ? qalloc::Selection::Sample : qalloc::Selection::Greedy;
    a.noise = opts.noise;
    qalloc::Rng rng(opts.seed);
    qalloc::Allocation result;
    switch (opts.mode) {
      case QA_MODE_SEQUENTIAL:
        result = qalloc::allocate_sequential(sc, hw, policy->policy, a, rng).allocation;
        break;
      case QA_MODE_PARALLEL:
        result = qalloc::allocate_parallel(sc, hw, policy->policy, a, rng).allocation;
        break;
      case QA_MODE_ENSEMBLE:
        result = qalloc::allocate_ensemble(sc, hw, policy->policy);
        break;
      case QA_MODE_HQA:
        result = qalloc::hqa_allocate(sc, hw);
        break;
      default:
        qalloc::fail(qalloc::ErrorKind::InvalidArgument, "unknown allocation mode");
    }
    *allocation_json = duplicate(qalloc::allocation_to_json(result, sc));
  });
}

qa_status qa_train(const char* config_json, const char* checkpoint_path,
                   const char* metrics_path, qa_progress_fn progress, void* user,
                   qa_policy** out) {
  return guarded([&] {
    require(config_json != nullptr, "null argument");
    const qalloc::TrainConfig config = qalloc::TrainConfig::from_json(config_json);
    qalloc::Policy policy(config.policy, config.seed);
    qalloc::MetricsCallback callback;
    if (progress != nullptr) {
      callback = [&](const qalloc::MetricsRow& row) {
        progress(qalloc::format_metrics_row(row).c_str(), user);
      };
    }
    const qalloc::TrainResult result = qalloc::train(config, policy, callback);
    if (metrics_path != nullptr) qalloc::write_metrics_csv(result.metrics, metrics_path);
    if (checkpoint_path != nullptr) policy.save(checkpoint_path);
    if (out != nullptr) *out = new qa_policy{std::move(policy)};
  });
}

void qa_bench_options_init(qa_bench_options* options) {
  if (options == nullptr) return;
  options->methods = "seq,par,ensemble,hqa";
  options->circuit_dir = nullptr;
  options->random_count = 64;
  options->random_qubits = 0;
  options->random_slices = 50;
  options->seed = 0;
}

qa_status qa_bench(const qa_hardware* hardware, const qa_policy* policy,
                   const qa_bench_options* options, char** csv, char** table) {
  return guarded([&] {
    require(hardware != nullptr, "null argument");
    qa_bench_options opts;
    qa_bench_options_init(&opts);
    if (options != nullptr) opts = *options;
    const auto& hw = hardware->hardware;
    const auto methods = parse_methods(opts.methods == nullptr ? "" : opts.methods);

    std::vector<qalloc::BenchCircuit> circuits;
    if (opts.circuit_dir != nullptr) {
      const std::filesystem::path dir(opts.circuit_dir);
      if (!std::filesystem::is_directory(dir)) {
        qalloc::fail(qalloc::ErrorKind::Io, "not a directory: " + dir.string());
      }
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
          files.push_back(entry.path());
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        circuits.push_back({f.stem().string(),
                            qalloc::slice_circuit(qalloc::parse_circuit(read_file(f))), false});
      }
    }
    if (opts.random_count > 0) {
      const int q = opts.random_qubits > 0 ? opts.random_qubits : hw.total_capacity();
      auto random = qalloc::random_bench_circuits(opts.random_count, q, opts.random_slices,
                                                  opts.seed);
      for (auto& r : random) circuits.push_back(std::move(r));
    }
    const qalloc::BenchmarkReport report = qalloc::benchmark_suite(
        circuits, hw, methods, policy == nullptr ? nullptr : &policy->policy);
    char* csv_out = csv != nullptr ? duplicate(qalloc::report_csv(report)) : nullptr;
    try {
      if (table != nullptr) *table = duplicate(qalloc::report_table(report));
    } catch (...) {
      std::free(csv_out);
      throw;
    }
    if (csv != nullptr) *csv = csv_out;
  });
}

}  // extern "C"

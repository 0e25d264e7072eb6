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

/* C interface to the qalloc library. Every fallible call returns a
 * qa_status; on failure qa_last_error() describes the problem (per thread,
 * valid until the next failing call). Strings returned through char** are
 * owned by the caller and released with qa_string_free(). */
#ifndef QALLOC_QALLOC_H_
#define QALLOC_QALLOC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QA_API __declspec(dllexport)
#else
#define QA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qa_status {
  QA_OK = 0,
  QA_ERR_INVALID_ARGUMENT = 1,
  QA_ERR_PARSE = 2,
  QA_ERR_CONFIG = 3,
  QA_ERR_IO = 4,
  QA_ERR_INFEASIBLE = 5,
  QA_ERR_CHECKPOINT = 6,
  QA_ERR_NUMERIC = 7,
  QA_ERR_INTERNAL = 8
} qa_status;

typedef enum qa_mode {
  QA_MODE_SEQUENTIAL = 0,
  QA_MODE_PARALLEL = 1,
  QA_MODE_ENSEMBLE = 2,
  QA_MODE_HQA = 3
} qa_mode;

typedef struct qa_circuit qa_circuit;
typedef struct qa_hardware qa_hardware;
typedef struct qa_policy qa_policy;

QA_API const char* qa_version(void);
QA_API const char* qa_last_error(void);
QA_API const char* qa_status_name(qa_status status);
QA_API void qa_string_free(char* s);

/* Circuits. Parsing accepts {"num_qubits", "gates"} or {"num_qubits",
 * "slices"} documents; the circuit is re-sliced greedily either way. */
QA_API qa_status qa_circuit_parse(const char* json, qa_circuit** out);
/* kind: qft, graph_state, deutsch_jozsa, cuccaro_adder, draper_adder.
 * The seed only matters for graph_state. */
QA_API qa_status qa_circuit_generate(const char* kind, int num_qubits, uint64_t seed,
                                     qa_circuit** out);
QA_API qa_status qa_circuit_random(int num_qubits, int target_slices, uint64_t seed,
                                   qa_circuit** out);
QA_API qa_status qa_circuit_to_json(const qa_circuit* circuit, char** out);
QA_API qa_status qa_circuit_sliced_json(const qa_circuit* circuit, char** out);
QA_API int qa_circuit_num_qubits(const qa_circuit* circuit);
QA_API int qa_circuit_num_slices(const qa_circuit* circuit);
QA_API int qa_circuit_num_gates(const qa_circuit* circuit);
QA_API void qa_circuit_free(qa_circuit* circuit);

/* Hardware: {"capacities": [...], "cost_matrix": [[...]] | "uniform"}, or a
 * preset name ("5x10", "10x10"). */
QA_API qa_status qa_hardware_parse(const char* json, qa_hardware** out);
QA_API qa_status qa_hardware_preset(const char* name, qa_hardware** out);
QA_API qa_status qa_hardware_to_json(const qa_hardware* hardware, char** out);
QA_API int qa_hardware_num_cores(const qa_hardware* hardware);
QA_API int qa_hardware_total_capacity(const qa_hardware* hardware);
QA_API void qa_hardware_free(qa_hardware* hardware);

/* Policies. config_json may be NULL for the default architecture. */
QA_API qa_status qa_policy_new(const char* config_json, uint64_t seed, qa_policy** out);
QA_API qa_status qa_policy_load(const char* path, qa_policy** out);
QA_API qa_status qa_policy_save(const qa_policy* policy, const char* path);
QA_API size_t qa_policy_num_parameters(const qa_policy* policy);
QA_API void qa_policy_free(qa_policy* policy);

typedef struct qa_allocate_options {
  qa_mode mode;
  /* Nonzero: sample cores instead of taking the argmax (sequential and
   * parallel only). */
  int sample;
  double noise;
  uint64_t seed;
} qa_allocate_options;

QA_API void qa_allocate_options_init(qa_allocate_options* options);

/* Writes {"cost", "normalized_cost", "mode", "wall_time_s", "assignment"}.
 * policy may be NULL for QA_MODE_HQA. */
QA_API qa_status qa_allocate(const qa_circuit* circuit, const qa_hardware* hardware,
                             const qa_policy* policy, const qa_allocate_options* options,
                             char** allocation_json);

/* Called after each metrics row; the line has the CSV column layout. */
typedef void (*qa_progress_fn)(const char* metrics_line, void* user);

/* Trains a fresh policy from a JSON training config. checkpoint_path and
 * metrics_path may be NULL; out may be NULL. */
QA_API qa_status qa_train(const char* config_json, const char* checkpoint_path,
                          const char* metrics_path, qa_progress_fn progress, void* user,
                          qa_policy** out);

typedef struct qa_bench_options {
  /* Comma-separated subset of seq,par,ensemble,hqa. */
  const char* methods;
  /* Directory of circuit JSON files (NULL for none), read in name order. */
  const char* circuit_dir;
  size_t random_count;
  /* 0 means the hardware's total capacity. */
  int random_qubits;
  int random_slices;
  uint64_t seed;
} qa_bench_options;

QA_API void qa_bench_options_init(qa_bench_options* options);

/* Report as CSV and as an aligned text table; either output may be NULL. */
QA_API qa_status qa_bench(const qa_hardware* hardware, const qa_policy* policy,
                          const qa_bench_options* options, char** csv, char** table);

#ifdef __cplusplus
}
#endif

#endif /* QALLOC_QALLOC_H_ */

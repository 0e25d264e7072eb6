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

// Command-line front end over the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "qalloc/qalloc.h"

namespace {

constexpr int kUsageExit = 64;

/// Status codes double as exit codes; QA_OK is 0.
struct Failure {
  qa_status status;
  std::string message;
};

[[noreturn]] void raise(qa_status status, std::string message) {
  throw Failure{status, std::move(message)};
}

void check(qa_status status) {
  if (status != QA_OK) raise(status, qa_last_error());
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(QA_ERR_IO, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(QA_ERR_IO, "cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) raise(QA_ERR_IO, "failed writing " + path);
}

struct StringDeleter {
  void operator()(char* s) const { qa_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

std::string take(char* s) {
  OwnedString owned(s);
  return owned ? std::string(owned.get()) : std::string();
}

struct CircuitDeleter {
  void operator()(qa_circuit* c) const { qa_circuit_free(c); }
};
struct HardwareDeleter {
  void operator()(qa_hardware* h) const { qa_hardware_free(h); }
};
struct PolicyDeleter {
  void operator()(qa_policy* p) const { qa_policy_free(p); }
};
using Circuit = std::unique_ptr<qa_circuit, CircuitDeleter>;
using Hardware = std::unique_ptr<qa_hardware, HardwareDeleter>;
using Policy = std::unique_ptr<qa_policy, PolicyDeleter>;

Circuit load_circuit(const std::string& path) {
  qa_circuit* c = nullptr;
  check(qa_circuit_parse(read_input(path).c_str(), &c));
  return Circuit(c);
}

Hardware load_hardware(const std::string& path, const std::string& preset) {
  qa_hardware* h = nullptr;
  if (!path.empty()) {
    check(qa_hardware_parse(read_input(path).c_str(), &h));
  } else {
    check(qa_hardware_preset(preset.c_str(), &h));
  }
  return Hardware(h);
}

Policy load_policy(const std::string& path) {
  if (path.empty()) return nullptr;
  qa_policy* p = nullptr;
  check(qa_policy_load(path.c_str(), &p));
  return Policy(p);
}

qa_mode parse_mode(const std::string& mode) {
  if (mode == "seq") return QA_MODE_SEQUENTIAL;
  if (mode == "par") return QA_MODE_PARALLEL;
  if (mode == "ensemble") return QA_MODE_ENSEMBLE;
  return QA_MODE_HQA;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Qubit allocation for multi-core quantum hardware"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qa_version()));

  std::string input = "-";
  std::string output = "-";

  auto* slice = app.add_subcommand("slice", "Slice a circuit into maximal parallel layers");
  slice->add_option("input", input, "Circuit JSON file, - for stdin");
  slice->add_option("-o,--output", output, "Output file, - for stdout");

  std::string kind;
  int qubits = 0;
  int slices = 50;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("gen", "Generate a named or random circuit");
  gen->add_option("kind", kind,
                  "qft, graph_state, deutsch_jozsa, cuccaro_adder, draper_adder or random")
      ->required();
  gen->add_option("-n,--qubits", qubits, "Number of qubits")->required();
  gen->add_option("-t,--slices", slices, "Target slices for random circuits");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("-o,--output", output, "Output file, - for stdout");

  std::string hardware_path;
  std::string preset = "5x10";
  std::string checkpoint;
  std::string mode = "ensemble";
  bool sample = false;
  double noise = 0.0;
  auto* allocate = app.add_subcommand("allocate", "Allocate a circuit onto a device");
  allocate->add_option("circuit", input, "Circuit JSON (plain or sliced), - for stdin");
  allocate->add_option("--hardware", hardware_path, "Hardware JSON file");
  allocate->add_option("--preset", preset, "Hardware preset when no file is given")
      ->check(CLI::IsMember({"5x10", "10x10"}));
  allocate->add_option("--checkpoint", checkpoint, "Policy checkpoint");
  allocate->add_option("--mode", mode, "seq, par, ensemble or hqa")
      ->check(CLI::IsMember({"seq", "par", "ensemble", "hqa"}));
  allocate->add_option("--seed", seed, "Seed for sampled selection");
  allocate->add_flag("--sample", sample, "Sample cores instead of taking the argmax");
  allocate->add_option("--noise", noise, "Exploration noise when sampling");
  allocate->add_option("-o,--output", output, "Output file, - for stdout");

  std::string config_path;
  std::string metrics_path;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train a policy");
  train->add_option("config", config_path, "Training config JSON")->required();
  train->add_option("--checkpoint", checkpoint, "Where to write the trained policy")
      ->required();
  train->add_option("--metrics", metrics_path, "Where to write the metrics CSV");
  train->add_flag("-q,--quiet", quiet, "Do not echo metrics rows");

  std::string circuit_dir;
  std::string methods = "seq,par,ensemble,hqa";
  std::size_t random_count = 64;
  int random_qubits = 0;
  std::string csv_path;
  std::string table_path = "-";
  auto* bench = app.add_subcommand("bench", "Benchmark allocation methods");
  bench->add_option("--circuits", circuit_dir, "Directory of circuit JSON files");
  bench->add_option("--hardware", hardware_path, "Hardware JSON file");
  bench->add_option("--preset", preset, "Hardware preset when no file is given")
      ->check(CLI::IsMember({"5x10", "10x10"}));
  bench->add_option("--checkpoint", checkpoint, "Policy checkpoint (needed unless only hqa)");
  bench->add_option("--methods", methods, "Comma-separated seq,par,ensemble,hqa");
  bench->add_option("--random", random_count, "Number of random circuits");
  bench->add_option("--random-qubits", random_qubits,
                    "Qubits per random circuit (default: device capacity)");
  bench->add_option("-t,--slices", slices, "Target slices per random circuit");
  bench->add_option("--seed", seed, "Seed for the random circuits");
  bench->add_option("--csv", csv_path, "Where to write the CSV report");
  bench->add_option("--table", table_path, "Where to write the text table, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }

  try {
    if (*slice) {
      Circuit c = load_circuit(input);
      char* out = nullptr;
      check(qa_circuit_sliced_json(c.get(), &out));
      write_output(output, take(out));
    } else if (*gen) {
      qa_circuit* raw = nullptr;
      if (kind == "random") {
        check(qa_circuit_random(qubits, slices, seed, &raw));
      } else {
        check(qa_circuit_generate(kind.c_str(), qubits, seed, &raw));
      }
      Circuit c(raw);
      char* out = nullptr;
      check(qa_circuit_to_json(c.get(), &out));
      write_output(output, take(out));
    } else if (*allocate) {
      Circuit c = load_circuit(input);
      Hardware h = load_hardware(hardware_path, preset);
      Policy p = load_policy(checkpoint);
      if (!p && mode != "hqa") raise(QA_ERR_INVALID_ARGUMENT, "--checkpoint is required for --mode " + mode);
      qa_allocate_options opts;
      qa_allocate_options_init(&opts);
      opts.mode = parse_mode(mode);
      opts.sample = sample ? 1 : 0;
      opts.noise = noise;
      opts.seed = seed;
      char* out = nullptr;
      check(qa_allocate(c.get(), h.get(), p.get(), &opts, &out));
      write_output(output, take(out));
    } else if (*train) {
      const std::string config = read_input(config_path);
      auto echo = [](const char* line, void*) { std::fprintf(stderr, "%s\n", line); };
      check(qa_train(config.c_str(), checkpoint.c_str(),
                     metrics_path.empty() ? nullptr : metrics_path.c_str(),
                     quiet ? nullptr : +echo, nullptr, nullptr));
    } else if (*bench) {
      Hardware h = load_hardware(hardware_path, preset);
      Policy p = load_policy(checkpoint);
      qa_bench_options opts;
      qa_bench_options_init(&opts);
      opts.methods = methods.c_str();
      opts.circuit_dir = circuit_dir.empty() ? nullptr : circuit_dir.c_str();
      opts.random_count = random_count;
      opts.random_qubits = random_qubits;
      opts.random_slices = slices;
      opts.seed = seed;
      char* csv = nullptr;
      char* table = nullptr;
      check(qa_bench(h.get(), p.get(), &opts, &csv, &table));
      const std::string csv_text = take(csv);
      const std::string table_text = take(table);
      if (!csv_path.empty()) write_output(csv_path, csv_text);
      if (!table_path.empty()) write_output(table_path, table_text);
    }
  } catch (const Failure& f) {
    std::cerr << "error (" << qa_status_name(f.status) << "): " << f.message << '\n';
    return static_cast<int>(f.status);
  }
  return 0;
}

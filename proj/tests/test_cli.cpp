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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

class Sandbox {
 public:
  Sandbox() : dir_(fs::temp_directory_path() / ("qalloc_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(dir_);
  }
  ~Sandbox() { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  Run run(const std::string& args) const {
    const std::string out = path("stdout").string();
    const std::string err = path("stderr").string();
    const std::string cmd = "cd '" + dir_.string() + "' && '" QALLOC_CLI_PATH "' " + args +
                            " > '" + out + "' 2> '" + err + "'";
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = read("stdout");
    r.err = read("stderr");
    return r;
  }

 private:
  fs::path dir_;
};

nlohmann::json without_time(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  j.erase("wall_time_s");
  return j;
}

const char* kTrainConfig = R"({
  "iterations": 2, "group_size": 2, "qubits": [4, 5], "slices": [2, 3],
  "cores": [2, 2], "capacity": [3, 4],
  "validation": {"circuits": 2, "qubits": [4, 5], "slices": [2, 3]},
  "policy": {"hidden": 8, "layers": 1, "heads": 2}})";

}  // namespace

TEST_CASE("cli generates, slices and allocates") {
  Sandbox box;
  Run gen = box.run("gen random -n 8 -t 5 --seed 3 -o c.json");
  REQUIRE(gen.status == 0);
  const auto circuit = nlohmann::json::parse(box.read("c.json"));
  CHECK(circuit["num_qubits"] == 8);

  Run sliced = box.run("slice c.json");
  REQUIRE(sliced.status == 0);
  CHECK(nlohmann::json::parse(sliced.out)["slices"].size() == 5);
  CHECK(box.run("slice - < c.json").out == sliced.out);

  box.write("hw.json", R"({"capacities": [4, 4, 4]})");
  REQUIRE(box.run("train cfg.json --checkpoint p.qckpt").status == 4);
  box.write("cfg.json", kTrainConfig);
  Run train = box.run("train cfg.json --checkpoint p.qckpt --metrics m.csv");
  REQUIRE(train.status == 0);
  CHECK(fs::exists(box.path("p.qckpt")));
  CHECK(box.read("m.csv").rfind("iteration,", 0) == 0);

  for (const char* mode : {"seq", "par", "ensemble", "hqa"}) {
    const std::string m = mode;
    Run direct = box.run("allocate c.json --hardware hw.json --checkpoint p.qckpt --mode " + m);
    REQUIRE(direct.status == 0);
    Run piped = box.run("slice c.json | '" QALLOC_CLI_PATH
                        "' allocate - --hardware hw.json --checkpoint p.qckpt --mode " + m);
    REQUIRE(piped.status == 0);
    CHECK(without_time(direct.out) == without_time(piped.out));
    CHECK(without_time(direct.out)["assignment"].size() == 5);
  }
  Run preset = box.run("allocate c.json --preset 5x10 --mode hqa -o a.json");
  REQUIRE(preset.status == 0);
  CHECK(nlohmann::json::parse(box.read("a.json"))["mode"] == "baseline");
}

TEST_CASE("cli benchmark writes csv and table") {
  Sandbox box;
  fs::create_directories(box.path("circuits"));
  box.write("circuits/tiny.json", R"({"num_qubits": 4, "gates": [[0,1],[2,3],[1,2]]})");
  box.write("hw.json", R"({"capacities": [3, 3]})");
  Run r = box.run("bench --circuits circuits --hardware hw.json --methods hqa --random 2 -t 3 "
                  "--csv out.csv");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("hqa_like") != std::string::npos);
  const std::string csv = box.read("out.csv");
  CHECK(csv.find("\ntiny,4,2,hqa_like,") != std::string::npos);
  CHECK(csv.find("Random Avg,6,3,hqa_like,") != std::string::npos);
}

TEST_CASE("cli exit codes follow the error kind") {
  Sandbox box;
  box.write("bad.json", "{");
  box.write("c.json", R"({"num_qubits": 6, "gates": [[0,1]]})");
  box.write("pair.json", R"({"num_qubits": 2, "gates": [[0,1]]})");
  box.write("small.json", R"({"capacities": [1, 1]})");
  box.write("junk.qckpt", "junk");
  box.write("cfg.json", R"({"iterations": -1})");

  CHECK(box.run("frobnicate").status == 64);
  CHECK(box.run("allocate c.json --mode warp").status == 64);
  CHECK(box.run("slice missing.json").status == 4);
  CHECK(box.run("slice bad.json").status == 2);
  CHECK(box.run("train cfg.json --checkpoint x").status == 3);
  CHECK(box.run("allocate pair.json --hardware small.json --mode hqa").status == 5);
  Run infeasible = box.run("allocate c.json --hardware small.json --mode hqa");
  CHECK(infeasible.status == 5);
  CHECK(infeasible.err.find("infeasible") != std::string::npos);
  CHECK(box.run("allocate c.json --preset 5x10 --checkpoint junk.qckpt").status == 6);
  CHECK(box.run("allocate c.json --preset 5x10 --mode seq").status == 1);
}

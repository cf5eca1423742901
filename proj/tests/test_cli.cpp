// Copyright 2026 The CompNet Authors.
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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "compnet/manifest.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using compnet::testing::scratch_dir;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const fs::path& dir) {
  const auto log = dir / "last_run.txt";
  const std::string cmd = std::string(COMPNET_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

const char* kSmall = R"({"num_classes": 2, "height": 6, "width": 6, "train_per_class": 6,
  "test_per_class": 2, "background_images": 3, "components": 8, "mixtures": 2, "score_maps": 2,
  "background_samples": 50})";

/// Objective values from lines containing `marker`, in order.
std::vector<double> objectives(const std::string& log, const std::string& marker) {
  std::vector<double> v;
  std::istringstream in(log);
  for (std::string line; std::getline(in, line);) {
    if (line.find(marker) == std::string::npos) continue;
    const auto at = line.rfind("objective ");
    if (at != std::string::npos) v.push_back(std::stod(line.substr(at + 10)));
  }
  return v;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("full pipeline through the command-line tool") {
  const auto dir = scratch_dir("cli_pipeline");
  spit(dir / "small.json", kSmall);
  const auto cfg = "--config " + (dir / "small.json").string() + " --out " + (dir / "data").string();

  auto r = run("synth " + cfg, dir);
  REQUIRE_MESSAGE(r.code == 0, r.out);
  const auto manifest = compnet::load_manifest(dir / "data/manifest.json");
  CHECK(manifest.class_labels() == std::vector<std::string>{"0", "1"});
  CHECK(fs::exists(dir / "data/world.json"));

  r = run("learn-dict " + cfg, dir);
  REQUIRE_MESSAGE(r.code == 0, r.out);
  const auto dict_obj = objectives(r.out, "learn-dict");
  REQUIRE(!dict_obj.empty());
  for (std::size_t i = 1; i < dict_obj.size(); ++i) CHECK(dict_obj[i] >= dict_obj[i - 1] - 1e-9 * std::abs(dict_obj[i - 1]));

  r = run("train " + cfg, dir);
  REQUIRE_MESSAGE(r.code == 0, r.out);
  for (const char* label : {"class 0 ", "class 1 "}) {
    const auto obj = objectives(r.out, label);
    for (std::size_t i = 1; i < obj.size(); ++i) CHECK(obj[i] >= obj[i - 1] - 1e-9 * std::abs(obj[i - 1]));
  }
  CHECK(slurp(dir / "data/models/0.cvmf").substr(0, 4) == "CVMF");

  r = run("train --family dict --m-mixtures 1 --models " + (dir / "dict_models").string() + " " + cfg, dir);
  REQUIRE_MESSAGE(r.code == 0, r.out);
  CHECK(slurp(dir / "dict_models/1.cbrn").substr(0, 4) == "CBRN");

  r = run("eval " + cfg, dir);
  REQUIRE_MESSAGE(r.code == 0, r.out);
  const auto csv = slurp(dir / "data/eval/accuracy.csv");
  CHECK(csv.rfind("model,occ-0,L1-w,L1-n,L1-t,L1-o,L2-w,L2-n,L2-t,L2-o,L3-w,L3-n,L3-t,L3-o,mean\nvmf,", 0) == 0);
  const auto roc = nlohmann::json::parse(slurp(dir / "data/eval/roc.json"));
  for (const char* key : {"pooled", "white", "noise", "texture", "object", "L1", "L2", "L3"}) {
    REQUIRE(roc.contains(key));
    const double auc = roc[key]["auc"].get<double>();
    CHECK(auc >= 0.0);
    CHECK(auc <= 1.0);
  }
  int pgms = 0;
  for (const auto& e : fs::directory_iterator(dir / "data/eval/scoremaps")) pgms += slurp(e.path()).rfind("P5\n6 6\n255\n", 0) == 0;
  CHECK(pgms == 2);

  const auto features = (dir / "data/test/c1_000000_L2_n.cfmp").string();
  r = run("classify --features " + features + " " + cfg, dir);
  CHECK_MESSAGE(r.code == 0, r.out);
  CHECK(r.out.rfind("predicted ", 0) == 0);
  r = run("localize --features " + features + " " + cfg, dir);
  CHECK_MESSAGE(r.code == 0, r.out);
  CHECK(fs::exists(dir / "data/occluder.cmsk"));
}

TEST_CASE("commands are reproducible byte for byte") {
  const auto dir = scratch_dir("cli_repro");
  spit(dir / "small.json", kSmall);
  for (const char* out : {"a", "b"}) {
    const auto cfg = "--config " + (dir / "small.json").string() + " --out " + (dir / out).string();
    REQUIRE(run("synth " + cfg, dir).code == 0);
    REQUIRE(run("learn-dict " + cfg, dir).code == 0);
    REQUIRE(run("train " + cfg, dir).code == 0);
    REQUIRE(run("eval " + cfg, dir).code == 0);
  }
  const auto a = tree(dir / "a");
  CHECK(a.size() > 50);
  CHECK(a == tree(dir / "b"));
}

TEST_CASE("exit codes: 2 for configuration errors, 3 for data errors") {
  const auto dir = scratch_dir("cli_errors");
  spit(dir / "bad_bounds.json", R"({"level_bounds": {"L2": [0.7, 0.5]}})");
  auto r = run("synth --config " + (dir / "bad_bounds.json").string() + " --out " + (dir / "x").string(), dir);
  CHECK(r.code == 2);
  CHECK(r.out.find("L2") != std::string::npos);
  CHECK(run("synth --pi 1.5 --out " + (dir / "x").string(), dir).code == 2);
  CHECK(run("synth --no-such-flag", dir).code == 2);
  spit(dir / "unknown.json", R"({"colour": 3})");
  CHECK(run("synth --config " + (dir / "unknown.json").string(), dir).code == 2);
  CHECK(run("synth --family banana", dir).code == 2);

  spit(dir / "small.json", kSmall);
  const auto cfg = "--config " + (dir / "small.json").string() + " --out " + (dir / "data").string();
  REQUIRE(run("synth " + cfg, dir).code == 0);
  r = run("learn-dict --k 5000 " + cfg, dir);
  CHECK(r.code == 3);
  CHECK(r.out.find("InsufficientData") != std::string::npos);
  spit(dir / "junk.cfmp", "CFMPjunk");
  REQUIRE(run("learn-dict " + cfg, dir).code == 0);
  REQUIRE(run("train " + cfg, dir).code == 0);
  CHECK(run("classify --features " + (dir / "junk.cfmp").string() + " " + cfg, dir).code == 3);
}

TEST_CASE("command-line flags override the config file") {
  const auto dir = scratch_dir("cli_precedence");
  spit(dir / "c.json", R"({"num_classes": 3, "height": 5, "width": 5, "train_per_class": 2,
    "test_per_class": 0, "background_images": 0})");
  const auto r = run("synth --config " + (dir / "c.json").string() + " --seed 9 --out " + (dir / "d").string(), dir);
  REQUIRE_MESSAGE(r.code == 0, r.out);
  const auto world = nlohmann::json::parse(slurp(dir / "d/world.json"));
  CHECK(world["config"]["seed"].get<int>() == 9);
  CHECK(world["config"]["num_classes"].get<int>() == 3);
}

}  // TEST_SUITE

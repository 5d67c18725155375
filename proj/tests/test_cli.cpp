/*
 * Copyright 2026 The lcda-cim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lcda/app.hpp"
#include "lcda/history.hpp"

namespace lcda {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lcda");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lcda_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    config_ = (dir_ / "offline.json").string();
    std::ofstream(config_) << R"({
      "space": {"backbone": {"num_conv_layers": 4, "pool_after": [1, 3], "fc_hidden_size": 256},
                "layers": {"channels": [16, 32, 64], "kernels": [3, 5]},
                "hardware": {"crossbar_sizes": [64, 128, 256], "adc_resolutions": [8],
                             "device_precisions": [2]}},
      "search": {"optimizer": "llm_full", "episodes": 20},
      "llm": {"backend": "offline"},
      "coldstart": {"seeds": 3, "max_episodes": 500}
    })";
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::string config_;
};

TEST_F(Cli, EvaluateIsDeterministic) {
  const std::vector<std::string> args = {
      "evaluate", "--rollout", "[[32,3],[32,3],[64,3],[64,3],[128,3],[128,3],[128,6,2]]"};
  const auto a = cli(args);
  const auto b = cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  for (const char* field : {"accuracy", "energy", "latency", "area", "reward"}) {
    EXPECT_NE(a.out.find(field), std::string::npos) << field;
  }
}

TEST_F(Cli, EvaluateRejectsUnparsableRollout) {
  EXPECT_EQ(cli({"evaluate", "--rollout", "[[1,2]]"}).code, kExitRuntime);
}

TEST_F(Cli, SearchWritesOutputs) {
  const auto r = cli({"search", "--config", config_, "--out", path("run")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"history.jsonl", "summary.json", "transcript.jsonl", "pareto.json",
                        "curve.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;
  }
  EXPECT_EQ(load_history(path("run/history.jsonl")).size(), 20u);
  const auto curve = json::parse(slurp(dir_ / "run" / "curve.json"));
  EXPECT_EQ(curve["best_so_far"].size(), 20u);
}

TEST_F(Cli, FlagsOverrideConfig) {
  const auto r = cli({"search", "--config", config_, "--out", path("run"), "--optimizer",
                      "random", "--episodes", "7", "--seed", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto h = load_history(path("run/history.jsonl"));
  ASSERT_EQ(h.size(), 7u);
  EXPECT_EQ(h[0].optimizer_tag, "random");
  EXPECT_FALSE(fs::exists(dir_ / "run" / "transcript.jsonl"));
}

TEST_F(Cli, SearchIsIdempotent) {
  for (const char* opt : {"llm_full", "evolutionary", "heuristic_oracle"}) {
    ASSERT_EQ(cli({"search", "--config", config_, "--optimizer", opt, "--out", path("a")}).code, 0);
    ASSERT_EQ(cli({"search", "--config", config_, "--optimizer", opt, "--out", path("b")}).code, 0);
    EXPECT_EQ(slurp(dir_ / "a" / "history.jsonl"), slurp(dir_ / "b" / "history.jsonl")) << opt;
    EXPECT_EQ(slurp(dir_ / "a" / "summary.json"), slurp(dir_ / "b" / "summary.json")) << opt;
  }
}

TEST_F(Cli, ResumeCompletesInterruptedRun) {
  ASSERT_EQ(cli({"search", "--config", config_, "--optimizer", "evolutionary", "--out",
                 path("full")}).code, 0);
  ASSERT_EQ(cli({"search", "--config", config_, "--optimizer", "evolutionary", "--episodes",
                 "8", "--out", path("part")}).code, 0);
  const auto r = cli({"search", "--config", config_, "--optimizer", "evolutionary", "--out",
                      path("part"), "--resume"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / "full" / "history.jsonl"), slurp(dir_ / "part" / "history.jsonl"));
}

TEST_F(Cli, ReplayReproducesHistory) {
  ASSERT_EQ(cli({"search", "--config", config_, "--out", path("rec")}).code, 0);
  const auto r = cli({"replay", "--config", config_, "--out", path("rep"), "--replay",
                      path("rec/transcript.jsonl"), "--expect", path("rec/history.jsonl")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(dir_ / "rec" / "history.jsonl"), slurp(dir_ / "rep" / "history.jsonl"));
}

TEST_F(Cli, ReplayDivergenceExitCode) {
  ASSERT_EQ(cli({"search", "--config", config_, "--out", path("rec")}).code, 0);
  const auto r = cli({"replay", "--config", config_, "--optimizer", "llm_naive", "--out",
                      path("rep"), "--replay", path("rec/transcript.jsonl")});
  EXPECT_EQ(r.code, kExitReplayDivergence);
  EXPECT_NE(r.err.find("episode 0"), std::string::npos);
  const auto longer = cli({"replay", "--config", config_, "--episodes", "25", "--out",
                           path("rep2"), "--replay", path("rec/transcript.jsonl")});
  EXPECT_EQ(longer.code, kExitReplayDivergence);
}

TEST_F(Cli, ParetoOfIncomparablePair) {
  EvalRecord a, b;
  a.rollout = b.rollout = {{{16, 3}}, {64, 8, 2}};
  a.accuracy = 0.9;
  a.cost.energy = 10;
  b.accuracy = 0.8;
  b.cost.energy = 5;
  b.episode = 1;
  {
    HistoryWriter w(path("two.jsonl"), false);
    w.append(a);
    w.append(b);
  }
  const auto r = cli({"pareto", "--history", path("two.jsonl"), "--out", path("p")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = json::parse(slurp(dir_ / "p" / "pareto.json"));
  EXPECT_EQ(j["indices"], json::array({0, 1}));
  EXPECT_EQ(j["records"].size(), 2u);
}

TEST_F(Cli, EnumerateAndColdStart) {
  auto r = cli({"enumerate", "--config", config_, "--out", path("e"), "--top", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto e = json::parse(slurp(dir_ / "e" / "enumerate.json"));
  EXPECT_EQ(e["space_size"], 3888);
  EXPECT_EQ(e["top"].size(), 3u);
  r = cli({"coldstart-bench", "--config", config_, "--out", path("c")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto c = json::parse(slurp(dir_ / "c" / "coldstart.json"));
  EXPECT_EQ(c["heuristic_episodes"].size(), 3u);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(cli({}).code, kExitConfig);
  EXPECT_EQ(cli({"search", "--optimizer", "annealing"}).code, kExitConfig);
  EXPECT_EQ(cli({"search", "--episodes", "0"}).code, kExitConfig);
  EXPECT_EQ(cli({"search", "--config", path("nope.json")}).code, kExitConfig);
  std::ofstream(path("broken.json")) << "{";
  EXPECT_EQ(cli({"search", "--config", path("broken.json")}).code, kExitConfig);
  std::ofstream(path("junk.jsonl")) << "{\n";
  EXPECT_EQ(cli({"pareto", "--history", path("junk.jsonl")}).code, kExitRuntime);
  EXPECT_EQ(cli({"search", "--config", config_, "--optimizer", "random", "--out", path("x"),
                 "--replay", path("x.jsonl")}).code,
            kExitConfig);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST_F(Cli, CredentialNeverReachesOutputs) {
  ::setenv("OPENAI_API_KEY", "sk-do-not-write-me", 1);
  const auto r = cli({"search", "--config", config_, "--out", path("run")});
  ::unsetenv("OPENAI_API_KEY");
  ASSERT_EQ(r.code, 0);
  for (const auto& entry : fs::recursive_directory_iterator(dir_ / "run")) {
    EXPECT_EQ(slurp(entry.path()).find("sk-do-not-write-me"), std::string::npos)
        << entry.path();
  }
}

}  // namespace
}  // namespace lcda

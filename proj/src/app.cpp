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
#include "lcda/app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lcda/history.hpp"
#include "lcda/prompt_engine.hpp"

namespace lcda {

namespace fs = std::filesystem;
using nlohmann::json;

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& config) {
  const Backbone& backbone = config.space.backbone;
  if (config.evaluator == EvaluatorKind::kSurrogate) {
    return std::make_unique<SurrogateEvaluator>(backbone, config.noise.sigma);
  }
  DatasetSplit data;
  if (config.trained.cifar_train_path.empty()) {
    SyntheticSpec spec = config.trained.data;
    if (spec.num_classes != backbone.num_classes ||
        spec.image_size != backbone.input_shape.height ||
        spec.image_size != backbone.input_shape.width || backbone.input_shape.channels != 3) {
      throw ConfigError("synthetic data shape does not match the backbone input and class count");
    }
    data = make_synthetic(spec);
  } else {
    data.train = load_cifar10_binary(config.trained.cifar_train_path,
                                     config.trained.cifar_max_records);
    data.test = load_cifar10_binary(config.trained.cifar_test_path,
                                    config.trained.cifar_max_records);
  }
  return std::make_unique<TrainedEvaluator>(backbone, std::move(data), config.noise,
                                            config.trained.train, config.trained.mc_samples);
}

std::unique_ptr<LlmClient> make_offline_llm(const DesignSpace& space, uint64_t seed) {
  auto calls = std::make_shared<int>(0);
  return std::make_unique<FunctionLlmClient>([space, seed, calls](const LlmRequest&) {
    auto rng = episode_rng(seed, (*calls)++, 7);
    return render_rollout(random_rollout(space, rng));
  });
}

namespace {

bool is_llm(OptimizerKind kind) {
  return kind == OptimizerKind::kLlmFull || kind == OptimizerKind::kLlmNaive;
}

std::unique_ptr<Optimizer> make_optimizer(const RunConfig& config, LlmClient* client) {
  const DesignSpace& space = config.space;
  switch (config.optimizer) {
    case OptimizerKind::kRandom: return std::make_unique<RandomOptimizer>(space, config.seed);
    case OptimizerKind::kEvolutionary:
      return std::make_unique<EvolutionaryOptimizer>(space, config.seed);
    case OptimizerKind::kHeuristicOracle:
      return std::make_unique<HeuristicOracleOptimizer>(space, config.seed);
    case OptimizerKind::kLlmFull:
    case OptimizerKind::kLlmNaive:
      return std::make_unique<LlmOptimizer>(
          space, *client,
          config.optimizer == OptimizerKind::kLlmFull ? PromptVariant::kFull : PromptVariant::kNaive,
          config.seed, config.llm.options);
  }
  throw ConfigError("no optimizer selected");
}

void write_reports(const RunConfig& config, const std::vector<EvalRecord>& history) {
  const fs::path out = config.output_dir;
  const CostMetric metric =
      config.reward == RewardKind::kAccuracyLatency ? CostMetric::kLatency : CostMetric::kEnergy;
  write_json((out / "summary.json").string(), summary_to_json(history));
  write_json((out / "pareto.json").string(), pareto_to_json(history, metric));
  write_json((out / "curve.json").string(), curve_to_json(history));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CostMetric parse_metric(const std::string& s) {
  if (s == "energy") return CostMetric::kEnergy;
  if (s == "latency") return CostMetric::kLatency;
  if (s == "area") return CostMetric::kArea;
  throw ConfigError("unknown metric \"" + s + "\"");
}

}  // namespace

std::vector<EvalRecord> run_configured_search(const RunConfig& config,
                                              const std::string& replay_transcript,
                                              bool resume) {
  config.check();
  fs::create_directories(config.output_dir);
  const fs::path out = config.output_dir;
  const std::string history_path = (out / "history.jsonl").string();

  std::unique_ptr<LlmClient> client;
  if (is_llm(config.optimizer)) {
    if (!replay_transcript.empty()) {
      client = std::make_unique<ReplayLlmClient>(load_transcript(replay_transcript));
    } else {
      if (resume) throw ConfigError("LLM searches cannot be resumed; replay the transcript instead");
      client = config.llm.backend == LlmBackend::kHttp
                   ? std::unique_ptr<LlmClient>(std::make_unique<HttpLlmClient>(config.llm.endpoint))
                   : make_offline_llm(config.space, config.seed);
      client->attach_sink(config.transcript_path.empty()
                              ? (out / "transcript.jsonl").string()
                              : config.transcript_path);
    }
  } else if (!replay_transcript.empty()) {
    throw ConfigError("--replay needs an LLM optimizer");
  }

  std::vector<EvalRecord> previous;
  if (resume) previous = load_history(history_path);
  for (const auto& r : previous) {
    if (r.optimizer_tag != optimizer_name(config.optimizer)) {
      throw ConfigError("history in " + history_path + " was produced by " + r.optimizer_tag);
    }
  }

  auto optimizer = make_optimizer(config, client.get());
  auto evaluator = make_evaluator(config);
  HistoryWriter writer(history_path, resume);
  auto history = run_search(config.search_setup(), *optimizer, *evaluator, &writer,
                            std::move(previous));
  write_reports(config, history);
  return history;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LLM-driven crossbar accelerator and network co-design search"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> episodes;
  std::string optimizer;
  std::string replay;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Search seed");
  };

  CLI::App* search = app.add_subcommand("search", "Run a search and write its history");
  common(search);
  search->add_option("--episodes", episodes, "Episode budget");
  search->add_option("--optimizer", optimizer,
                     "random | evolutionary | heuristic_oracle | llm_full | llm_naive");
  search->add_option("--replay", replay, "Serve LLM calls from this transcript");
  bool resume = false;
  search->add_flag("--resume", resume, "Continue the history found in the output directory");

  CLI::App* replay_cmd = app.add_subcommand("replay", "Re-run a recorded LLM search");
  common(replay_cmd);
  replay_cmd->add_option("--episodes", episodes, "Episode budget");
  replay_cmd->add_option("--optimizer", optimizer, "llm_full | llm_naive");
  replay_cmd->add_option("--replay", replay, "Recorded transcript")->required();
  std::string expect;
  replay_cmd->add_option("--expect", expect, "History file the replay must reproduce")
      ->check(CLI::ExistingFile);

  CLI::App* pareto = app.add_subcommand("pareto", "Export the Pareto front of a history");
  std::string history_path;
  std::string metric = "energy";
  pareto->add_option("--history", history_path, "history.jsonl")->required()->check(
      CLI::ExistingFile);
  pareto->add_option("--metric", metric, "energy | latency | area");
  pareto->add_option("--out", out_dir, "Output directory (default: print)");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score one rollout");
  common(evaluate);
  std::string rollout_text;
  evaluate->add_option("--rollout", rollout_text, "e.g. [[32,3],[32,3],...,[128,6,2]]")
      ->required();

  CLI::App* enumerate_cmd = app.add_subcommand("enumerate", "Exhaustively score a small space");
  common(enumerate_cmd);
  size_t top = 20;
  enumerate_cmd->add_option("--top", top, "Rows in the printed table");

  CLI::App* bench = app.add_subcommand("coldstart-bench",
                                       "Episodes-to-optimum of heuristic_oracle vs random");
  common(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) {
      config = load_config(config_path);
    } else {
      config.space.hardware.area_budget =
          default_area_budget(config.space, config.unit_costs, config.weight_bits);
    }
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed) config.seed = *seed;
    if (episodes) config.episodes = *episodes;
    if (!optimizer.empty()) config.optimizer = parse_optimizer(optimizer);
    config.check();

    if (search->parsed() || replay_cmd->parsed()) {
      if (replay_cmd->parsed() && !is_llm(config.optimizer)) {
        throw ConfigError("replay needs an LLM optimizer");
      }
      const auto history = run_configured_search(config, replay, resume);
      const auto best = history[best_index(history)];
      out << "episodes " << history.size() << ", best reward " << best.reward << " at episode "
          << best.episode << ": " << render_rollout(best.rollout) << "\n";
      out << "outputs in " << config.output_dir << "\n";
      if (replay_cmd->parsed() && !expect.empty()) {
        const std::string produced =
            read_file((fs::path(config.output_dir) / "history.jsonl").string());
        if (produced != read_file(expect)) {
          err << "replayed history differs from " << expect << "\n";
          return kExitReplayDivergence;
        }
        out << "history matches " << expect << "\n";
      }
      return kExitOk;
    }

    if (pareto->parsed()) {
      const auto history = load_history(history_path);
      const json j = pareto_to_json(history, parse_metric(metric));
      if (out_dir.empty()) {
        out << j.dump(2) << "\n";
      } else {
        fs::create_directories(out_dir);
        write_json((fs::path(out_dir) / "pareto.json").string(), j);
        out << j["indices"].size() << " designs on the front\n";
      }
      return kExitOk;
    }

    if (evaluate->parsed()) {
      const ParsedResponse parsed = parse_response(rollout_text, config.space);
      auto evaluator = make_evaluator(config);
      EvalRecord rec = evaluate_design(parsed.rollout, config.search_setup(), *evaluator);
      if (parsed.hardware_defaulted) rec.flags.insert(rec.flags.begin(), "hardware_defaulted");
      out << "rollout   " << render_rollout(rec.rollout) << "\n"
          << "accuracy  " << rec.accuracy << "\n"
          << "energy    " << rec.cost.energy << " pJ\n"
          << "latency   " << rec.cost.latency << " ns\n"
          << "area      " << rec.cost.area << " um^2 (budget "
          << config.space.hardware.area_budget << ")\n"
          << "valid     " << (rec.cost.valid ? "yes" : "no") << "\n"
          << "reward    " << rec.reward << "\n";
      for (const auto& f : rec.flags) out << "flag      " << f << "\n";
      return kExitOk;
    }

    if (enumerate_cmd->parsed()) {
      if (config.evaluator != EvaluatorKind::kSurrogate) {
        throw ConfigError("enumerate runs with the surrogate evaluator only");
      }
      const SearchSetup setup = config.search_setup();
      auto evaluator = make_evaluator(config);
      std::vector<EvalRecord> all;
      for (const auto& r : enumerate(config.space, config.coldstart.enumeration_cap)) {
        all.push_back(evaluate_design(r, setup, *evaluator, "enumerate"));
      }
      std::vector<size_t> order(all.size());
      std::iota(order.begin(), order.end(), size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](size_t a, size_t b) { return all[a].reward > all[b].reward; });
      json table = json::array();
      for (size_t i = 0; i < std::min(top, order.size()); ++i) {
        const auto& r = all[order[i]];
        table.push_back({{"rank", i + 1},
                         {"rollout", render_rollout(r.rollout)},
                         {"accuracy", r.accuracy},
                         {"energy", r.cost.energy},
                         {"latency", r.cost.latency},
                         {"area", r.cost.area},
                         {"reward", r.reward}});
        out << i + 1 << "\t" << r.reward << "\t" << render_rollout(r.rollout) << "\n";
      }
      fs::create_directories(config.output_dir);
      write_json((fs::path(config.output_dir) / "enumerate.json").string(),
                 {{"space_size", all.size()}, {"optimum", all[order.front()].reward},
                  {"top", table}});
      return kExitOk;
    }

    if (bench->parsed()) {
      const SearchSetup setup = config.search_setup();
      auto evaluator = make_evaluator(config);
      const ColdStartResult r = coldstart_benchmark(
          setup, *evaluator, config.coldstart.seeds, config.coldstart.max_episodes,
          config.coldstart.tolerance, config.coldstart.enumeration_cap);
      const json j = {{"space_size", r.space_size},
                      {"optimum", r.optimum},
                      {"threshold", r.threshold},
                      {"heuristic_episodes", r.heuristic_episodes},
                      {"random_episodes", r.random_episodes},
                      {"heuristic_median", r.heuristic_median},
                      {"random_median", r.random_median},
                      {"speedup", r.random_median / r.heuristic_median}};
      fs::create_directories(config.output_dir);
      write_json((fs::path(config.output_dir) / "coldstart.json").string(), j);
      out << "space " << r.space_size << " designs, optimum " << r.optimum << "\n"
          << "median episodes: heuristic_oracle " << r.heuristic_median << ", random "
          << r.random_median << " (x" << r.random_median / r.heuristic_median << ")\n";
      return kExitOk;
    }
  } catch (const ReplayDivergence& e) {
    err << "replay divergence: " << e.what() << "\n";
    return kExitReplayDivergence;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace lcda

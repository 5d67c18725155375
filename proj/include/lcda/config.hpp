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
#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>

#include "lcda/search.hpp"

namespace lcda {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OptimizerKind { kRandom, kEvolutionary, kHeuristicOracle, kLlmFull, kLlmNaive };
enum class EvaluatorKind { kSurrogate, kTrained };
/// kHttp talks to the configured endpoint; kOffline is a seeded stand-in
/// model that answers with random rollouts, for dry runs without a network.
enum class LlmBackend { kHttp, kOffline };

const char* optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

struct LlmSettings {
  LlmBackend backend = LlmBackend::kHttp;
  EndpointConfig endpoint;
  LlmOptions options;

  bool operator==(const LlmSettings&) const = default;
};

struct TrainedSettings {
  SyntheticSpec data;
  std::string cifar_train_path;  // empty: use the synthetic task
  std::string cifar_test_path;
  size_t cifar_max_records = 0;
  TrainOptions train;
  int mc_samples = 10;

  bool operator==(const TrainedSettings&) const = default;
};

struct ColdStartSettings {
  int seeds = 20;
  int max_episodes = 1000;
  double tolerance = 0.02;
  uint64_t enumeration_cap = 5000;

  bool operator==(const ColdStartSettings&) const = default;
};

struct RunConfig {
  DesignSpace space = default_design_space();
  UnitCosts unit_costs;
  int weight_bits = 8;
  NoiseModel noise;
  RewardKind reward = RewardKind::kAccuracyEnergy;
  double energy_norm = 8e7;
  double fps_norm = 1600.0;
  OptimizerKind optimizer = OptimizerKind::kLlmFull;
  EvaluatorKind evaluator = EvaluatorKind::kSurrogate;
  int episodes = 20;
  uint64_t seed = 0;
  LlmSettings llm;
  TrainedSettings trained;
  ColdStartSettings coldstart;
  std::string transcript_path;  // empty: <output_dir>/transcript.jsonl
  std::string output_dir = "out";

  bool operator==(const RunConfig&) const = default;

  /// Throws ConfigError on any inconsistency.
  void check() const;
  SearchSetup search_setup() const;
};

/// Missing keys take the defaults above. A zero or absent area budget is
/// replaced by default_area_budget() for the configured space.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

RunConfig load_config(const std::string& path);
std::string render_config(const RunConfig& config);

}  // namespace lcda

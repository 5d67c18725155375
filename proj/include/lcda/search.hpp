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

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "lcda/cim_cost.hpp"
#include "lcda/design_space.hpp"
#include "lcda/dnn_eval.hpp"
#include "lcda/llm_client.hpp"
#include "lcda/surrogate.hpp"

namespace lcda {

// ---------------------------------------------------------------- rewards

enum class RewardKind { kAccuracyEnergy, kAccuracyLatency, kCustom };

struct RewardSpec {
  RewardKind kind = RewardKind::kAccuracyEnergy;
  double energy_norm = 8e7;  // pJ
  double fps_norm = 1600.0;  // frames per second
  /// Only consulted for kCustom.
  std::function<double(double accuracy, const CostReport& cost)> custom;

  void check() const;
};

const char* reward_kind_name(RewardKind kind);

/// accuracy - sqrt(energy / energy_norm)
double reward_ae(double accuracy, double energy_pj, const RewardSpec& spec);

/// accuracy + fps / fps_norm, with fps = 1e9 / latency_ns. Throws
/// std::invalid_argument for latency <= 0.
double reward_al(double accuracy, double latency_ns, const RewardSpec& spec);

/// -1 for a design over its area budget, otherwise the configured reward.
double score(double accuracy, const CostReport& cost, const RewardSpec& spec);

// ---------------------------------------------------------------- records

struct EvalRecord {
  int episode = 0;
  Rollout rollout;
  double accuracy = 0.0;
  CostReport cost;
  double reward = 0.0;
  std::string optimizer_tag;
  bool fallback = false;
  std::vector<std::string> flags;
};

/// Value shown to the optimizer for a record: -1 for invalid designs,
/// otherwise the reward clipped to [-0.9999, 2].
double normalized_performance(const EvalRecord& record);

/// Running maximum of the reward after each episode.
std::vector<double> best_so_far(const std::vector<EvalRecord>& history);

/// Index of the highest reward, earliest episode on ties. Throws on empty history.
size_t best_index(const std::vector<EvalRecord>& history);

enum class CostMetric { kEnergy, kLatency, kArea };

const char* cost_metric_name(CostMetric metric);
double metric_value(const CostReport& cost, CostMetric metric);

/// Indices (in history order) of records not dominated under (maximize
/// accuracy, minimize metric). Equal points are all kept.
std::vector<size_t> pareto_front(const std::vector<EvalRecord>& history, CostMetric metric);

// ---------------------------------------------------------------- evaluation

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual double accuracy(const Rollout& rollout, uint64_t seed) = 0;
  virtual std::string name() const = 0;
};

class SurrogateEvaluator : public Evaluator {
 public:
  SurrogateEvaluator(Backbone backbone, double sigma, SurrogateCoefficients coeffs = {})
      : backbone_(std::move(backbone)), sigma_(sigma), coeffs_(coeffs) {}

  double accuracy(const Rollout& rollout, uint64_t) override {
    return surrogate_accuracy(rollout, backbone_, sigma_, coeffs_);
  }
  std::string name() const override { return "surrogate"; }

 private:
  Backbone backbone_;
  double sigma_;
  SurrogateCoefficients coeffs_;
};

/// Builds, noise-injection trains and Monte Carlo evaluates each design.
class TrainedEvaluator : public Evaluator {
 public:
  TrainedEvaluator(Backbone backbone, DatasetSplit data, NoiseModel noise, TrainOptions train,
                   int mc_samples);

  double accuracy(const Rollout& rollout, uint64_t seed) override;
  EvalResult evaluate(const Rollout& rollout, uint64_t seed);
  std::string name() const override { return "trained"; }

 private:
  Backbone backbone_;
  DatasetSplit data_;
  NoiseModel noise_;
  TrainOptions train_;
  int mc_samples_;
};

struct SearchSetup {
  DesignSpace space;
  UnitCosts unit_costs;
  int weight_bits = 8;
  RewardSpec reward;
  int episodes = 20;
  uint64_t seed = 0;
};

CostReport design_cost(const Rollout& rollout, const SearchSetup& setup);

/// Scores one rollout outside of a search (episode -1).
EvalRecord evaluate_design(const Rollout& rollout, const SearchSetup& setup,
                           Evaluator& evaluator, const std::string& tag = "manual");

// ---------------------------------------------------------------- optimizers

struct Proposal {
  Rollout rollout;
  bool fallback = false;
  std::vector<std::string> flags;
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual std::string tag() const = 0;
  /// Must be deterministic given the constructor seed, the history and the episode.
  virtual Proposal propose(const std::vector<EvalRecord>& history, int episode) = 0;
};

/// Per-episode generator derived from (seed, episode, stream).
std::mt19937_64 episode_rng(uint64_t seed, int episode, uint64_t stream = 0);

Rollout random_rollout(const DesignSpace& space, std::mt19937_64& rng);

/// Number of independently mutable slots: two per layer plus three hardware.
size_t slot_count(const DesignSpace& space);
/// All rollouts differing from `base` in exactly one slot.
std::vector<Rollout> one_slot_neighbours(const Rollout& base, const DesignSpace& space);
/// Re-draws one uniformly chosen slot, to a different value when it has one.
Rollout mutate_one_slot(const Rollout& base, const DesignSpace& space, std::mt19937_64& rng);

class RandomOptimizer : public Optimizer {
 public:
  RandomOptimizer(DesignSpace space, uint64_t seed) : space_(std::move(space)), seed_(seed) {}
  std::string tag() const override { return "random"; }
  Proposal propose(const std::vector<EvalRecord>& history, int episode) override;

 private:
  DesignSpace space_;
  uint64_t seed_;
};

/// Tournament over the top-k records by reward, then one-slot mutation.
class EvolutionaryOptimizer : public Optimizer {
 public:
  EvolutionaryOptimizer(DesignSpace space, uint64_t seed, size_t top_k = 8,
                        size_t tournament = 3)
      : space_(std::move(space)), seed_(seed), top_k_(top_k), tournament_(tournament) {}
  std::string tag() const override { return "evolutionary"; }
  Proposal propose(const std::vector<EvalRecord>& history, int episode) override;

 private:
  DesignSpace space_;
  uint64_t seed_;
  size_t top_k_;
  size_t tournament_;
};

/// Encodes the design sense attributed to the LLM: only proposes rollouts
/// without heuristic lint flags and hill-climbs on reward from the best one.
/// When no channel option fits the 4x-growth rule after the input layer
/// (e.g. a 3-channel input and a 16-channel minimum), that one flag is waived.
class HeuristicOracleOptimizer : public Optimizer {
 public:
  HeuristicOracleOptimizer(DesignSpace space, uint64_t seed);
  std::string tag() const override { return "heuristic_oracle"; }
  Proposal propose(const std::vector<EvalRecord>& history, int episode) override;

  bool acceptable(const Rollout& rollout) const;
  Rollout sample_acceptable(std::mt19937_64& rng) const;

 private:
  DesignSpace space_;
  uint64_t seed_;
  bool stem_waived_;
};

enum class PromptVariant { kFull, kNaive };

struct LlmOptions {
  std::string model_id = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 1024;
  size_t history_cap = 50;
  int max_failures = 3;

  bool operator==(const LlmOptions&) const = default;
};

/// Prompts an LLM with the search history each episode. Unusable replies are
/// re-prompted with a correction; after max_failures the episode falls back to
/// a uniformly random rollout.
class LlmOptimizer : public Optimizer {
 public:
  LlmOptimizer(DesignSpace space, LlmClient& client, PromptVariant variant, uint64_t seed,
               LlmOptions options = {});
  std::string tag() const override;
  Proposal propose(const std::vector<EvalRecord>& history, int episode) override;

 private:
  DesignSpace space_;
  LlmClient& client_;
  PromptVariant variant_;
  uint64_t seed_;
  LlmOptions options_;
};

// ---------------------------------------------------------------- loop

class HistorySink {
 public:
  virtual ~HistorySink() = default;
  virtual void append(const EvalRecord& record) = 0;
};

class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs setup.episodes episodes of propose -> evaluate accuracy -> evaluate cost
/// -> score -> append. Records in `resume` count as already completed
/// episodes; each new record is handed to `sink` as soon as it exists.
std::vector<EvalRecord> run_search(const SearchSetup& setup, Optimizer& optimizer,
                                   Evaluator& evaluator, HistorySink* sink = nullptr,
                                   std::vector<EvalRecord> resume = {});

// ---------------------------------------------------------------- cold start

struct ColdStartResult {
  double optimum = 0.0;
  double threshold = 0.0;
  uint64_t space_size = 0;
  std::vector<int> heuristic_episodes;  // per seed, 1-based
  std::vector<int> random_episodes;
  double heuristic_median = 0.0;
  double random_median = 0.0;
};

double median(std::vector<int> values);

/// Episodes each optimizer needs to first reach optimum - tolerance * |optimum|
/// on an exhaustively enumerated space. Runs that never get there within
/// `max_episodes` report max_episodes.
ColdStartResult coldstart_benchmark(const SearchSetup& setup, Evaluator& evaluator,
                                    int num_seeds, int max_episodes, double tolerance = 0.02,
                                    uint64_t enumeration_cap = 5000);

}  // namespace lcda

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
#include "lcda/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "lcda/prompt_engine.hpp"

namespace lcda {

// ---------------------------------------------------------------- rewards

void RewardSpec::check() const {
  if (!(energy_norm > 0.0) || !(fps_norm > 0.0)) {
    throw std::invalid_argument("reward spec: normalizers must be > 0");
  }
  if (kind == RewardKind::kCustom && !custom) {
    throw std::invalid_argument("reward spec: custom kind needs a reward function");
  }
}

const char* reward_kind_name(RewardKind kind) {
  switch (kind) {
    case RewardKind::kAccuracyEnergy:
      return "accuracy_energy";
    case RewardKind::kAccuracyLatency:
      return "accuracy_latency";
    case RewardKind::kCustom:
      return "custom";
  }
  return "custom";
}

double reward_ae(double accuracy, double energy_pj, const RewardSpec& spec) {
  if (energy_pj < 0.0) throw std::invalid_argument("reward_ae: negative energy");
  return accuracy - std::sqrt(energy_pj / spec.energy_norm);
}

double reward_al(double accuracy, double latency_ns, const RewardSpec& spec) {
  if (!(latency_ns > 0.0)) throw std::invalid_argument("reward_al: latency must be > 0");
  const double fps = 1e9 / latency_ns;
  return accuracy + fps / spec.fps_norm;
}

double score(double accuracy, const CostReport& cost, const RewardSpec& spec) {
  if (!cost.valid) return -1.0;
  switch (spec.kind) {
    case RewardKind::kAccuracyEnergy:
      return reward_ae(accuracy, cost.energy, spec);
    case RewardKind::kAccuracyLatency:
      return reward_al(accuracy, cost.latency, spec);
    case RewardKind::kCustom:
      return spec.custom(accuracy, cost);
  }
  return -1.0;
}

// ---------------------------------------------------------------- records

double normalized_performance(const EvalRecord& record) {
  if (!record.cost.valid) return -1.0;
  return std::clamp(record.reward, -0.9999, 2.0);
}

std::vector<double> best_so_far(const std::vector<EvalRecord>& history) {
  std::vector<double> curve;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : history) {
    best = std::max(best, r.reward);
    curve.push_back(best);
  }
  return curve;
}

size_t best_index(const std::vector<EvalRecord>& history) {
  if (history.empty()) throw std::invalid_argument("best_index: empty history");
  size_t best = 0;
  for (size_t i = 1; i < history.size(); ++i) {
    if (history[i].reward > history[best].reward) best = i;
  }
  return best;
}

const char* cost_metric_name(CostMetric metric) {
  switch (metric) {
    case CostMetric::kEnergy:
      return "energy";
    case CostMetric::kLatency:
      return "latency";
    case CostMetric::kArea:
      return "area";
  }
  return "energy";
}

double metric_value(const CostReport& cost, CostMetric metric) {
  switch (metric) {
    case CostMetric::kEnergy:
      return cost.energy;
    case CostMetric::kLatency:
      return cost.latency;
    case CostMetric::kArea:
      return cost.area;
  }
  return cost.energy;
}

std::vector<size_t> pareto_front(const std::vector<EvalRecord>& history, CostMetric metric) {
  std::vector<size_t> order(history.size());
  std::iota(order.begin(), order.end(), 0);
  // Cheapest first; within equal cost, most accurate first.
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const double ma = metric_value(history[a].cost, metric);
    const double mb = metric_value(history[b].cost, metric);
    if (ma != mb) return ma < mb;
    return history[a].accuracy > history[b].accuracy;
  });
  std::vector<size_t> front;
  double best_cheaper = -std::numeric_limits<double>::infinity();
  size_t i = 0;
  while (i < order.size()) {
    const double m = metric_value(history[order[i]].cost, metric);
    const double group_best = history[order[i]].accuracy;
    size_t j = i;
    for (; j < order.size() && metric_value(history[order[j]].cost, metric) == m; ++j) {
      // A record survives only if nothing cheaper is at least as accurate and
      // nothing equally cheap is more accurate.
      if (history[order[j]].accuracy == group_best && group_best > best_cheaper) {
        front.push_back(order[j]);
      }
    }
    best_cheaper = std::max(best_cheaper, group_best);
    i = j;
  }
  std::sort(front.begin(), front.end());
  return front;
}

// ---------------------------------------------------------------- evaluation

TrainedEvaluator::TrainedEvaluator(Backbone backbone, DatasetSplit data, NoiseModel noise,
                                   TrainOptions train, int mc_samples)
    : backbone_(std::move(backbone)),
      data_(std::move(data)),
      noise_(noise),
      train_(train),
      mc_samples_(mc_samples) {}

EvalResult TrainedEvaluator::evaluate(const Rollout& rollout, uint64_t seed) {
  TrainOptions opts = train_;
  opts.seed = seed;
  Network net = build_network(rollout, backbone_, seed);
  net = train_noise_injection(std::move(net), data_.train, noise_, opts);
  return mc_accuracy(net, data_.test, noise_, mc_samples_, seed + 1);
}

double TrainedEvaluator::accuracy(const Rollout& rollout, uint64_t seed) {
  return evaluate(rollout, seed).mc_mean_accuracy;
}

CostReport design_cost(const Rollout& rollout, const SearchSetup& setup) {
  const auto hw = make_hardware_config(rollout.hardware, setup.unit_costs, setup.weight_bits,
                                       setup.space.hardware.area_budget);
  return cost(network_shapes(rollout, setup.space.backbone), hw);
}

namespace {

std::vector<std::string> lint_flags(const Rollout& rollout, const Backbone& backbone) {
  std::vector<std::string> out;
  for (const auto& f : heuristic_lints(rollout, backbone)) {
    out.push_back(std::string(lint_name(f.kind)) + "@" + std::to_string(f.layer));
  }
  return out;
}

}  // namespace

EvalRecord evaluate_design(const Rollout& rollout, const SearchSetup& setup,
                           Evaluator& evaluator, const std::string& tag) {
  const auto check = validate(rollout, setup.space);
  if (!check.ok()) throw std::invalid_argument("invalid rollout: " + check.describe());
  EvalRecord r;
  r.episode = -1;
  r.rollout = rollout;
  r.accuracy = evaluator.accuracy(rollout, setup.seed);
  r.cost = design_cost(rollout, setup);
  r.reward = score(r.accuracy, r.cost, setup.reward);
  r.optimizer_tag = tag;
  r.flags = lint_flags(rollout, setup.space.backbone);
  return r;
}

// ---------------------------------------------------------------- optimizers

std::mt19937_64 episode_rng(uint64_t seed, int episode, uint64_t stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(episode), static_cast<uint32_t>(stream)};
  return std::mt19937_64(seq);
}

namespace {

template <typename T>
const T& pick(const std::vector<T>& options, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> d(0, options.size() - 1);
  return options[d(rng)];
}

// Slot i < 2L addresses layer i/2 (channels when even, kernel when odd);
// the last three are crossbar, ADC and precision.
int& slot_ref(Rollout& r, size_t slot) {
  const size_t layers = r.layers.size();
  if (slot < 2 * layers) {
    auto& l = r.layers[slot / 2];
    return slot % 2 == 0 ? l.out_channels : l.kernel;
  }
  switch (slot - 2 * layers) {
    case 0:
      return r.hardware.crossbar_size;
    case 1:
      return r.hardware.adc_resolution;
    default:
      return r.hardware.device_precision;
  }
}

const std::vector<int>& slot_options(const DesignSpace& space, size_t slot) {
  const size_t layers = space.layers.size();
  if (slot < 2 * layers) {
    const auto& l = space.layers[slot / 2];
    return slot % 2 == 0 ? l.channel_options : l.kernel_options;
  }
  switch (slot - 2 * layers) {
    case 0:
      return space.hardware.crossbar_sizes;
    case 1:
      return space.hardware.adc_resolutions;
    default:
      return space.hardware.device_precisions;
  }
}

}  // namespace

Rollout random_rollout(const DesignSpace& space, std::mt19937_64& rng) {
  Rollout r;
  for (const auto& l : space.layers) {
    const int c = pick(l.channel_options, rng);
    const int k = pick(l.kernel_options, rng);
    r.layers.push_back({c, k});
  }
  r.hardware.crossbar_size = pick(space.hardware.crossbar_sizes, rng);
  r.hardware.adc_resolution = pick(space.hardware.adc_resolutions, rng);
  r.hardware.device_precision = pick(space.hardware.device_precisions, rng);
  return r;
}

size_t slot_count(const DesignSpace& space) { return 2 * space.layers.size() + 3; }

std::vector<Rollout> one_slot_neighbours(const Rollout& base, const DesignSpace& space) {
  std::vector<Rollout> out;
  for (size_t s = 0; s < slot_count(space); ++s) {
    for (int v : slot_options(space, s)) {
      Rollout n = base;
      int& ref = slot_ref(n, s);
      if (ref == v) continue;
      ref = v;
      out.push_back(std::move(n));
    }
  }
  return out;
}

Rollout mutate_one_slot(const Rollout& base, const DesignSpace& space, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> slot_dist(0, slot_count(space) - 1);
  const size_t slot = slot_dist(rng);
  const auto& options = slot_options(space, slot);
  Rollout out = base;
  int& ref = slot_ref(out, slot);
  std::vector<int> others;
  for (int v : options) {
    if (v != ref) others.push_back(v);
  }
  if (!others.empty()) ref = pick(others, rng);
  return out;
}

Proposal RandomOptimizer::propose(const std::vector<EvalRecord>&, int episode) {
  auto rng = episode_rng(seed_, episode);
  return {random_rollout(space_, rng), false, {}};
}

Proposal EvolutionaryOptimizer::propose(const std::vector<EvalRecord>& history, int episode) {
  auto rng = episode_rng(seed_, episode);
  if (history.empty()) return {random_rollout(space_, rng), false, {}};
  std::vector<size_t> ranked(history.size());
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](size_t a, size_t b) { return history[a].reward > history[b].reward; });
  ranked.resize(std::min(ranked.size(), top_k_));
  size_t winner = pick(ranked, rng);
  for (size_t t = 1; t < tournament_; ++t) {
    const size_t challenger = pick(ranked, rng);
    if (history[challenger].reward > history[winner].reward ||
        (history[challenger].reward == history[winner].reward && challenger < winner)) {
      winner = challenger;
    }
  }
  return {mutate_one_slot(history[winner].rollout, space_, rng), false, {}};
}

HeuristicOracleOptimizer::HeuristicOracleOptimizer(DesignSpace space, uint64_t seed)
    : space_(std::move(space)), seed_(seed) {
  const int in = space_.backbone.input_shape.channels;
  const auto& first = space_.layers.at(0).channel_options;
  stem_waived_ = std::none_of(first.begin(), first.end(),
                              [in](int c) { return c >= in && c <= 4 * in; });
}

bool HeuristicOracleOptimizer::acceptable(const Rollout& rollout) const {
  for (const auto& f : heuristic_lints(rollout, space_.backbone)) {
    if (stem_waived_ && f.kind == LintKind::kChannelExplosion && f.layer == 0) continue;
    return false;
  }
  return true;
}

Rollout HeuristicOracleOptimizer::sample_acceptable(std::mt19937_64& rng) const {
  // Layer-by-layer construction restricted to options the lints accept given
  // the previous layer; restart on dead ends.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Rollout r;
    int in = space_.backbone.input_shape.channels;
    int prev_kernel = 0;
    bool dead_end = false;
    for (size_t i = 0; i < space_.layers.size() && !dead_end; ++i) {
      const auto& choice = space_.layers[i];
      std::vector<int> channels;
      for (int c : choice.channel_options) {
        const bool grows_ok = c <= 4 * in || (i == 0 && stem_waived_);
        if (c >= in && grows_ok) channels.push_back(c);
      }
      auto [h, w] = space_.backbone.spatial_before(static_cast<int>(i));
      std::vector<int> kernels;
      for (int k : choice.kernel_options) {
        const bool fits = k <= 2 * std::min(h, w) - 1;
        const bool smooth = i == 0 || std::abs(k - prev_kernel) < 6;
        if (fits && smooth) kernels.push_back(k);
      }
      if (channels.empty() || kernels.empty()) {
        dead_end = true;
        break;
      }
      const int c = pick(channels, rng);
      const int k = pick(kernels, rng);
      r.layers.push_back({c, k});
      in = c;
      prev_kernel = k;
    }
    if (dead_end) continue;
    r.hardware.crossbar_size = pick(space_.hardware.crossbar_sizes, rng);
    r.hardware.adc_resolution = pick(space_.hardware.adc_resolutions, rng);
    r.hardware.device_precision = pick(space_.hardware.device_precisions, rng);
    return r;
  }
  throw SearchFailure("heuristic oracle: no rollout in the space passes the design lints");
}

Proposal HeuristicOracleOptimizer::propose(const std::vector<EvalRecord>& history, int episode) {
  auto rng = episode_rng(seed_, episode);
  std::set<Rollout> seen;
  for (const auto& r : history) seen.insert(r.rollout);

  std::vector<size_t> ranked(history.size());
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](size_t a, size_t b) { return history[a].reward > history[b].reward; });
  for (size_t idx : ranked) {
    const auto& base = history[idx].rollout;
    if (!acceptable(base)) continue;
    std::vector<Rollout> fresh;
    for (auto& n : one_slot_neighbours(base, space_)) {
      if (!seen.count(n) && acceptable(n)) fresh.push_back(std::move(n));
    }
    if (!fresh.empty()) return {pick(fresh, rng), false, {}};
  }
  Rollout candidate = sample_acceptable(rng);
  for (int tries = 0; tries < 256 && seen.count(candidate); ++tries) {
    candidate = sample_acceptable(rng);
  }
  return {candidate, false, {}};
}

LlmOptimizer::LlmOptimizer(DesignSpace space, LlmClient& client, PromptVariant variant,
                           uint64_t seed, LlmOptions options)
    : space_(std::move(space)),
      client_(client),
      variant_(variant),
      seed_(seed),
      options_(std::move(options)) {}

std::string LlmOptimizer::tag() const {
  return variant_ == PromptVariant::kFull ? "llm_full" : "llm_naive";
}

Proposal LlmOptimizer::propose(const std::vector<EvalRecord>& history, int episode) {
  std::vector<Rollout> designs;
  std::vector<double> perf;
  for (const auto& r : history) {
    designs.push_back(r.rollout);
    perf.push_back(normalized_performance(r));
  }
  const auto ctx =
      make_prompt_context(space_, std::move(designs), std::move(perf), options_.history_cap);
  const PromptPair prompt =
      variant_ == PromptVariant::kFull ? build_prompt(ctx) : build_naive_prompt(ctx);

  std::string last_error;
  for (int attempt = 0; attempt < options_.max_failures; ++attempt) {
    LlmRequest req;
    req.model_id = options_.model_id;
    req.temperature = options_.temperature;
    req.max_tokens = options_.max_tokens;
    std::string user = prompt.user_text;
    if (attempt > 0) {
      user += "\n\n";
      user += prompt_text::kCorrection;
      user += last_error;
      user += ". Please respond with only the rollout list in the required format.";
    }
    req.messages = {{Role::kSystem, prompt.system_text}, {Role::kUser, std::move(user)}};
    const std::string reply = client_.complete(req);
    try {
      ParsedResponse parsed = parse_response(reply, space_);
      Proposal p{std::move(parsed.rollout), false, {}};
      if (parsed.hardware_defaulted) p.flags.push_back("hardware_defaulted");
      if (attempt > 0) p.flags.push_back("reprompted:" + std::to_string(attempt));
      return p;
    } catch (const ParseError& e) {
      last_error = e.what();
    }
  }
  auto rng = episode_rng(seed_, episode, 1);
  return {random_rollout(space_, rng), true, {"llm_fallback"}};
}

// ---------------------------------------------------------------- loop

namespace {

using StopFn = std::function<bool(const EvalRecord&)>;

std::vector<EvalRecord> search_loop(const SearchSetup& setup, Optimizer& optimizer,
                                    Evaluator& evaluator, HistorySink* sink,
                                    std::vector<EvalRecord> history, const StopFn& stop) {
  struct Cached {
    double accuracy;
    CostReport cost;
  };
  std::map<Rollout, Cached> cache;
  for (const auto& r : history) cache.emplace(r.rollout, Cached{r.accuracy, r.cost});

  for (int ep = static_cast<int>(history.size()); ep < setup.episodes; ++ep) {
    Proposal p;
    try {
      p = optimizer.propose(history, ep);
    } catch (const ReplayDivergence& e) {
      throw ReplayDivergence(e.call_index(), ep,
                             std::string(e.what()) + " (episode " + std::to_string(ep) + ")");
    }
    const auto check = validate(p.rollout, setup.space);
    if (!check.ok()) {
      throw SearchFailure(optimizer.tag() + " proposed an invalid rollout at episode " +
                          std::to_string(ep) + ": " + check.describe());
    }
    auto it = cache.find(p.rollout);
    if (it == cache.end()) {
      Cached c{evaluator.accuracy(p.rollout, setup.seed), design_cost(p.rollout, setup)};
      it = cache.emplace(p.rollout, std::move(c)).first;
    }
    EvalRecord rec;
    rec.episode = ep;
    rec.rollout = p.rollout;
    rec.accuracy = it->second.accuracy;
    rec.cost = it->second.cost;
    rec.reward = score(rec.accuracy, rec.cost, setup.reward);
    rec.optimizer_tag = optimizer.tag();
    rec.fallback = p.fallback;
    rec.flags = std::move(p.flags);
    for (auto& f : lint_flags(rec.rollout, setup.space.backbone)) rec.flags.push_back(std::move(f));
    history.push_back(std::move(rec));
    if (sink) sink->append(history.back());
    if (stop && stop(history.back())) break;
  }
  return history;
}

}  // namespace

std::vector<EvalRecord> run_search(const SearchSetup& setup, Optimizer& optimizer,
                                   Evaluator& evaluator, HistorySink* sink,
                                   std::vector<EvalRecord> resume) {
  if (setup.episodes < 1) throw std::invalid_argument("run_search: episodes must be >= 1");
  setup.space.check();
  setup.reward.check();
  if (static_cast<int>(resume.size()) > setup.episodes) {
    throw std::invalid_argument("run_search: resumed history is longer than the episode budget");
  }
  return search_loop(setup, optimizer, evaluator, sink, std::move(resume), nullptr);
}

// ---------------------------------------------------------------- cold start

double median(std::vector<int> values) {
  if (values.empty()) throw std::invalid_argument("median of nothing");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

ColdStartResult coldstart_benchmark(const SearchSetup& setup, Evaluator& evaluator,
                                    int num_seeds, int max_episodes, double tolerance,
                                    uint64_t enumeration_cap) {
  setup.space.check();
  if (num_seeds < 1 || max_episodes < 1) {
    throw std::invalid_argument("coldstart: seeds and episode budget must be >= 1");
  }
  ColdStartResult res;
  RolloutEnumerator it(setup.space, enumeration_cap);
  res.space_size = it.size();
  double best = -std::numeric_limits<double>::infinity();
  while (auto r = it.next()) {
    const double acc = evaluator.accuracy(*r, setup.seed);
    best = std::max(best, score(acc, design_cost(*r, setup), setup.reward));
  }
  res.optimum = best;
  res.threshold = best - tolerance * std::abs(best);

  SearchSetup run = setup;
  run.episodes = max_episodes;
  const StopFn reached = [&](const EvalRecord& r) { return r.reward >= res.threshold; };
  auto episodes_needed = [&](Optimizer& opt) {
    const auto h = search_loop(run, opt, evaluator, nullptr, {}, reached);
    return h.back().reward >= res.threshold ? static_cast<int>(h.size()) : max_episodes;
  };
  for (int s = 0; s < num_seeds; ++s) {
    HeuristicOracleOptimizer heuristic(setup.space, static_cast<uint64_t>(s));
    RandomOptimizer random(setup.space, static_cast<uint64_t>(s));
    res.heuristic_episodes.push_back(episodes_needed(heuristic));
    res.random_episodes.push_back(episodes_needed(random));
  }
  res.heuristic_median = median(res.heuristic_episodes);
  res.random_median = median(res.random_episodes);
  return res;
}

}  // namespace lcda

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
#include "lcda/config.hpp"

#include <fstream>
#include <sstream>

namespace lcda {

using nlohmann::json;

namespace {

const std::pair<OptimizerKind, const char*> kOptimizerNames[] = {
    {OptimizerKind::kRandom, "random"},
    {OptimizerKind::kEvolutionary, "evolutionary"},
    {OptimizerKind::kHeuristicOracle, "heuristic_oracle"},
    {OptimizerKind::kLlmFull, "llm_full"},
    {OptimizerKind::kLlmNaive, "llm_naive"},
};

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

const json& section(const json& j, const char* key) {
  static const json kEmpty = json::object();
  if (!j.contains(key)) return kEmpty;
  if (!j.at(key).is_object()) throw ConfigError(std::string("\"") + key + "\" must be an object");
  return j.at(key);
}

std::string reward_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::kAccuracyEnergy: return "accuracy_energy";
    case RewardKind::kAccuracyLatency: return "accuracy_latency";
    case RewardKind::kCustom: break;
  }
  throw ConfigError("custom rewards cannot be configured from a file");
}

RewardKind parse_reward(const std::string& s) {
  if (s == "accuracy_energy") return RewardKind::kAccuracyEnergy;
  if (s == "accuracy_latency") return RewardKind::kAccuracyLatency;
  throw ConfigError("unknown reward \"" + s + "\"");
}

EvaluatorKind parse_evaluator(const std::string& s) {
  if (s == "surrogate") return EvaluatorKind::kSurrogate;
  if (s == "trained") return EvaluatorKind::kTrained;
  throw ConfigError("unknown evaluator \"" + s + "\"");
}

LlmBackend parse_backend(const std::string& s) {
  if (s == "http") return LlmBackend::kHttp;
  if (s == "offline") return LlmBackend::kOffline;
  throw ConfigError("unknown llm backend \"" + s + "\"");
}

Backbone backbone_from_json(const json& j) {
  Backbone b;
  read(j, "num_conv_layers", b.num_conv_layers);
  read(j, "num_fc_layers", b.num_fc_layers);
  read(j, "fc_hidden_size", b.fc_hidden_size);
  read(j, "num_classes", b.num_classes);
  read(j, "pool_after", b.pool_after);
  const json& in = section(j, "input");
  read(in, "height", b.input_shape.height);
  read(in, "width", b.input_shape.width);
  read(in, "channels", b.input_shape.channels);
  return b;
}

json backbone_to_json(const Backbone& b) {
  return {{"num_conv_layers", b.num_conv_layers},
          {"num_fc_layers", b.num_fc_layers},
          {"fc_hidden_size", b.fc_hidden_size},
          {"num_classes", b.num_classes},
          {"pool_after", b.pool_after},
          {"input",
           {{"height", b.input_shape.height},
            {"width", b.input_shape.width},
            {"channels", b.input_shape.channels}}}};
}

// "layers" is either one choice broadcast over every conv layer or a list
// with one choice per layer.
DesignSpace space_from_json(const json& j) {
  const DesignSpace defaults = default_design_space();
  DesignSpace s;
  s.backbone = j.contains("backbone") ? backbone_from_json(section(j, "backbone"))
                                      : defaults.backbone;
  s.hardware = defaults.hardware;
  const json& hw = section(j, "hardware");
  read(hw, "crossbar_sizes", s.hardware.crossbar_sizes);
  read(hw, "adc_resolutions", s.hardware.adc_resolutions);
  read(hw, "device_precisions", s.hardware.device_precisions);
  read(hw, "area_budget", s.hardware.area_budget);

  auto choice = [](const json& c) {
    LayerChoice lc;
    read(c, "channels", lc.channel_options);
    read(c, "kernels", lc.kernel_options);
    return lc;
  };
  if (!j.contains("layers")) {
    s.layers.assign(s.backbone.num_conv_layers, defaults.layers.front());
  } else if (j.at("layers").is_array()) {
    for (const auto& c : j.at("layers")) s.layers.push_back(choice(c));
  } else {
    s.layers.assign(s.backbone.num_conv_layers, choice(j.at("layers")));
  }
  return s;
}

json space_to_json(const DesignSpace& s) {
  json layers = json::array();
  for (const auto& l : s.layers) {
    layers.push_back({{"channels", l.channel_options}, {"kernels", l.kernel_options}});
  }
  return {{"backbone", backbone_to_json(s.backbone)},
          {"layers", layers},
          {"hardware",
           {{"crossbar_sizes", s.hardware.crossbar_sizes},
            {"adc_resolutions", s.hardware.adc_resolutions},
            {"device_precisions", s.hardware.device_precisions},
            {"area_budget", s.hardware.area_budget}}}};
}

}  // namespace

const char* optimizer_name(OptimizerKind kind) {
  for (const auto& [k, name] : kOptimizerNames) {
    if (k == kind) return name;
  }
  return "?";
}

OptimizerKind parse_optimizer(const std::string& name) {
  for (const auto& [k, n] : kOptimizerNames) {
    if (name == n) return k;
  }
  throw ConfigError("unknown optimizer \"" + name + "\"");
}

void RunConfig::check() const {
  try {
    space.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("design space: ") + e.what());
  }
  if (space.hardware.area_budget <= 0.0) throw ConfigError("area budget must be positive");
  if (weight_bits < 1) throw ConfigError("weight_bits must be >= 1");
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (noise.sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
  if (!(energy_norm > 0.0) || !(fps_norm > 0.0)) throw ConfigError("reward norms must be positive");
  if (llm.endpoint.max_retries < 0) throw ConfigError("llm max_retries must be >= 0");
  if (llm.options.max_failures < 1) throw ConfigError("llm max_failures must be >= 1");
  if (llm.options.history_cap < 1) throw ConfigError("llm history_cap must be >= 1");
  if (trained.mc_samples < 1) throw ConfigError("mc_samples must be >= 1");
  if (trained.train.epochs < 1 || trained.train.batch_size < 1) {
    throw ConfigError("training epochs and batch size must be >= 1");
  }
  if (trained.cifar_train_path.empty() != trained.cifar_test_path.empty()) {
    throw ConfigError("cifar train and test paths must be given together");
  }
  if (coldstart.seeds < 1 || coldstart.max_episodes < 1) {
    throw ConfigError("coldstart seeds and max_episodes must be >= 1");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

SearchSetup RunConfig::search_setup() const {
  SearchSetup s;
  s.space = space;
  s.unit_costs = unit_costs;
  s.weight_bits = weight_bits;
  s.reward.kind = reward;
  s.reward.energy_norm = energy_norm;
  s.reward.fps_norm = fps_norm;
  s.episodes = episodes;
  s.seed = seed;
  return s;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  c.space = space_from_json(section(j, "space"));

  const json& uc = section(j, "unit_costs");
  read(uc, "read_energy_per_cell", c.unit_costs.read_energy_per_cell);
  read(uc, "adc_energy_per_conversion", c.unit_costs.adc_energy_per_conversion);
  read(uc, "cycle_time", c.unit_costs.cycle_time);
  read(uc, "cell_area", c.unit_costs.cell_area);
  read(uc, "adc_area", c.unit_costs.adc_area);
  read(uc, "weight_bits", c.weight_bits);

  read(section(j, "noise"), "sigma", c.noise.sigma);

  const json& rw = section(j, "reward");
  std::string reward = reward_string(c.reward);
  read(rw, "kind", reward);
  c.reward = parse_reward(reward);
  read(rw, "energy_norm", c.energy_norm);
  read(rw, "fps_norm", c.fps_norm);

  const json& se = section(j, "search");
  std::string optimizer = optimizer_name(c.optimizer);
  std::string evaluator = "surrogate";
  read(se, "optimizer", optimizer);
  read(se, "evaluator", evaluator);
  c.optimizer = parse_optimizer(optimizer);
  c.evaluator = parse_evaluator(evaluator);
  read(se, "episodes", c.episodes);
  read(se, "seed", c.seed);

  const json& llm = section(j, "llm");
  std::string backend = "http";
  read(llm, "backend", backend);
  c.llm.backend = parse_backend(backend);
  read(llm, "url", c.llm.endpoint.url);
  read(llm, "api_key_env", c.llm.endpoint.api_key_env);
  read(llm, "max_retries", c.llm.endpoint.max_retries);
  int64_t backoff_ms = c.llm.endpoint.initial_backoff.count();
  int64_t timeout_s = c.llm.endpoint.timeout.count();
  read(llm, "initial_backoff_ms", backoff_ms);
  read(llm, "timeout_s", timeout_s);
  c.llm.endpoint.initial_backoff = std::chrono::milliseconds(backoff_ms);
  c.llm.endpoint.timeout = std::chrono::seconds(timeout_s);
  read(llm, "model", c.llm.options.model_id);
  read(llm, "temperature", c.llm.options.temperature);
  read(llm, "max_tokens", c.llm.options.max_tokens);
  read(llm, "history_cap", c.llm.options.history_cap);
  read(llm, "max_failures", c.llm.options.max_failures);
  if (llm.contains("api_key")) {
    throw ConfigError("credentials are read from the environment variable named by api_key_env");
  }

  const json& tr = section(j, "trained");
  const json& data = section(tr, "synthetic");
  read(data, "num_classes", c.trained.data.num_classes);
  read(data, "image_size", c.trained.data.image_size);
  read(data, "train_size", c.trained.data.train_size);
  read(data, "test_size", c.trained.data.test_size);
  read(data, "pixel_noise", c.trained.data.pixel_noise);
  read(data, "seed", c.trained.data.seed);
  read(tr, "cifar_train_path", c.trained.cifar_train_path);
  read(tr, "cifar_test_path", c.trained.cifar_test_path);
  read(tr, "cifar_max_records", c.trained.cifar_max_records);
  read(tr, "epochs", c.trained.train.epochs);
  read(tr, "learning_rate", c.trained.train.learning_rate);
  read(tr, "batch_size", c.trained.train.batch_size);
  read(tr, "mc_samples", c.trained.mc_samples);

  const json& cs = section(j, "coldstart");
  read(cs, "seeds", c.coldstart.seeds);
  read(cs, "max_episodes", c.coldstart.max_episodes);
  read(cs, "tolerance", c.coldstart.tolerance);
  read(cs, "enumeration_cap", c.coldstart.enumeration_cap);

  read(j, "transcript_path", c.transcript_path);
  read(j, "output_dir", c.output_dir);

  if (c.space.hardware.area_budget == 0.0) {
    DesignSpace probe = c.space;
    probe.hardware.area_budget = 1.0;
    try {
      probe.check();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("design space: ") + e.what());
    }
    c.space.hardware.area_budget = default_area_budget(c.space, c.unit_costs, c.weight_bits);
  }
  c.check();
  return c;
}

json config_to_json(const RunConfig& c) {
  return {
      {"space", space_to_json(c.space)},
      {"unit_costs",
       {{"read_energy_per_cell", c.unit_costs.read_energy_per_cell},
        {"adc_energy_per_conversion", c.unit_costs.adc_energy_per_conversion},
        {"cycle_time", c.unit_costs.cycle_time},
        {"cell_area", c.unit_costs.cell_area},
        {"adc_area", c.unit_costs.adc_area},
        {"weight_bits", c.weight_bits}}},
      {"noise", {{"sigma", c.noise.sigma}}},
      {"reward",
       {{"kind", reward_string(c.reward)},
        {"energy_norm", c.energy_norm},
        {"fps_norm", c.fps_norm}}},
      {"search",
       {{"optimizer", optimizer_name(c.optimizer)},
        {"evaluator", c.evaluator == EvaluatorKind::kSurrogate ? "surrogate" : "trained"},
        {"episodes", c.episodes},
        {"seed", c.seed}}},
      {"llm",
       {{"backend", c.llm.backend == LlmBackend::kHttp ? "http" : "offline"},
        {"url", c.llm.endpoint.url},
        {"api_key_env", c.llm.endpoint.api_key_env},
        {"max_retries", c.llm.endpoint.max_retries},
        {"initial_backoff_ms", c.llm.endpoint.initial_backoff.count()},
        {"timeout_s", c.llm.endpoint.timeout.count()},
        {"model", c.llm.options.model_id},
        {"temperature", c.llm.options.temperature},
        {"max_tokens", c.llm.options.max_tokens},
        {"history_cap", c.llm.options.history_cap},
        {"max_failures", c.llm.options.max_failures}}},
      {"trained",
       {{"synthetic",
         {{"num_classes", c.trained.data.num_classes},
          {"image_size", c.trained.data.image_size},
          {"train_size", c.trained.data.train_size},
          {"test_size", c.trained.data.test_size},
          {"pixel_noise", c.trained.data.pixel_noise},
          {"seed", c.trained.data.seed}}},
        {"cifar_train_path", c.trained.cifar_train_path},
        {"cifar_test_path", c.trained.cifar_test_path},
        {"cifar_max_records", c.trained.cifar_max_records},
        {"epochs", c.trained.train.epochs},
        {"learning_rate", c.trained.train.learning_rate},
        {"batch_size", c.trained.train.batch_size},
        {"mc_samples", c.trained.mc_samples}}},
      {"coldstart",
       {{"seeds", c.coldstart.seeds},
        {"max_episodes", c.coldstart.max_episodes},
        {"tolerance", c.coldstart.tolerance},
        {"enumeration_cap", c.coldstart.enumeration_cap}}},
      {"transcript_path", c.transcript_path},
      {"output_dir", c.output_dir},
  };
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j);
}

std::string render_config(const RunConfig& config) { return config_to_json(config).dump(2) + "\n"; }

}  // namespace lcda

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
#include "lcda/history.hpp"

#include <filesystem>

namespace lcda {

using nlohmann::json;

json rollout_to_json(const Rollout& rollout) {
  json layers = json::array();
  for (const auto& l : rollout.layers) layers.push_back({l.out_channels, l.kernel});
  const auto& hw = rollout.hardware;
  return {{"layers", std::move(layers)},
          {"hardware", {hw.crossbar_size, hw.adc_resolution, hw.device_precision}}};
}

Rollout rollout_from_json(const json& j) {
  Rollout r;
  for (const auto& pair : j.at("layers")) {
    if (pair.size() != 2) throw HistoryFormatError("layer entry must be a pair");
    r.layers.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
  }
  const auto& hw = j.at("hardware");
  if (hw.size() != 3) throw HistoryFormatError("hardware entry must be a triple");
  r.hardware = {hw.at(0).get<int>(), hw.at(1).get<int>(), hw.at(2).get<int>()};
  return r;
}

namespace {

json cost_to_json(const CostReport& c) {
  json layers = json::array();
  for (const auto& l : c.per_layer) {
    const auto& m = l.mapping;
    layers.push_back({{"rows_needed", m.rows_needed},
                      {"cols_needed", m.cols_needed},
                      {"tiles_rows", m.tiles_rows},
                      {"tiles_cols", m.tiles_cols},
                      {"utilization", m.utilization},
                      {"activations", m.activations},
                      {"energy", l.energy},
                      {"latency", l.latency},
                      {"area", l.area}});
  }
  return {{"energy", c.energy},
          {"latency", c.latency},
          {"area", c.area},
          {"valid", c.valid},
          {"per_layer", std::move(layers)}};
}

CostReport cost_from_json(const json& j) {
  CostReport c;
  c.energy = j.at("energy").get<double>();
  c.latency = j.at("latency").get<double>();
  c.area = j.at("area").get<double>();
  c.valid = j.at("valid").get<bool>();
  for (const auto& l : j.at("per_layer")) {
    LayerCost lc;
    lc.mapping.rows_needed = l.at("rows_needed").get<int64_t>();
    lc.mapping.cols_needed = l.at("cols_needed").get<int64_t>();
    lc.mapping.tiles_rows = l.at("tiles_rows").get<int64_t>();
    lc.mapping.tiles_cols = l.at("tiles_cols").get<int64_t>();
    lc.mapping.utilization = l.at("utilization").get<double>();
    lc.mapping.activations = l.at("activations").get<int64_t>();
    lc.energy = l.at("energy").get<double>();
    lc.latency = l.at("latency").get<double>();
    lc.area = l.at("area").get<double>();
    c.per_layer.push_back(lc);
  }
  return c;
}

}  // namespace

json record_to_json(const EvalRecord& r) {
  return {{"schema", kHistorySchema},
          {"episode", r.episode},
          {"optimizer", r.optimizer_tag},
          {"rollout", rollout_to_json(r.rollout)},
          {"accuracy", r.accuracy},
          {"reward", r.reward},
          {"fallback", r.fallback},
          {"flags", r.flags},
          {"cost", cost_to_json(r.cost)}};
}

EvalRecord record_from_json(const json& j) {
  if (j.at("schema").get<int>() != kHistorySchema) {
    throw HistoryFormatError("unsupported history schema " + j.at("schema").dump());
  }
  EvalRecord r;
  r.episode = j.at("episode").get<int>();
  r.optimizer_tag = j.at("optimizer").get<std::string>();
  r.rollout = rollout_from_json(j.at("rollout"));
  r.accuracy = j.at("accuracy").get<double>();
  r.reward = j.at("reward").get<double>();
  r.fallback = j.at("fallback").get<bool>();
  r.flags = j.at("flags").get<std::vector<std::string>>();
  r.cost = cost_from_json(j.at("cost"));
  return r;
}

std::vector<EvalRecord> load_history(const std::string& path) {
  std::vector<EvalRecord> out;
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path);
  if (!in) throw HistoryFormatError("cannot read history " + path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw HistoryFormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

HistoryWriter::HistoryWriter(const std::string& path, bool append)
    : out_(path, append ? std::ios::app : std::ios::trunc) {
  if (!out_) throw HistoryFormatError("cannot write history " + path);
}

void HistoryWriter::append(const EvalRecord& record) {
  out_ << record_to_json(record).dump() << "\n" << std::flush;
}

json pareto_to_json(const std::vector<EvalRecord>& history, CostMetric metric) {
  json records = json::array();
  std::vector<size_t> front;
  if (!history.empty()) front = pareto_front(history, metric);
  for (size_t i : front) records.push_back(record_to_json(history[i]));
  return {{"metric", cost_metric_name(metric)}, {"indices", front}, {"records", records}};
}

json curve_to_json(const std::vector<EvalRecord>& history) {
  json episodes = json::array();
  json rewards = json::array();
  for (const auto& r : history) {
    episodes.push_back(r.episode);
    rewards.push_back(r.reward);
  }
  return {{"episodes", episodes}, {"reward", rewards}, {"best_so_far", best_so_far(history)}};
}

json summary_to_json(const std::vector<EvalRecord>& history) {
  json j = {{"episodes", history.size()}};
  if (history.empty()) return j;
  const size_t best = best_index(history);
  size_t fallbacks = 0;
  for (const auto& r : history) fallbacks += r.fallback;
  j["best_index"] = best;
  j["best"] = record_to_json(history[best]);
  j["fallbacks"] = fallbacks;
  j["pareto_energy"] = pareto_to_json(history, CostMetric::kEnergy);
  j["pareto_latency"] = pareto_to_json(history, CostMetric::kLatency);
  j["curve"] = curve_to_json(history);
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace lcda

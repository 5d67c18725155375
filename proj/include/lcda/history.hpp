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

#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "lcda/search.hpp"

namespace lcda {

// history.jsonl holds one EvalRecord object per line, each tagged with
// "schema": kHistorySchema.
inline constexpr int kHistorySchema = 1;

nlohmann::json rollout_to_json(const Rollout& rollout);
Rollout rollout_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const EvalRecord& record);
EvalRecord record_from_json(const nlohmann::json& j);

class HistoryFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing file reads as an empty history.
std::vector<EvalRecord> load_history(const std::string& path);

/// Appends and flushes one line per record.
class HistoryWriter : public HistorySink {
 public:
  /// append = false truncates the file.
  HistoryWriter(const std::string& path, bool append);
  void append(const EvalRecord& record) override;

 private:
  std::ofstream out_;
};

/// {"metric", "indices", "records"}
nlohmann::json pareto_to_json(const std::vector<EvalRecord>& history, CostMetric metric);

/// {"episodes", "reward", "best_so_far"}
nlohmann::json curve_to_json(const std::vector<EvalRecord>& history);

/// Best design, Pareto fronts for energy and latency, and the best-so-far curve.
nlohmann::json summary_to_json(const std::vector<EvalRecord>& history);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace lcda

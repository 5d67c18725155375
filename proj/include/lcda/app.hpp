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

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "lcda/config.hpp"

namespace lcda {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitReplayDivergence = 4;

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& config);

/// Offline stand-in model: answers every request with a rollout drawn from
/// `space` by a generator keyed on (seed, call number).
std::unique_ptr<LlmClient> make_offline_llm(const DesignSpace& space, uint64_t seed);

/// Runs a configured search into config.output_dir. With `replay_transcript`
/// set, LLM calls are served from that transcript instead of the backend.
std::vector<EvalRecord> run_configured_search(const RunConfig& config,
                                              const std::string& replay_transcript = "",
                                              bool resume = false);

/// Entry point of the lcda tool. Returns one of the kExit* codes.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lcda

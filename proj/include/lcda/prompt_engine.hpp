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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lcda/design_space.hpp"

namespace lcda {

namespace prompt_text {

inline constexpr std::string_view kExpertRole =
    "You are an expert in the field of neural architecture search.";

inline constexpr std::string_view kTask =
    "Your task is to assist me in selecting the best rollout numbers for a given model "
    "architecture. The model will be trained and tested on CIFAR10, and your objective will be "
    "to maximize the model's performance on CIFAR10.\n"
    "The model architecture will be defined as the following.\n";

inline constexpr std::string_view kChoicesLead =
    "For the `rollout' variable to design the model, the available number for each index "
    "would be: ";

inline constexpr std::string_view kObjective =
    "Your objective is to define the optimal number of rollouts for each layer based on the "
    "given options above to maximize the model's performance on CIFAR10.";

inline constexpr std::string_view kReward =
    "The model's performance is a combination of hardware performance and model accuracy. If "
    "the hardware is invalid (e.g., too large in area), the performance I give you will be -1. "
    "After you give me a rollout list, I will give you the model's performance I calculated.";

inline constexpr std::string_view kHistoryLead =
    "Here are some experimental results that you can use as a reference:";

inline constexpr std::string_view kImprove =
    "Please suggest a rollout list that can improve the model's performance on CIFAR10 beyond "
    "the experimental results provided above.\n"
    "Please do not include anything else other than the rollout list in your response.";

// Ablation framing: the same numeric task with every mention of the
// application removed.
inline constexpr std::string_view kNaiveRole = "You are a helpful assistant.";

inline constexpr std::string_view kNaiveTask =
    "Your task is to assist me in selecting the best rollout numbers.";

inline constexpr std::string_view kNaiveChoicesLead =
    "For the `rollout' variable, the available number for each index would be: ";

inline constexpr std::string_view kNaiveObjective =
    "Your objective is to define the optimal number for each index based on the given options "
    "above to maximize the score.";

inline constexpr std::string_view kNaiveReward =
    "The score is computed from the numbers you choose. If the numbers are invalid, the score I "
    "give you will be -1. After you give me a rollout list, I will give you the score I "
    "calculated.";

inline constexpr std::string_view kNaiveImprove =
    "Please suggest a rollout list that can improve the score beyond the experimental results "
    "provided above.\n"
    "Please do not include anything else other than the rollout list in your response.";

/// Appended to the user prompt when the previous response was unusable.
inline constexpr std::string_view kCorrection =
    "Your previous response could not be used: ";

}  // namespace prompt_text

struct PromptContext {
  std::vector<Rollout> explored_designs;
  std::vector<double> normalized_performance;
  std::string backbone_text;
  std::string choices_text;           // full framing
  std::string abstract_choices_text;  // ablation framing
  int num_layers = 6;
  std::string hardware_example = "[128,6,2]";
  size_t history_cap = 50;
};

struct PromptPair {
  std::string system_text;
  std::string user_text;

  bool operator==(const PromptPair&) const = default;
};

std::string render_backbone(const Backbone& backbone);
std::string render_choices(const DesignSpace& space);
std::string render_abstract_choices(const DesignSpace& space);

/// Context with all text slots filled from `space`.
PromptContext make_prompt_context(const DesignSpace& space, std::vector<Rollout> designs,
                                  std::vector<double> performance, size_t history_cap = 50);

/// "Your response should be ..." sentence plus the hardware-triple sentence.
std::string format_instruction(const PromptContext& ctx);

/// History block shared verbatim by both prompt variants.
std::string history_block(const PromptContext& ctx);

PromptPair build_prompt(const PromptContext& ctx);
PromptPair build_naive_prompt(const PromptContext& ctx);

enum class ParseErrorKind { kNoList, kMalformed, kInvalid };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::string offending, const std::string& message)
      : std::runtime_error(message), kind_(kind), offending_(std::move(offending)) {}

  ParseErrorKind kind() const { return kind_; }
  const std::string& offending() const { return offending_; }

 private:
  ParseErrorKind kind_;
  std::string offending_;
};

struct ParsedResponse {
  Rollout rollout;
  bool hardware_defaulted = false;
};

/// Extracts the first bracketed list of number pairs, with an optional
/// trailing [crossbar, adc, precision] triple, and validates it.
/// Throws ParseError.
ParsedResponse parse_response(std::string_view text, const DesignSpace& space);

}  // namespace lcda

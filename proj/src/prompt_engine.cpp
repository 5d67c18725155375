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
#include "lcda/prompt_engine.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <limits>
#include <sstream>

namespace lcda {

namespace {

std::string list_text(const std::vector<int>& values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(values[i]);
  }
  return out + "]";
}

std::string format_perf(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

// Layer pairs of the format example follow 32, 32, 64, 64, 128, 128, ...
std::string example_list(const PromptContext& ctx, bool with_hardware) {
  std::string out = "[";
  for (int i = 0; i < ctx.num_layers; ++i) {
    if (i) out += ",";
    out += "[" + std::to_string(32 << (i / 2)) + ",3]";
  }
  if (with_hardware) out += "," + ctx.hardware_example;
  return out + "]";
}

}  // namespace

std::string render_backbone(const Backbone& b) {
  std::ostringstream os;
  os << "input: " << b.input_shape.height << "x" << b.input_shape.width << "x"
     << b.input_shape.channels << " images, " << b.num_classes << " classes\n";
  for (int i = 0; i < b.num_conv_layers; ++i) {
    os << "conv layer " << i + 1 << ": output channels and kernel size from rollout index " << i
       << ", stride 1, same padding, ReLU";
    if (b.pool_after.count(i)) os << ", followed by 2x2 max pooling";
    os << "\n";
  }
  for (int f = 0; f < b.num_fc_layers; ++f) {
    if (f + 1 == b.num_fc_layers) {
      os << "fully connected layer: " << b.num_classes << " outputs\n";
    } else {
      os << "fully connected layer: " << b.fc_hidden_size << " hidden units, ReLU\n";
    }
  }
  os << "accelerator: compute-in-memory crossbar arrays of non-volatile memory devices; "
     << "crossbar size, ADC resolution (bits) and device precision (bits per cell) come from "
     << "rollout index " << b.num_conv_layers;
  return os.str();
}

std::string render_choices(const DesignSpace& space) {
  std::ostringstream os;
  for (size_t i = 0; i < space.layers.size(); ++i) {
    os << "\nindex " << i << " (conv layer " << i + 1
       << "): output channels in " << list_text(space.layers[i].channel_options)
       << ", kernel size in " << list_text(space.layers[i].kernel_options);
  }
  os << "\nindex " << space.layers.size()
     << " (hardware): crossbar size in " << list_text(space.hardware.crossbar_sizes)
     << ", ADC resolution in " << list_text(space.hardware.adc_resolutions)
     << ", device precision in " << list_text(space.hardware.device_precisions);
  return os.str();
}

std::string render_abstract_choices(const DesignSpace& space) {
  std::ostringstream os;
  for (size_t i = 0; i < space.layers.size(); ++i) {
    os << "\nindex " << i << ": first number in " << list_text(space.layers[i].channel_options)
       << ", second number in " << list_text(space.layers[i].kernel_options);
  }
  os << "\nindex " << space.layers.size() << ": first number in "
     << list_text(space.hardware.crossbar_sizes) << ", second number in "
     << list_text(space.hardware.adc_resolutions) << ", third number in "
     << list_text(space.hardware.device_precisions);
  return os.str();
}

PromptContext make_prompt_context(const DesignSpace& space, std::vector<Rollout> designs,
                                  std::vector<double> performance, size_t history_cap) {
  PromptContext ctx;
  ctx.explored_designs = std::move(designs);
  ctx.normalized_performance = std::move(performance);
  ctx.backbone_text = render_backbone(space.backbone);
  ctx.choices_text = render_choices(space);
  ctx.abstract_choices_text = render_abstract_choices(space);
  ctx.num_layers = static_cast<int>(space.layers.size());
  const auto& hw = space.hardware;
  auto mid = [](const std::vector<int>& v) { return std::to_string(v.at(v.size() / 2)); };
  ctx.hardware_example =
      "[" + mid(hw.crossbar_sizes) + "," + mid(hw.adc_resolutions) + "," + mid(hw.device_precisions) + "]";
  ctx.history_cap = history_cap;
  return ctx;
}

std::string format_instruction(const PromptContext& ctx) {
  return "Your response should be the rollout list consisting of " +
         std::to_string(ctx.num_layers) + " number pairs(e.g. " + example_list(ctx, false) +
         ").\nAfter the pairs, append one number triple for index " +
         std::to_string(ctx.num_layers) + " inside the same list (e.g. " +
         example_list(ctx, true) + ").";
}

std::string history_block(const PromptContext& ctx) {
  const auto& designs = ctx.explored_designs;
  const auto& perf = ctx.normalized_performance;
  if (designs.size() != perf.size()) {
    throw std::invalid_argument("prompt context: designs and performance lists differ in length");
  }
  std::string out(prompt_text::kHistoryLead);
  out += "\n";
  if (designs.empty()) return out + "[]";
  size_t first = 0;
  if (ctx.history_cap > 0 && designs.size() > ctx.history_cap) {
    first = designs.size() - ctx.history_cap;
    out += "(" + std::to_string(first) + " earlier results omitted)\n";
  }
  for (size_t i = first; i < designs.size(); ++i) {
    out += "(" + render_rollout(designs[i]) + ", " + format_perf(perf[i]) + ")";
    if (i + 1 < designs.size()) out += "\n";
  }
  return out;
}

PromptPair build_prompt(const PromptContext& ctx) {
  PromptPair p;
  p.system_text = std::string(prompt_text::kExpertRole);
  std::string u;
  u += prompt_text::kTask;
  u += ctx.backbone_text;
  u += "\n\n";
  u += prompt_text::kChoicesLead;
  u += ctx.choices_text;
  u += "\n\n";
  u += prompt_text::kObjective;
  u += "\n\n";
  u += prompt_text::kReward;
  u += "\n\n";
  u += format_instruction(ctx);
  u += "\n\n";
  u += history_block(ctx);
  u += "\n\n";
  u += prompt_text::kImprove;
  p.user_text = std::move(u);
  return p;
}

PromptPair build_naive_prompt(const PromptContext& ctx) {
  PromptPair p;
  p.system_text = std::string(prompt_text::kNaiveRole);
  std::string u;
  u += prompt_text::kNaiveTask;
  u += "\n\n";
  u += prompt_text::kNaiveChoicesLead;
  u += ctx.abstract_choices_text;
  u += "\n\n";
  u += prompt_text::kNaiveObjective;
  u += "\n\n";
  u += prompt_text::kNaiveReward;
  u += "\n\n";
  u += format_instruction(ctx);
  u += "\n\n";
  u += history_block(ctx);
  u += "\n\n";
  u += prompt_text::kNaiveImprove;
  p.user_text = std::move(u);
  return p;
}

namespace {

constexpr size_t kMaxSnippet = 120;

std::string snippet(std::string_view text, size_t begin, size_t end) {
  begin = std::min(begin, text.size());
  end = std::min(std::max(end, begin), text.size());
  if (end - begin > kMaxSnippet) end = begin + kMaxSnippet;
  return std::string(text.substr(begin, end - begin));
}

class ListScanner {
 public:
  ListScanner(std::string_view text, size_t pos) : text_(text), start_(pos), pos_(pos) {}

  std::vector<std::vector<int64_t>> parse() {
    expect('[');
    std::vector<std::vector<int64_t>> items;
    skip_ws();
    if (peek() == ']') fail("empty list");
    while (true) {
      items.push_back(parse_item());
      skip_ws();
      const char c = peek();
      if (c == ',') {
        ++pos_;
        skip_ws();
        continue;
      }
      if (c == ']') {
        ++pos_;
        break;
      }
      fail("expected ',' or ']'");
    }
    return items;
  }

  size_t end() const { return pos_; }

 private:
  std::vector<int64_t> parse_item() {
    const size_t item_start = pos_;
    skip_ws();
    if (peek() != '[') fail("expected '[' opening a number pair", item_start);
    ++pos_;
    std::vector<int64_t> values;
    while (true) {
      skip_ws();
      values.push_back(parse_int());
      skip_ws();
      const char c = peek();
      if (c == ',') {
        ++pos_;
        continue;
      }
      if (c == ']') {
        ++pos_;
        break;
      }
      fail("expected ',' or ']' inside a number pair", item_start);
    }
    return values;
  }

  int64_t parse_int() {
    const size_t begin = pos_;
    if (peek() == '-' || peek() == '+') ++pos_;
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      fail("expected an integer", begin);
    }
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string_view digits = text_.substr(begin, pos_ - begin);
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    int64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size() ||
        value > std::numeric_limits<int>::max() || value < std::numeric_limits<int>::min()) {
      fail("integer out of range", begin);
    }
    return value;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) { fail(why, start_); }

  [[noreturn]] void fail(const std::string& why, size_t from) {
    const auto bad = snippet(text_, from, pos_ + 1);
    throw ParseError(ParseErrorKind::kMalformed, bad, "malformed rollout list: " + why +
                                                          " near \"" + bad + "\"");
  }

  std::string_view text_;
  size_t start_;
  size_t pos_;
};

// First '[' followed (after optional whitespace) by another '['.
size_t find_list_start(std::string_view text) {
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[') continue;
    size_t j = i + 1;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j < text.size() && text[j] == '[') return i;
  }
  return std::string_view::npos;
}

}  // namespace

ParsedResponse parse_response(std::string_view text, const DesignSpace& space) {
  const size_t start = find_list_start(text);
  if (start == std::string_view::npos) {
    const auto bad = snippet(text, 0, text.size());
    throw ParseError(ParseErrorKind::kNoList, bad, "no bracketed rollout list in response");
  }
  ListScanner scanner(text, start);
  const auto items = scanner.parse();
  const std::string list = snippet(text, start, scanner.end());

  ParsedResponse out;
  size_t pairs = items.size();
  if (items.back().size() == 3) {
    const auto& hw = items.back();
    out.rollout.hardware = {static_cast<int>(hw[0]), static_cast<int>(hw[1]),
                            static_cast<int>(hw[2])};
    --pairs;
  } else {
    out.hardware_defaulted = true;
    out.rollout.hardware = {space.hardware.crossbar_sizes.at(0),
                            space.hardware.adc_resolutions.at(0),
                            space.hardware.device_precisions.at(0)};
  }
  for (size_t i = 0; i < pairs; ++i) {
    if (items[i].size() != 2) {
      throw ParseError(ParseErrorKind::kMalformed, list,
                       "malformed rollout list: entry " + std::to_string(i) + " has " +
                           std::to_string(items[i].size()) + " numbers, expected 2");
    }
    out.rollout.layers.push_back({static_cast<int>(items[i][0]), static_cast<int>(items[i][1])});
  }
  const auto check = validate(out.rollout, space);
  if (!check.ok()) {
    throw ParseError(ParseErrorKind::kInvalid, list, "invalid rollout " + list + ": " +
                                                         check.describe());
  }
  return out;
}

}  // namespace lcda

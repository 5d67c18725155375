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
#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <random>

#include "lcda/prompt_engine.hpp"

namespace lcda {
namespace {

DesignSpace space_with_budget() {
  auto s = default_design_space();
  s.hardware.area_budget = 1e9;
  return s;
}

const Rollout kExample{{{32, 3}, {32, 3}, {64, 3}, {64, 3}, {128, 3}, {128, 3}}, {128, 6, 2}};

TEST(Prompt, TemplateSentencesAreVerbatim) {
  const auto ctx = make_prompt_context(space_with_budget(), {}, {});
  const auto p = build_prompt(ctx);
  EXPECT_EQ(p.system_text, "You are an expert in the field of neural architecture search.");
  for (const char* sentence : {
           "Your task is to assist me in selecting the best rollout numbers for a given model "
           "architecture. The model will be trained and tested on CIFAR10, and your objective "
           "will be to maximize the model's performance on CIFAR10.",
           "The model architecture will be defined as the following.",
           "For the `rollout' variable to design the model, the available number for each index "
           "would be: ",
           "Your objective is to define the optimal number of rollouts for each layer based on "
           "the given options above to maximize the model's performance on CIFAR10.",
           "If the hardware is invalid (e.g., too large in area), the performance I give you "
           "will be -1.",
           "Your response should be the rollout list consisting of 6 number pairs(e.g. "
           "[[32,3],[32,3],[64,3],[64,3],[128,3],[128,3]]).",
           "Here are some experimental results that you can use as a reference:",
           "Please suggest a rollout list that can improve the model's performance on CIFAR10 "
           "beyond the experimental results provided above.",
           "Please do not include anything else other than the rollout list in your response.",
       }) {
    EXPECT_NE(p.user_text.find(sentence), std::string::npos) << sentence;
  }
}

TEST(Prompt, SectionsAppearInOrder) {
  const auto ctx = make_prompt_context(space_with_budget(), {kExample}, {0.5});
  const auto u = build_prompt(ctx).user_text;
  std::vector<size_t> at = {u.find("Your task"),      u.find(ctx.backbone_text),
                            u.find("For the `rollout'"), u.find("Your objective"),
                            u.find("The model's performance is"), u.find("Your response"),
                            u.find("Here are some"),  u.find("Please suggest")};
  for (size_t pos : at) ASSERT_NE(pos, std::string::npos);
  EXPECT_TRUE(std::is_sorted(at.begin(), at.end()));
}

TEST(Prompt, EmptyHistoryBlock) {
  const auto ctx = make_prompt_context(space_with_budget(), {}, {});
  EXPECT_EQ(history_block(ctx),
            "Here are some experimental results that you can use as a reference:\n[]");
}

TEST(Prompt, HistoryEntriesVerbatimAndOrdered) {
  Rollout other = kExample;
  other.layers[0].out_channels = 16;
  const auto ctx = make_prompt_context(space_with_budget(), {kExample, other}, {0.5123, -1.0});
  const auto block = history_block(ctx);
  EXPECT_EQ(block,
            "Here are some experimental results that you can use as a reference:\n"
            "([[32,3],[32,3],[64,3],[64,3],[128,3],[128,3],[128,6,2]], 0.5123)\n"
            "([[16,3],[32,3],[64,3],[64,3],[128,3],[128,3],[128,6,2]], -1.0000)");
  EXPECT_NE(build_prompt(ctx).user_text.find(block), std::string::npos);
}

TEST(Prompt, HistoryCapDropsOldestWithNote) {
  std::vector<Rollout> designs(60, kExample);
  std::vector<double> perf(60);
  for (int i = 0; i < 60; ++i) perf[i] = i / 100.0;
  const auto ctx = make_prompt_context(space_with_budget(), designs, perf, 50);
  const auto block = history_block(ctx);
  EXPECT_NE(block.find("(10 earlier results omitted)"), std::string::npos);
  EXPECT_EQ(block.find("0.0900)"), std::string::npos);
  EXPECT_NE(block.find("0.1000)"), std::string::npos);
  EXPECT_EQ(std::count(block.begin(), block.end(), '\n'), 51);
}

TEST(Prompt, LengthGrowsLinearly) {
  auto space = space_with_budget();
  std::vector<size_t> sizes;
  for (size_t n = 0; n < 5; ++n) {
    std::vector<Rollout> d(n, kExample);
    std::vector<double> p(n, 0.25);
    sizes.push_back(build_prompt(make_prompt_context(space, d, p)).user_text.size());
  }
  for (size_t i = 2; i < sizes.size(); ++i) {
    EXPECT_EQ(sizes[i] - sizes[i - 1], sizes[2] - sizes[1]);
  }
}

TEST(Prompt, Deterministic) {
  const auto ctx = make_prompt_context(space_with_budget(), {kExample}, {0.5});
  EXPECT_EQ(build_prompt(ctx), build_prompt(ctx));
  EXPECT_EQ(build_naive_prompt(ctx), build_naive_prompt(ctx));
}

TEST(Prompt, MismatchedContextThrows) {
  auto ctx = make_prompt_context(space_with_budget(), {kExample}, {0.5});
  ctx.normalized_performance.clear();
  EXPECT_THROW(build_prompt(ctx), std::invalid_argument);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

TEST(NaivePrompt, HasNoApplicationFraming) {
  const auto ctx = make_prompt_context(space_with_budget(), {}, {});
  const auto p = build_naive_prompt(ctx);
  const auto all = lower(p.system_text + "\n" + p.user_text);
  for (const char* term : {"accelerator", "cifar", "neural", "co-design", "codesign", "expert",
                           "hardware", "crossbar", "architecture", "accuracy", "kernel",
                           "channel", "model", "network"}) {
    EXPECT_EQ(all.find(term), std::string::npos) << term;
  }
}

TEST(NaivePrompt, SharesHistoryBlockAndFormat) {
  const auto ctx = make_prompt_context(space_with_budget(), {kExample, kExample}, {0.1, -1});
  const auto full = build_prompt(ctx).user_text;
  const auto naive = build_naive_prompt(ctx).user_text;
  const auto block = history_block(ctx);
  EXPECT_NE(full.find(block), std::string::npos);
  EXPECT_NE(naive.find(block), std::string::npos);
  EXPECT_NE(naive.find(format_instruction(ctx)), std::string::npos);
}

TEST(Parse, ExampleList) {
  auto space = space_with_budget();
  const auto r = parse_response("[[32,3],[32,3],[64,3],[64,3],[128,3],[128,3]]", space);
  EXPECT_TRUE(r.hardware_defaulted);
  EXPECT_EQ(r.rollout.layers, kExample.layers);
  EXPECT_EQ(r.rollout.hardware, (HardwareSpec{64, 4, 1}));
}

TEST(Parse, ToleratesProseAndFences) {
  auto space = space_with_budget();
  const auto r = parse_response(
      "Sure! My suggestion:\n```\n[[16,3], [16,3],[32,3],[32,3],[64,3],[64,3], [256, 8, 4]]\n```"
      " good luck",
      space);
  EXPECT_FALSE(r.hardware_defaulted);
  EXPECT_EQ(r.rollout.layers[0], (LayerSpec{16, 3}));
  EXPECT_EQ(r.rollout.hardware, (HardwareSpec{256, 8, 4}));
}

TEST(Parse, ErrorKinds) {
  auto space = space_with_budget();
  auto kind_of = [&](std::string_view text) {
    try {
      parse_response(text, space);
    } catch (const ParseError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error for " << text;
    return ParseErrorKind::kNoList;
  };
  EXPECT_EQ(kind_of("I cannot comply"), ParseErrorKind::kNoList);
  EXPECT_EQ(kind_of("[[32,3],[32,3"), ParseErrorKind::kMalformed);
  EXPECT_EQ(kind_of("[[32,3,1,1],[32,3]]"), ParseErrorKind::kMalformed);
  EXPECT_EQ(kind_of("[[32,3],[32,3]]"), ParseErrorKind::kInvalid);
  EXPECT_EQ(kind_of("[[33,3],[32,3],[64,3],[64,3],[128,3],[128,3]]"), ParseErrorKind::kInvalid);
  EXPECT_EQ(kind_of("[[99999999999999999999,3]]"), ParseErrorKind::kMalformed);
}

TEST(Parse, ErrorCarriesOffendingText) {
  auto space = space_with_budget();
  try {
    parse_response("text [[33,3],[32,3],[64,3],[64,3],[128,3],[128,3]] more", space);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(e.offending().find("[[33,3]"), std::string::npos);
  }
}

TEST(Parse, RoundTripOverSmallSpace) {
  Backbone b;
  b.num_conv_layers = 4;
  b.pool_after = {1, 3};
  auto space = uniform_design_space(b, LayerChoice{{16, 32}, {3, 5}},
                                    HardwareChoice{{64, 128}, {4, 8}, {1, 2}, 1e9});
  for (const auto& r : enumerate(space)) {
    const auto parsed = parse_response(render_rollout(r), space);
    ASSERT_EQ(parsed.rollout, r);
    ASSERT_FALSE(parsed.hardware_defaulted);
  }
}

TEST(Parse, FuzzNeverCrashes) {
  auto space = space_with_budget();
  std::mt19937_64 rng(11);
  const std::string alphabet = "[],0123456789 -+\n`abc[[]]";
  for (int t = 0; t < 20000; ++t) {
    std::string s(rng() % 80, ' ');
    for (auto& c : s) {
      c = rng() % 4 ? alphabet[rng() % alphabet.size()] : static_cast<char>(rng() % 256);
    }
    try {
      parse_response(s, space);
    } catch (const ParseError&) {
    }
  }
}

}  // namespace
}  // namespace lcda

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

#include <random>
#include <set>

#include "lcda/design_space.hpp"

namespace lcda {
namespace {

DesignSpace small_space() {
  Backbone b;
  b.num_conv_layers = 3;
  b.pool_after = {1};
  HardwareChoice hw{{64, 128}, {4, 8}, {1, 2}, 1e9};
  return uniform_design_space(b, LayerChoice{{16, 32}, {1, 3, 5}}, hw);
}

TEST(DesignSpace, DefaultShape) {
  auto s = default_design_space();
  EXPECT_EQ(s.layers.size(), 6u);
  EXPECT_EQ(s.backbone.fc_hidden_size, 1024);
  EXPECT_EQ(s.backbone.pool_after, (std::set<int>{1, 3, 5}));
  EXPECT_EQ(s.hardware.area_budget, 0.0);
  EXPECT_THROW(s.check(), std::invalid_argument);
  s.hardware.area_budget = 1.0;
  EXPECT_NO_THROW(s.check());
}

TEST(DesignSpace, DefaultSizeIsProductOfOptions) {
  auto s = default_design_space();
  uint64_t expected = 27;
  for (int i = 0; i < 6; ++i) expected *= 16;
  EXPECT_EQ(space_size(s), expected);
}

TEST(DesignSpace, CheckRejectsBadOptions) {
  auto s = small_space();
  s.layers[1].kernel_options = {3, 4};
  EXPECT_THROW(s.check(), std::invalid_argument);
  s = small_space();
  s.layers[0].channel_options = {};
  EXPECT_THROW(s.check(), std::invalid_argument);
  s = small_space();
  s.layers.pop_back();
  EXPECT_THROW(s.check(), std::invalid_argument);
  s = small_space();
  s.hardware.crossbar_sizes = {128, 64};
  EXPECT_THROW(s.check(), std::invalid_argument);
}

TEST(DesignSpace, SpatialBefore) {
  Backbone b;
  EXPECT_EQ(b.spatial_before(0), std::make_pair(32, 32));
  EXPECT_EQ(b.spatial_before(2), std::make_pair(16, 16));
  EXPECT_EQ(b.spatial_before(4), std::make_pair(8, 8));
  EXPECT_EQ(b.spatial_before(6), std::make_pair(4, 4));
}

TEST(DesignSpace, EnumerationCountMatchesSize) {
  auto s = small_space();
  const auto all = enumerate(s);
  EXPECT_EQ(all.size(), space_size(s));
  EXPECT_EQ(all.size(), 6u * 6u * 6u * 8u);
  std::set<Rollout> unique(all.begin(), all.end());
  EXPECT_EQ(unique.size(), all.size());
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
}

TEST(DesignSpace, EnumerationCap) {
  auto s = small_space();
  EXPECT_THROW(enumerate(s, 100), EnumerationCapExceeded);
  EXPECT_EQ(enumerate(s, space_size(s)).size(), space_size(s));
}

TEST(DesignSpace, ValidateAgreesWithEnumeration) {
  auto s = small_space();
  const auto all = enumerate(s);
  const std::set<Rollout> members(all.begin(), all.end());
  for (const auto& r : all) EXPECT_TRUE(validate(r, s).ok());

  // Every rollout over a superset vocabulary is valid iff it was enumerated.
  const std::vector<int> channels = {8, 16, 32}, kernels = {1, 2, 3, 5}, xbars = {64, 128, 96};
  std::mt19937_64 rng(3);
  auto pick = [&](const std::vector<int>& v) { return v[rng() % v.size()]; };
  for (int t = 0; t < 5000; ++t) {
    Rollout r;
    for (int i = 0; i < 3; ++i) r.layers.push_back({pick(channels), pick(kernels)});
    r.hardware = {pick(xbars), pick({4, 8}), pick({1, 2, 3})};
    EXPECT_EQ(validate(r, s).ok(), members.count(r) == 1) << render_rollout(r);
  }
}

TEST(DesignSpace, ValidateReportsEveryViolation) {
  auto s = small_space();
  Rollout r{{{16, 3}, {24, 4}, {32, 5}}, {100, 8, 2}};
  const auto v = validate(r, s);
  ASSERT_EQ(v.violations.size(), 4u);
  EXPECT_EQ(v.violations[0].index, 1);
  EXPECT_EQ(v.violations[0].slot, "out_channels");
  EXPECT_EQ(v.violations[1].kind, ViolationKind::kEvenKernel);
  EXPECT_EQ(v.violations[2].kind, ViolationKind::kOutOfVocabulary);
  EXPECT_EQ(v.violations[2].slot, "kernel");
  EXPECT_EQ(v.violations[3].slot, "crossbar_size");

  Rollout short_r{{{16, 3}}, {64, 8, 2}};
  const auto w = validate(short_r, s);
  ASSERT_FALSE(w.ok());
  EXPECT_EQ(w.violations[0].kind, ViolationKind::kLengthMismatch);
}

TEST(DesignSpace, RenderRollout) {
  Rollout r{{{32, 3}, {64, 5}}, {128, 6, 2}};
  EXPECT_EQ(render_rollout(r), "[[32,3],[64,5],[128,6,2]]");
}

TEST(Lints, ChannelRules) {
  Backbone b;
  b.num_conv_layers = 3;
  b.pool_after = {};
  b.input_shape.channels = 16;
  Rollout r{{{16, 3}, {128, 3}, {32, 3}}, {128, 8, 2}};
  const auto flags = heuristic_lints(r, b);
  EXPECT_EQ(flags, (std::vector<LintFlag>{{LintKind::kChannelExplosion, 1},
                                          {LintKind::kChannelDecrease, 2}}));
}

TEST(Lints, KernelRules) {
  Backbone b;
  b.num_conv_layers = 3;
  b.pool_after = {0, 1};
  b.input_shape = {8, 8, 16};
  // Layer 1 jumps 1 -> 7; layer 2 sees a 2x2 map, so only kernels <= 3 fit.
  Rollout r{{{16, 1}, {16, 7}, {16, 5}}, {128, 8, 2}};
  const auto flags = heuristic_lints(r, b);
  EXPECT_EQ(flags, (std::vector<LintFlag>{{LintKind::kDegenerateKernel, 1},
                                          {LintKind::kDegenerateKernel, 2}}));
  Rollout ok{{{16, 3}, {32, 5}, {32, 3}}, {128, 8, 2}};
  EXPECT_TRUE(heuristic_lints(ok, b).empty());
}

}  // namespace
}  // namespace lcda

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

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcda {

/// Per-layer options: output-channel counts and odd square kernel edges.
struct LayerChoice {
  std::vector<int> channel_options;
  std::vector<int> kernel_options;

  bool operator==(const LayerChoice&) const = default;
};

/// Hardware hyperparameter options plus the chip area budget (um^2).
struct HardwareChoice {
  std::vector<int> crossbar_sizes;
  std::vector<int> adc_resolutions;
  std::vector<int> device_precisions;
  double area_budget = 0.0;

  bool operator==(const HardwareChoice&) const = default;
};

struct InputShape {
  int height = 32;
  int width = 32;
  int channels = 3;

  bool operator==(const InputShape&) const = default;
};

/// Fixed part of the network: everything the search does not choose.
struct Backbone {
  int num_conv_layers = 6;
  int num_fc_layers = 2;
  int fc_hidden_size = 1024;
  InputShape input_shape;
  int num_classes = 10;
  std::set<int> pool_after = {1, 3, 5};

  bool operator==(const Backbone&) const = default;

  /// Spatial size (height, width) entering conv layer `index`; index ==
  /// num_conv_layers gives the size after the last conv/pool stage.
  std::pair<int, int> spatial_before(int index) const;

  /// Throws std::invalid_argument when the backbone is not well formed.
  void check() const;
};

struct LayerSpec {
  int out_channels = 0;
  int kernel = 0;

  auto operator<=>(const LayerSpec&) const = default;
};

struct HardwareSpec {
  int crossbar_size = 0;
  int adc_resolution = 0;
  int device_precision = 0;

  auto operator<=>(const HardwareSpec&) const = default;
};

/// One point of the search: per-conv-layer (channels, kernel) plus hardware.
struct Rollout {
  std::vector<LayerSpec> layers;
  HardwareSpec hardware;

  auto operator<=>(const Rollout&) const = default;
};

struct DesignSpace {
  std::vector<LayerChoice> layers;  // one entry per conv layer
  HardwareChoice hardware;
  Backbone backbone;

  bool operator==(const DesignSpace&) const = default;

  /// Throws std::invalid_argument when an option list is empty, unsorted,
  /// non-positive, holds an even kernel, or the layer count disagrees with
  /// the backbone.
  void check() const;
};

/// Reference defaults: six conv layers, channels {16,32,64,128}, kernels
/// {1,3,5,7}, crossbar {64,128,256}, ADC {4,6,8}, cell precision {1,2,4}.
/// The area budget is left at zero; see cim_cost default_area_budget().
DesignSpace default_design_space();

/// Same layer options broadcast over `backbone.num_conv_layers` layers.
DesignSpace uniform_design_space(const Backbone& backbone, const LayerChoice& layer,
                                 const HardwareChoice& hardware);

enum class ViolationKind { kLengthMismatch, kOutOfVocabulary, kEvenKernel };

struct Violation {
  ViolationKind kind;
  int index = -1;      // conv layer index, or -1 for hardware / arity
  std::string slot;    // "out_channels", "kernel", "crossbar_size", ...
  int64_t value = 0;   // offending value (length for kLengthMismatch)
  std::vector<int> allowed;

  std::string describe() const;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

ValidationResult validate(const Rollout& rollout, const DesignSpace& space);

class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number of rollouts in the space, saturating at UINT64_MAX.
uint64_t space_size(const DesignSpace& space);

/// Yields every rollout of a space once, in lexicographic order of option
/// indices (layer 0 channel most significant, device precision least).
class RolloutEnumerator {
 public:
  static constexpr uint64_t kDefaultCap = 1'000'000;

  explicit RolloutEnumerator(const DesignSpace& space, uint64_t cap = kDefaultCap);

  std::optional<Rollout> next();
  uint64_t size() const { return size_; }

 private:
  Rollout materialize() const;

  const DesignSpace& space_;
  std::vector<size_t> radix_;
  std::vector<size_t> digits_;
  uint64_t size_ = 0;
  bool done_ = false;
};

/// Convenience wrapper collecting the whole enumeration.
std::vector<Rollout> enumerate(const DesignSpace& space,
                               uint64_t cap = RolloutEnumerator::kDefaultCap);

enum class LintKind {
  kChannelDecrease,   // out_channels < in_channels
  kChannelExplosion,  // out_channels > 4 * in_channels
  kDegenerateKernel,  // 1 <-> 7 style kernel jump, or kernel wider than the feature map
};

struct LintFlag {
  LintKind kind;
  int layer = 0;

  bool operator==(const LintFlag&) const = default;
};

const char* lint_name(LintKind kind);

/// Advisory design-quality flags; channels are chained from the backbone
/// input channels.
std::vector<LintFlag> heuristic_lints(const Rollout& rollout, const Backbone& backbone);

/// Compact "[[c,k],...,[xbar,adc,prec]]" rendering used in prompts and logs.
std::string render_rollout(const Rollout& rollout);

}  // namespace lcda

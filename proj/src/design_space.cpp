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
#include "lcda/design_space.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace lcda {

namespace {

void check_options(const std::vector<int>& options, const std::string& what) {
  if (options.empty()) {
    throw std::invalid_argument(what + ": option list is empty");
  }
  for (size_t i = 0; i < options.size(); ++i) {
    if (options[i] < 1) {
      throw std::invalid_argument(what + ": options must be >= 1");
    }
    if (i > 0 && options[i] <= options[i - 1]) {
      throw std::invalid_argument(what + ": options must be strictly increasing");
    }
  }
}

bool contains(const std::vector<int>& options, int value) {
  return std::binary_search(options.begin(), options.end(), value);
}

std::string join(const std::vector<int>& values) {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < values.size(); ++i) {
    os << (i ? ", " : "") << values[i];
  }
  os << "}";
  return os.str();
}

}  // namespace

std::pair<int, int> Backbone::spatial_before(int index) const {
  int h = input_shape.height;
  int w = input_shape.width;
  for (int i = 0; i < index && i < num_conv_layers; ++i) {
    if (pool_after.count(i)) {
      h /= 2;
      w /= 2;
    }
  }
  return {h, w};
}

void Backbone::check() const {
  if (num_conv_layers < 1 || num_fc_layers < 1 || fc_hidden_size < 1 || num_classes < 1) {
    throw std::invalid_argument("backbone: layer counts and sizes must be positive");
  }
  if (input_shape.height < 1 || input_shape.width < 1 || input_shape.channels < 1) {
    throw std::invalid_argument("backbone: input shape must be positive");
  }
  for (int idx : pool_after) {
    if (idx < 0 || idx >= num_conv_layers) {
      throw std::invalid_argument("backbone: pool_after index " + std::to_string(idx) +
                                  " outside conv layers");
    }
  }
  auto [h, w] = spatial_before(num_conv_layers);
  if (h < 1 || w < 1) {
    throw std::invalid_argument("backbone: pooling collapses the spatial size below 1");
  }
}

void DesignSpace::check() const {
  backbone.check();
  if (static_cast<int>(layers.size()) != backbone.num_conv_layers) {
    throw std::invalid_argument("design space: " + std::to_string(layers.size()) +
                                " layer choices for a " +
                                std::to_string(backbone.num_conv_layers) + "-layer backbone");
  }
  for (size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i);
    check_options(layers[i].channel_options, where + " channels");
    check_options(layers[i].kernel_options, where + " kernels");
    for (int k : layers[i].kernel_options) {
      if (k % 2 == 0) {
        throw std::invalid_argument(where + ": kernel options must be odd");
      }
    }
  }
  check_options(hardware.crossbar_sizes, "crossbar sizes");
  check_options(hardware.adc_resolutions, "ADC resolutions");
  check_options(hardware.device_precisions, "device precisions");
  if (!(hardware.area_budget > 0.0)) {
    throw std::invalid_argument("area budget must be > 0");
  }
}

DesignSpace uniform_design_space(const Backbone& backbone, const LayerChoice& layer,
                                 const HardwareChoice& hardware) {
  DesignSpace space;
  space.backbone = backbone;
  space.layers.assign(static_cast<size_t>(std::max(backbone.num_conv_layers, 0)), layer);
  space.hardware = hardware;
  return space;
}

DesignSpace default_design_space() {
  HardwareChoice hw;
  hw.crossbar_sizes = {64, 128, 256};
  hw.adc_resolutions = {4, 6, 8};
  hw.device_precisions = {1, 2, 4};
  return uniform_design_space(Backbone{}, LayerChoice{{16, 32, 64, 128}, {1, 3, 5, 7}}, hw);
}

std::string Violation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case ViolationKind::kLengthMismatch:
      os << "length mismatch: got " << value << " layers, expected " << allowed.at(0);
      break;
    case ViolationKind::kOutOfVocabulary:
      os << "out-of-vocabulary " << slot;
      if (index >= 0) os << " at layer " << index;
      os << ": " << value << " not in " << join(allowed);
      break;
    case ViolationKind::kEvenKernel:
      os << "non-odd kernel at layer " << index << ": " << value;
      break;
  }
  return os.str();
}

std::string ValidationResult::describe() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.describe();
  }
  return out.empty() ? "ok" : out;
}

ValidationResult validate(const Rollout& rollout, const DesignSpace& space) {
  ValidationResult result;
  const int expected = space.backbone.num_conv_layers;
  if (static_cast<int>(rollout.layers.size()) != expected) {
    result.violations.push_back({ViolationKind::kLengthMismatch, -1, "layers",
                                 static_cast<int64_t>(rollout.layers.size()), {expected}});
    return result;
  }
  for (size_t i = 0; i < rollout.layers.size(); ++i) {
    const auto& spec = rollout.layers[i];
    const auto& choice = space.layers.at(i);
    const int idx = static_cast<int>(i);
    if (!contains(choice.channel_options, spec.out_channels)) {
      result.violations.push_back({ViolationKind::kOutOfVocabulary, idx, "out_channels",
                                   spec.out_channels, choice.channel_options});
    }
    if (spec.kernel % 2 == 0) {
      result.violations.push_back(
          {ViolationKind::kEvenKernel, idx, "kernel", spec.kernel, choice.kernel_options});
    }
    if (!contains(choice.kernel_options, spec.kernel)) {
      result.violations.push_back({ViolationKind::kOutOfVocabulary, idx, "kernel", spec.kernel,
                                   choice.kernel_options});
    }
  }
  const auto& hw = rollout.hardware;
  const auto& opts = space.hardware;
  if (!contains(opts.crossbar_sizes, hw.crossbar_size)) {
    result.violations.push_back({ViolationKind::kOutOfVocabulary, -1, "crossbar_size",
                                 hw.crossbar_size, opts.crossbar_sizes});
  }
  if (!contains(opts.adc_resolutions, hw.adc_resolution)) {
    result.violations.push_back({ViolationKind::kOutOfVocabulary, -1, "adc_resolution",
                                 hw.adc_resolution, opts.adc_resolutions});
  }
  if (!contains(opts.device_precisions, hw.device_precision)) {
    result.violations.push_back({ViolationKind::kOutOfVocabulary, -1, "device_precision",
                                 hw.device_precision, opts.device_precisions});
  }
  return result;
}

namespace {

std::vector<size_t> radices(const DesignSpace& space) {
  std::vector<size_t> radix;
  for (const auto& layer : space.layers) {
    radix.push_back(layer.channel_options.size());
    radix.push_back(layer.kernel_options.size());
  }
  radix.push_back(space.hardware.crossbar_sizes.size());
  radix.push_back(space.hardware.adc_resolutions.size());
  radix.push_back(space.hardware.device_precisions.size());
  return radix;
}

}  // namespace

uint64_t space_size(const DesignSpace& space) {
  uint64_t total = 1;
  for (size_t r : radices(space)) {
    if (r == 0) return 0;
    if (total > std::numeric_limits<uint64_t>::max() / r) {
      return std::numeric_limits<uint64_t>::max();
    }
    total *= r;
  }
  return total;
}

RolloutEnumerator::RolloutEnumerator(const DesignSpace& space, uint64_t cap)
    : space_(space), radix_(radices(space)), digits_(radix_.size(), 0) {
  size_ = space_size(space);
  if (size_ > cap) {
    throw EnumerationCapExceeded("design space holds " +
                                 (size_ == std::numeric_limits<uint64_t>::max()
                                      ? std::string("more than 2^64")
                                      : std::to_string(size_)) +
                                 " rollouts, above the enumeration cap of " +
                                 std::to_string(cap));
  }
  done_ = size_ == 0;
}

Rollout RolloutEnumerator::materialize() const {
  Rollout r;
  size_t d = 0;
  for (const auto& layer : space_.layers) {
    LayerSpec spec;
    spec.out_channels = layer.channel_options[digits_[d++]];
    spec.kernel = layer.kernel_options[digits_[d++]];
    r.layers.push_back(spec);
  }
  r.hardware.crossbar_size = space_.hardware.crossbar_sizes[digits_[d++]];
  r.hardware.adc_resolution = space_.hardware.adc_resolutions[digits_[d++]];
  r.hardware.device_precision = space_.hardware.device_precisions[digits_[d++]];
  return r;
}

std::optional<Rollout> RolloutEnumerator::next() {
  if (done_) return std::nullopt;
  Rollout current = materialize();
  // Odometer increment, least significant digit last.
  size_t pos = digits_.size();
  while (pos > 0) {
    --pos;
    if (++digits_[pos] < radix_[pos]) break;
    digits_[pos] = 0;
    if (pos == 0) done_ = true;
  }
  if (digits_.empty()) done_ = true;
  return current;
}

std::vector<Rollout> enumerate(const DesignSpace& space, uint64_t cap) {
  RolloutEnumerator it(space, cap);
  std::vector<Rollout> out;
  out.reserve(static_cast<size_t>(it.size()));
  while (auto r = it.next()) out.push_back(std::move(*r));
  return out;
}

const char* lint_name(LintKind kind) {
  switch (kind) {
    case LintKind::kChannelDecrease:
      return "channel_decrease";
    case LintKind::kChannelExplosion:
      return "channel_explosion";
    case LintKind::kDegenerateKernel:
      return "degenerate_kernel";
  }
  return "unknown";
}

std::vector<LintFlag> heuristic_lints(const Rollout& rollout, const Backbone& backbone) {
  std::vector<LintFlag> flags;
  int in_channels = backbone.input_shape.channels;
  for (size_t i = 0; i < rollout.layers.size(); ++i) {
    const auto& layer = rollout.layers[i];
    const int idx = static_cast<int>(i);
    if (layer.out_channels < in_channels) {
      flags.push_back({LintKind::kChannelDecrease, idx});
    }
    if (static_cast<int64_t>(layer.out_channels) > 4 * static_cast<int64_t>(in_channels)) {
      flags.push_back({LintKind::kChannelExplosion, idx});
    }
    auto [h, w] = backbone.spatial_before(idx);
    const bool wider_than_map = layer.kernel > 2 * std::min(h, w) - 1;
    const bool extreme_jump =
        i > 0 && std::abs(layer.kernel - rollout.layers[i - 1].kernel) >= 6;
    if (wider_than_map || extreme_jump) {
      flags.push_back({LintKind::kDegenerateKernel, idx});
    }
    in_channels = layer.out_channels;
  }
  return flags;
}

std::string render_rollout(const Rollout& rollout) {
  std::string out = "[";
  for (size_t i = 0; i < rollout.layers.size(); ++i) {
    if (i) out += ",";
    out += "[" + std::to_string(rollout.layers[i].out_channels) + "," +
           std::to_string(rollout.layers[i].kernel) + "]";
  }
  if (!rollout.layers.empty()) out += ",";
  const auto& hw = rollout.hardware;
  out += "[" + std::to_string(hw.crossbar_size) + "," + std::to_string(hw.adc_resolution) +
         "," + std::to_string(hw.device_precision) + "]]";
  return out;
}

}  // namespace lcda

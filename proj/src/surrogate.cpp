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
#include "lcda/surrogate.hpp"

#include <algorithm>
#include <cmath>

namespace lcda {

int64_t parameter_count(const Rollout& rollout, const Backbone& backbone) {
  int64_t total = 0;
  int64_t channels = backbone.input_shape.channels;
  for (const auto& layer : rollout.layers) {
    total += static_cast<int64_t>(layer.kernel) * layer.kernel * channels * layer.out_channels +
             layer.out_channels;
    channels = layer.out_channels;
  }
  auto [h, w] = backbone.spatial_before(static_cast<int>(rollout.layers.size()));
  int64_t features = channels * h * w;
  for (int f = 0; f < backbone.num_fc_layers; ++f) {
    const int64_t out = f + 1 == backbone.num_fc_layers ? backbone.num_classes
                                                        : backbone.fc_hidden_size;
    total += features * out + out;
    features = out;
  }
  return total;
}

int64_t max_conv_fan_in(const Rollout& rollout, const Backbone& backbone) {
  int64_t best = 0;
  int64_t channels = backbone.input_shape.channels;
  for (const auto& layer : rollout.layers) {
    best = std::max(best, static_cast<int64_t>(layer.kernel) * layer.kernel * channels);
    channels = layer.out_channels;
  }
  return best;
}

double surrogate_accuracy(const Rollout& rollout, const Backbone& backbone, double sigma,
                          const SurrogateCoefficients& c) {
  const double log_params = std::log(static_cast<double>(parameter_count(rollout, backbone)));
  const double capacity = 1.0 / (1.0 + std::exp(-(log_params - c.log_center) / c.log_scale));
  const double clean = c.floor + (c.ceiling - c.floor) * capacity;
  const double penalty =
      c.penalty * sigma * std::sqrt(static_cast<double>(max_conv_fan_in(rollout, backbone)));
  return std::clamp(clean - penalty, 0.0, 1.0);
}

}  // namespace lcda

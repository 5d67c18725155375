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

#include <cstdint>

#include "lcda/design_space.hpp"

namespace lcda {

// Non-physical accuracy proxy. It exists so search mechanics can be exercised
// over whole spaces without training networks; it makes no accuracy claims.
//
//   acc = floor + (ceiling - floor) * logistic((ln P - log_center) / log_scale)
//         - penalty * sigma * sqrt(max conv fan-in)
//
// clamped to [0, 1], where P is the trainable parameter count and fan-in is
// K*K*C_in of a conv layer.
struct SurrogateCoefficients {
  double floor = 0.10;
  double ceiling = 0.95;
  double log_center = 13.5;
  double log_scale = 0.8;
  double penalty = 0.02;
};

/// Weights plus biases of every conv and FC layer.
int64_t parameter_count(const Rollout& rollout, const Backbone& backbone);

int64_t max_conv_fan_in(const Rollout& rollout, const Backbone& backbone);

double surrogate_accuracy(const Rollout& rollout, const Backbone& backbone, double sigma,
                          const SurrogateCoefficients& coeffs = {});

}  // namespace lcda

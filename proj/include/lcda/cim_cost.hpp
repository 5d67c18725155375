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
#include <stdexcept>
#include <vector>

#include "lcda/design_space.hpp"

namespace lcda {

// Analytic crossbar cost model. Every layer is unrolled into a weight matrix
// of (K*K*C_in) rows by (C_out * cells_per_weight) columns and tiled onto
// R x R arrays. One array evaluates one matrix-vector product per cycle.

struct UnitCosts {
  double read_energy_per_cell = 0.1;         // pJ
  double adc_energy_per_conversion = 2.0;    // pJ
  double cycle_time = 100.0;                 // ns
  double cell_area = 0.05;                   // um^2
  double adc_area = 1500.0;                  // um^2

  bool operator==(const UnitCosts&) const = default;
};

struct HardwareConfig {
  int crossbar_size = 128;
  int adc_resolution = 8;
  int device_precision = 2;
  int weight_bits = 8;
  UnitCosts unit_costs;
  double area_budget = 0.0;

  int cells_per_weight() const;
  void check() const;
};

HardwareConfig make_hardware_config(const HardwareSpec& spec, const UnitCosts& costs,
                                    int weight_bits, double area_budget);

/// A conv layer with stride 1 and same padding. FC layers are kernel 1 on a
/// 1x1 grid with in_channels set to the flattened input size.
struct LayerShape {
  int kernel = 1;
  int64_t in_channels = 0;
  int64_t out_channels = 0;
  int in_height = 1;
  int in_width = 1;

  bool operator==(const LayerShape&) const = default;
};

struct LayerMapping {
  int64_t rows_needed = 0;
  int64_t cols_needed = 0;
  int64_t tiles_rows = 0;
  int64_t tiles_cols = 0;
  double utilization = 0.0;
  int64_t activations = 0;

  int64_t tiles() const { return tiles_rows * tiles_cols; }
  bool operator==(const LayerMapping&) const = default;
};

struct LayerCost {
  LayerMapping mapping;
  double energy = 0.0;   // pJ
  double latency = 0.0;  // ns
  double area = 0.0;     // um^2
};

struct CostReport {
  double energy = 0.0;   // pJ
  double latency = 0.0;  // ns
  double area = 0.0;     // um^2
  std::vector<LayerCost> per_layer;
  bool valid = true;
};

class MappingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

LayerMapping map_layer(const LayerShape& layer, const HardwareConfig& hw);

LayerCost layer_cost(const LayerShape& layer, const HardwareConfig& hw);

CostReport cost(const std::vector<LayerShape>& network, const HardwareConfig& hw);

/// Area budget is inclusive.
bool check_validity(const CostReport& report, const HardwareConfig& hw);

/// Crossbar-visible layer list (convs then FCs) for a rollout on a backbone.
std::vector<LayerShape> network_shapes(const Rollout& rollout, const Backbone& backbone);

/// 1.2x the area of the largest rollout of `space` mapped at `reference_crossbar`.
/// Area grows with channels and kernels and shrinks with cell precision, so
/// the largest rollout takes the top option everywhere and the lowest precision.
double default_area_budget(const DesignSpace& space, const UnitCosts& costs, int weight_bits,
                           int reference_crossbar = 128);

}  // namespace lcda

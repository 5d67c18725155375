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
#include "lcda/cim_cost.hpp"

#include <algorithm>
#include <string>

namespace lcda {

namespace {

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

}  // namespace

int HardwareConfig::cells_per_weight() const {
  return static_cast<int>(ceil_div(weight_bits, device_precision));
}

void HardwareConfig::check() const {
  if (crossbar_size < 1 || adc_resolution < 1 || device_precision < 1 || weight_bits < 1) {
    throw std::invalid_argument("hardware config: sizes and bit widths must be positive");
  }
  const auto& u = unit_costs;
  if (!(u.read_energy_per_cell > 0 && u.adc_energy_per_conversion > 0 && u.cycle_time > 0 &&
        u.cell_area > 0 && u.adc_area > 0)) {
    throw std::invalid_argument("hardware config: unit costs must be positive");
  }
  if (!(area_budget > 0)) {
    throw std::invalid_argument("hardware config: area budget must be positive");
  }
}

HardwareConfig make_hardware_config(const HardwareSpec& spec, const UnitCosts& costs,
                                    int weight_bits, double area_budget) {
  HardwareConfig hw;
  hw.crossbar_size = spec.crossbar_size;
  hw.adc_resolution = spec.adc_resolution;
  hw.device_precision = spec.device_precision;
  hw.weight_bits = weight_bits;
  hw.unit_costs = costs;
  hw.area_budget = area_budget;
  return hw;
}

LayerMapping map_layer(const LayerShape& layer, const HardwareConfig& hw) {
  if (hw.crossbar_size < 1 || hw.device_precision < 1 || hw.weight_bits < 1) {
    throw MappingError("map_layer: crossbar size and bit widths must be positive");
  }
  if (layer.in_height < 1 || layer.in_width < 1) {
    throw MappingError("map_layer: empty spatial grid");
  }
  LayerMapping m;
  const int64_t r = hw.crossbar_size;
  m.rows_needed = static_cast<int64_t>(layer.kernel) * layer.kernel * layer.in_channels;
  m.cols_needed = layer.out_channels * hw.cells_per_weight();
  if (m.rows_needed <= 0 || m.cols_needed <= 0) {
    throw MappingError("map_layer: layer needs " + std::to_string(m.rows_needed) + " rows x " +
                       std::to_string(m.cols_needed) + " columns");
  }
  m.tiles_rows = ceil_div(m.rows_needed, r);
  m.tiles_cols = ceil_div(m.cols_needed, r);
  m.utilization = static_cast<double>(m.rows_needed) * static_cast<double>(m.cols_needed) /
                  (static_cast<double>(m.tiles_rows * m.tiles_cols) * static_cast<double>(r * r));
  m.activations = static_cast<int64_t>(layer.in_height) * layer.in_width;
  return m;
}

LayerCost layer_cost(const LayerShape& layer, const HardwareConfig& hw) {
  LayerCost c;
  c.mapping = map_layer(layer, hw);
  const auto& m = c.mapping;
  const auto& u = hw.unit_costs;
  const double r = hw.crossbar_size;
  const double acts = static_cast<double>(m.activations);

  // Each tile of column band j drives min(R, cols_needed - j*R) ADC columns.
  double energy_per_activation = 0.0;
  for (int64_t j = 0; j < m.tiles_cols; ++j) {
    const int64_t active_cols = std::min<int64_t>(hw.crossbar_size, m.cols_needed - j * hw.crossbar_size);
    energy_per_activation += static_cast<double>(m.tiles_rows) *
                             (r * u.read_energy_per_cell +
                              static_cast<double>(active_cols) * u.adc_energy_per_conversion);
  }
  c.energy = acts * energy_per_activation;
  // Column bands run in parallel; row bands serialize.
  c.latency = acts * static_cast<double>(m.tiles_rows) * u.cycle_time;
  c.area = static_cast<double>(m.tiles()) * (r * r * u.cell_area + r * u.adc_area);
  return c;
}

CostReport cost(const std::vector<LayerShape>& network, const HardwareConfig& hw) {
  CostReport report;
  for (const auto& layer : network) {
    report.per_layer.push_back(layer_cost(layer, hw));
    const auto& c = report.per_layer.back();
    report.energy += c.energy;
    report.latency += c.latency;
    report.area += c.area;
  }
  report.valid = check_validity(report, hw);
  return report;
}

bool check_validity(const CostReport& report, const HardwareConfig& hw) {
  return report.area <= hw.area_budget;
}

std::vector<LayerShape> network_shapes(const Rollout& rollout, const Backbone& backbone) {
  std::vector<LayerShape> shapes;
  int64_t channels = backbone.input_shape.channels;
  for (size_t i = 0; i < rollout.layers.size(); ++i) {
    auto [h, w] = backbone.spatial_before(static_cast<int>(i));
    LayerShape s;
    s.kernel = rollout.layers[i].kernel;
    s.in_channels = channels;
    s.out_channels = rollout.layers[i].out_channels;
    s.in_height = h;
    s.in_width = w;
    shapes.push_back(s);
    channels = s.out_channels;
  }
  auto [h, w] = backbone.spatial_before(static_cast<int>(rollout.layers.size()));
  int64_t features = channels * h * w;
  for (int f = 0; f < backbone.num_fc_layers; ++f) {
    const bool last = f + 1 == backbone.num_fc_layers;
    LayerShape s;
    s.kernel = 1;
    s.in_channels = features;
    s.out_channels = last ? backbone.num_classes : backbone.fc_hidden_size;
    shapes.push_back(s);
    features = s.out_channels;
  }
  return shapes;
}

double default_area_budget(const DesignSpace& space, const UnitCosts& costs, int weight_bits,
                           int reference_crossbar) {
  Rollout largest;
  for (const auto& layer : space.layers) {
    largest.layers.push_back({layer.channel_options.back(), layer.kernel_options.back()});
  }
  HardwareConfig hw;
  hw.crossbar_size = reference_crossbar;
  hw.adc_resolution = space.hardware.adc_resolutions.back();
  hw.device_precision = space.hardware.device_precisions.front();
  hw.weight_bits = weight_bits;
  hw.unit_costs = costs;
  hw.area_budget = 1.0;
  const auto report = cost(network_shapes(largest, space.backbone), hw);
  return 1.2 * report.area;
}

}  // namespace lcda

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

// Independent reference implementations used by the unit and acceptance tests.

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "lcda/cim_cost.hpp"
#include "lcda/search.hpp"

namespace lcda::oracle {

// Packs every weight bit-slice into a cell, one crossbar at a time, and reads
// the mapping back from the set of crossbars that received at least one cell.
inline LayerMapping pack_cells(const LayerShape& layer, int crossbar, int weight_bits,
                               int precision) {
  int slices = 0;
  for (int covered = 0; covered < weight_bits; covered += precision) ++slices;

  std::set<std::pair<int64_t, int64_t>> arrays;
  std::set<int64_t> array_rows, array_cols;
  int64_t cells = 0;
  int64_t row = 0;
  for (int ky = 0; ky < layer.kernel; ++ky) {
    for (int kx = 0; kx < layer.kernel; ++kx) {
      for (int64_t c = 0; c < layer.in_channels; ++c, ++row) {
        int64_t col = 0;
        for (int64_t o = 0; o < layer.out_channels; ++o) {
          for (int s = 0; s < slices; ++s, ++col) {
            arrays.insert({row / crossbar, col / crossbar});
            array_rows.insert(row / crossbar);
            array_cols.insert(col / crossbar);
            ++cells;
          }
        }
      }
    }
  }
  LayerMapping m;
  m.rows_needed = row;
  m.cols_needed = layer.out_channels * slices;
  m.tiles_rows = static_cast<int64_t>(array_rows.size());
  m.tiles_cols = static_cast<int64_t>(array_cols.size());
  m.utilization = static_cast<double>(cells) /
                  (static_cast<double>(arrays.size()) * crossbar * crossbar);
  // Stride 1, same padding: one output position per window centre.
  int64_t positions = 0;
  for (int y = 0; y < layer.in_height; ++y)
    for (int x = 0; x < layer.in_width; ++x) ++positions;
  m.activations = positions;
  return m;
}

// Quadratic domination check, maximising accuracy and minimising `metric`.
inline std::vector<size_t> pareto_quadratic(const std::vector<EvalRecord>& h, CostMetric metric) {
  std::vector<size_t> front;
  for (size_t i = 0; i < h.size(); ++i) {
    bool dominated = false;
    for (size_t j = 0; j < h.size() && !dominated; ++j) {
      const double ai = h[i].accuracy, aj = h[j].accuracy;
      const double mi = metric_value(h[i].cost, metric), mj = metric_value(h[j].cost, metric);
      dominated = aj >= ai && mj <= mi && (aj > ai || mj < mi);
    }
    if (!dominated) front.push_back(i);
  }
  return front;
}

}  // namespace lcda::oracle

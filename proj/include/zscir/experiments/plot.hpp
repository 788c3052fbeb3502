// Copyright 2026 The zscir Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef ZSCIR_EXPERIMENTS_PLOT_HPP_
#define ZSCIR_EXPERIMENTS_PLOT_HPP_

#include <string>
#include <vector>

#include "zscir/common/image.hpp"

namespace zscir {

struct PlotSeries {
  std::vector<double> y;
  double r = 0.0, g = 0.0, b = 0.0;
};

// Line chart over x positions on a log10 axis with a 0..100 y axis. Tick
// labels show the x values and y percentages.
Image RenderLogPlot(const std::vector<double>& x, const std::vector<PlotSeries>& series, int width = 480,
                    int height = 320);

}  // namespace zscir

#endif  // ZSCIR_EXPERIMENTS_PLOT_HPP_

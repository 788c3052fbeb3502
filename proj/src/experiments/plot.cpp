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


#include "zscir/experiments/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "zscir/common/error.hpp"

namespace zscir {

namespace {

// 3x5 glyphs, one row per entry, high bit on the left.
const std::array<std::array<uint8_t, 5>, 10> kDigits = {{
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
}};

void Put(Image& img, int x, int y, double r, double g, double b) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  img.at(y, x, 0) = r;
  img.at(y, x, 1) = g;
  img.at(y, x, 2) = b;
}

void Line(Image& img, int x0, int y0, int x1, int y1, double r, double g, double b) {
  const int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0));
  for (int i = 0; i <= steps; ++i) {
    const double t = steps == 0 ? 0.0 : static_cast<double>(i) / steps;
    const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    for (int dy = 0; dy <= 1; ++dy) Put(img, x, y + dy, r, g, b);
  }
}

// Draws digits only; other characters advance the cursor.
void Text(Image& img, int x, int y, const std::string& s, int scale = 2) {
  for (char ch : s) {
    if (ch >= '0' && ch <= '9') {
      const auto& glyph = kDigits[static_cast<size_t>(ch - '0')];
      for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 3; ++col)
          if (glyph[static_cast<size_t>(row)] & (4 >> col))
            for (int sy = 0; sy < scale; ++sy)
              for (int sx = 0; sx < scale; ++sx) Put(img, x + col * scale + sx, y + row * scale + sy, 0, 0, 0);
    }
    x += 4 * scale;
  }
}

}  // namespace

Image RenderLogPlot(const std::vector<double>& x, const std::vector<PlotSeries>& series, int width, int height) {
  Require(!x.empty(), ErrorCode::kInvalidConfig, "plot needs at least one point");
  for (double v : x) Require(v > 0.0, ErrorCode::kInvalidConfig, "log axis needs positive x values");
  for (const PlotSeries& s : series) {
    Require(s.y.size() == x.size(), ErrorCode::kShapeMismatch, "series length differs from x");
  }
  Image img(height, width, 3);
  std::fill(img.pixels.begin(), img.pixels.end(), 1.0);
  const int left = 48, right = width - 20, top = 16, bottom = height - 36;
  const double lx0 = std::log10(*std::min_element(x.begin(), x.end()));
  const double lx1 = std::log10(*std::max_element(x.begin(), x.end()));
  const double span = lx1 > lx0 ? lx1 - lx0 : 1.0;
  auto px = [&](double v) {
    const double t = lx1 > lx0 ? (std::log10(v) - lx0) / span : 0.5;
    return static_cast<int>(std::lround(left + t * (right - left)));
  };
  auto py = [&](double pct) {
    return static_cast<int>(std::lround(bottom - std::clamp(pct, 0.0, 100.0) / 100.0 * (bottom - top)));
  };

  for (int p = 0; p <= 100; p += 20) {
    const int y = py(p);
    Line(img, left, y, right, y, 0.9, 0.9, 0.9);
    Text(img, 8, y - 5, std::to_string(p));
  }
  Line(img, left, bottom, right, bottom, 0, 0, 0);
  Line(img, left, top, left, bottom, 0, 0, 0);
  for (double v : x) {
    const int xp = px(v);
    Line(img, xp, bottom, xp, bottom + 4, 0, 0, 0);
    char label[32];
    std::snprintf(label, sizeof(label), "%.0f", v);
    const int w = static_cast<int>(std::string(label).size()) * 8;
    Text(img, xp - w / 2, bottom + 10, label);
  }
  for (const PlotSeries& s : series) {
    for (size_t i = 0; i < x.size(); ++i) {
      const int xp = px(x[i]), yp = py(s.y[i]);
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) Put(img, xp + dx, yp + dy, s.r, s.g, s.b);
      if (i > 0) Line(img, px(x[i - 1]), py(s.y[i - 1]), xp, yp, s.r, s.g, s.b);
    }
  }
  return img;
}

}  // namespace zscir

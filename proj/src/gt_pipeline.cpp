/*
 * Copyright 2026 The maskcount Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gt_pipeline.hpp"

#include <cmath>

namespace maskcount {

namespace {

int pixel_of(double v) { return static_cast<int>(std::floor(v)); }

}  // namespace

void validate_annotation(const PointAnnotation& ann) {
  MC_CHECK(ann.width > 0 && ann.height > 0, DataError, "annotation has non-positive image dimensions");
  for (std::size_t i = 0; i < ann.points.size(); ++i) {
    const auto& p = ann.points[i];
    if (!(p.x >= 0.0 && p.x < ann.width && p.y >= 0.0 && p.y < ann.height))
      throw DataError("point " + std::to_string(i) + " (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                      ") lies outside the " + std::to_string(ann.width) + "x" + std::to_string(ann.height) +
                      " image");
  }
}

DensityMap generate_density_map(const PointAnnotation& ann, const KernelConfig& kernel) {
  MC_CHECK(kernel.sigma > 0.0, UsageError, "sigma must be positive");
  MC_CHECK(kernel.radius >= 2.0 * kernel.sigma, UsageError, "radius must be at least 2*sigma");
  validate_annotation(ann);

  const int r = kernel.radius;
  const int side = 2 * r + 1;
  std::vector<double> g(static_cast<std::size_t>(side) * side);
  const double inv = 1.0 / (2.0 * kernel.sigma * kernel.sigma);
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) g[(dy + r) * side + (dx + r)] = std::exp(-(dx * dx + dy * dy) * inv);

  DensityMap d(ann.height, ann.width);
  for (const auto& p : ann.points) {
    const int cx = pixel_of(p.x);
    const int cy = pixel_of(p.y);
    const int y0 = std::max(cy - r, 0), y1 = std::min(cy + r, ann.height - 1);
    const int x0 = std::max(cx - r, 0), x1 = std::min(cx + r, ann.width - 1);
    double mass = 0.0;
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) mass += g[(y - cy + r) * side + (x - cx + r)];
    const double scale = 1.0 / mass;
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) d(y, x) += g[(y - cy + r) * side + (x - cx + r)] * scale;
  }
  return d;
}

void validate_density(const DensityMap& d) {
  auto v = d.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0)
      throw InvariantError("density value at index " + std::to_string(i) + " is negative or non-finite");
  }
}

ForegroundMask derive_mask(const DensityMap& d) {
  validate_density(d);
  ForegroundMask m(d.height(), d.width());
  auto src = d.values();
  auto dst = m.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? 1 : 0;
  return m;
}

DensityMap downsample_density(const DensityMap& d, int factor) {
  MC_CHECK(factor > 0, UsageError, "downsampling factor must be positive");
  if (factor == 1) return d;
  DensityMap out((d.height() + factor - 1) / factor, (d.width() + factor - 1) / factor);
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) out(y / factor, x / factor) += d(y, x);
  return out;
}

ForegroundMask downsample_mask(const ForegroundMask& m, int factor) {
  MC_CHECK(factor > 0, UsageError, "downsampling factor must be positive");
  if (factor == 1) return m;
  ForegroundMask out((m.height() + factor - 1) / factor, (m.width() + factor - 1) / factor);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(y, x) != 0) out(y / factor, x / factor) = 1;
  return out;
}

std::size_t count_points_in_roi(const PointAnnotation& ann, const RoiMask& roi) {
  std::size_t n = 0;
  for (const auto& p : ann.points) {
    const int x = pixel_of(p.x), y = pixel_of(p.y);
    if (y >= 0 && y < roi.height() && x >= 0 && x < roi.width() && roi(y, x) != 0) ++n;
  }
  return n;
}

RoiMask rasterize_polygon(const std::vector<Point>& polygon, int height, int width) {
  RoiMask roi(height, width);
  const std::size_t n = polygon.size();
  MC_CHECK(n >= 3, DataError, "ROI polygon needs at least three vertices");
  for (int y = 0; y < height; ++y) {
    const double py = y + 0.5;
    for (int x = 0; x < width; ++x) {
      const double px = x + 0.5;
      bool inside = false;
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = polygon[i];
        const Point& b = polygon[j];
        if ((a.y > py) != (b.y > py)) {
          const double xi = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
          if (px < xi) inside = !inside;
        }
      }
      roi(y, x) = inside ? 1 : 0;
    }
  }
  return roi;
}

}  // namespace maskcount

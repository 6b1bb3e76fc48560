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

#pragma once

#include <vector>

#include "grid.hpp"

namespace maskcount {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Dot annotations for one image, in pixel units.
struct PointAnnotation {
  int width = 0;
  int height = 0;
  std::vector<Point> points;

  std::size_t count() const noexcept { return points.size(); }
};

/// Fixed Gaussian kernel shared by every dataset.
struct KernelConfig {
  double sigma = 4.0;  // pixels
  int radius = 15;     // window is (2*radius+1)^2
};

/// Throws DataError naming the first point outside [0,width) x [0,height).
void validate_annotation(const PointAnnotation& ann);

/// Sum of truncated Gaussians, one per point, each renormalized to unit mass
/// after clipping to the image so border heads are not undercounted.
DensityMap generate_density_map(const PointAnnotation& ann, const KernelConfig& kernel = {});

/// Throws InvariantError on a negative or non-finite value.
void validate_density(const DensityMap& d);

/// mask = 1 where d > 0 (strict).
ForegroundMask derive_mask(const DensityMap& d);

/// Block-sum pooling; the input is implicitly zero-padded up to a multiple of `factor`.
DensityMap downsample_density(const DensityMap& d, int factor);

/// Any-of pooling, consistent with derive_mask(downsample_density(d)).
ForegroundMask downsample_mask(const ForegroundMask& m, int factor);

/// Zeroes everything outside the ROI.
template <typename G>
G apply_roi(const G& input, const RoiMask& roi) {
  MC_CHECK(input.same_shape(roi), InvariantError, "roi shape does not match input");
  G out = input;
  auto dst = out.values();
  auto r = roi.values();
  for (std::size_t i = 0; i < dst.size(); ++i)
    if (r[i] == 0) dst[i] = typename G::value_type{};
  return out;
}

/// Number of annotated points that fall on an ROI pixel.
std::size_t count_points_in_roi(const PointAnnotation& ann, const RoiMask& roi);

/// Rasterizes a polygon (even-odd rule, sampled at pixel centres).
RoiMask rasterize_polygon(const std::vector<Point>& polygon, int height, int width);

}  // namespace maskcount

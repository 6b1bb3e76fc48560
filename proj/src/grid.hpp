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

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace maskcount {

/// Dense row-major 2D grid. Base for the single-channel image-space types.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int height, int width, T fill = T{}) : height_(height), width_(width) {
    MC_CHECK(height >= 0 && width >= 0, UsageError, "grid dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int y, int x) { return data_[index(y, x)]; }
  const T& operator()(int y, int x) const { return data_[index(y, x)]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return height_ == other.height() && width_ == other.width();
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
  }

 private:
  std::size_t index(int y, int x) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

/// Non-negative people-per-pixel grid whose sum is the object count.
class DensityMap : public Grid<double> {
 public:
  using Grid::Grid;
  double total() const { return std::accumulate(values().begin(), values().end(), 0.0); }
};

/// Binary foreground/background grid, 1 where density is positive.
class ForegroundMask : public Grid<std::uint8_t> {
 public:
  using Grid::Grid;
};

/// Region of interest; nonzero = inside.
class RoiMask : public Grid<std::uint8_t> {
 public:
  using Grid::Grid;
};

/// Grayscale image normalized to [0,1].
class Image : public Grid<double> {
 public:
  using Grid::Grid;
};

template <typename G>
G flip_horizontal(const G& grid) {
  G out(grid.height(), grid.width());
  for (int y = 0; y < grid.height(); ++y)
    for (int x = 0; x < grid.width(); ++x) out(y, grid.width() - 1 - x) = grid(y, x);
  return out;
}

template <typename G>
G crop(const G& grid, int top, int left, int height, int width) {
  MC_CHECK(top >= 0 && left >= 0 && top + height <= grid.height() && left + width <= grid.width(),
           UsageError, "crop window out of bounds");
  G out(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out(y, x) = grid(top + y, left + x);
  return out;
}

/// Zero-pads on the bottom/right so that both dimensions are multiples of `multiple`.
template <typename G>
G pad_to_multiple(const G& grid, int multiple) {
  const int h = (grid.height() + multiple - 1) / multiple * multiple;
  const int w = (grid.width() + multiple - 1) / multiple * multiple;
  if (h == grid.height() && w == grid.width()) return grid;
  G out(h, w);
  for (int y = 0; y < grid.height(); ++y)
    for (int x = 0; x < grid.width(); ++x) out(y, x) = grid(y, x);
  return out;
}

}  // namespace maskcount

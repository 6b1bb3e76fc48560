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

#include <span>
#include <string>
#include <vector>

#include "aligned.hpp"
#include "grid.hpp"

namespace maskcount {

/// Channel-major activation volume (C x H x W), float64.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, double fill = 0.0);

  static Tensor from_grid(const Grid<double>& grid);
  template <typename T>
  static Tensor from_grid_cast(const Grid<T>& grid) {
    Tensor t(1, grid.height(), grid.width());
    auto src = grid.values();
    for (std::size_t i = 0; i < src.size(); ++i) t.data_[i] = static_cast<double>(src[i]);
    return t;
  }

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int c, int y, int x) { return data_[(c * plane()) + static_cast<std::size_t>(y) * width_ + x]; }
  double operator()(int c, int y, int x) const {
    return data_[(c * plane()) + static_cast<std::size_t>(y) * width_ + x];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> channel(int c) { return {data_.data() + c * plane(), plane()}; }
  std::span<const double> channel(int c) const { return {data_.data() + c * plane(), plane()}; }

  bool same_shape(const Tensor& o) const noexcept {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }
  std::string shape_string() const;

  double sum() const;
  void fill(double v);
  Tensor& operator+=(const Tensor& o);

  /// Single-channel plane as a grid.
  Grid<double> to_grid(int c = 0) const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  AlignedVector data_;
};

Tensor concat_channels(const Tensor& a, const Tensor& b);
/// Splits off the first `channels` channels into `first` and the rest into `second`.
void split_channels(const Tensor& t, int channels, Tensor& first, Tensor& second);

}  // namespace maskcount

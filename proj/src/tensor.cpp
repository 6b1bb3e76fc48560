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

#include "tensor.hpp"

#include <algorithm>
#include <numeric>

namespace maskcount {

Tensor::Tensor(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  MC_CHECK(channels >= 0 && height >= 0 && width >= 0, UsageError, "tensor dimensions must be non-negative");
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

Tensor Tensor::from_grid(const Grid<double>& grid) {
  Tensor t(1, grid.height(), grid.width());
  std::copy(grid.values().begin(), grid.values().end(), t.data_.begin());
  return t;
}

std::string Tensor::shape_string() const {
  return std::to_string(channels_) + "x" + std::to_string(height_) + "x" + std::to_string(width_);
}

double Tensor::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor& Tensor::operator+=(const Tensor& o) {
  MC_CHECK(same_shape(o), InvariantError, "tensor shape mismatch: " + shape_string() + " vs " + o.shape_string());
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Grid<double> Tensor::to_grid(int c) const {
  Grid<double> g(height_, width_);
  auto src = channel(c);
  std::copy(src.begin(), src.end(), g.values().begin());
  return g;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  MC_CHECK(a.height() == b.height() && a.width() == b.width(), InvariantError,
           "concat spatial mismatch: " + a.shape_string() + " vs " + b.shape_string());
  Tensor out(a.channels() + b.channels(), a.height(), a.width());
  std::copy(a.values().begin(), a.values().end(), out.data());
  std::copy(b.values().begin(), b.values().end(), out.data() + a.size());
  return out;
}

void split_channels(const Tensor& t, int channels, Tensor& first, Tensor& second) {
  first = Tensor(channels, t.height(), t.width());
  second = Tensor(t.channels() - channels, t.height(), t.width());
  std::copy(t.data(), t.data() + first.size(), first.data());
  std::copy(t.data() + first.size(), t.data() + t.size(), second.data());
}

}  // namespace maskcount

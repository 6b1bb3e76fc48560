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

#include <utility>

#include "layers.hpp"

namespace maskcount {

/// A Sequential with an input-channel contract.
class Subnet {
 public:
  Subnet(std::string what, int in_channels, Sequential net);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad) { return net_.backward(grad); }
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) { net_.collect_params(prefix, out); }
  void init(std::mt19937_64& rng, double stddev) { net_.init(rng, stddev); }
  int in_channels() const noexcept { return in_; }

 private:
  std::string what_;
  int in_;
  Sequential net_;
};

/// Foreground/background head: C(C,C,3)-ReLU-C(C,1,1), producing logits.
class MaskBranch : public Subnet {
 public:
  explicit MaskBranch(int channels);
};

/// Plain density head with the same layout as the mask branch; no output activation.
class DensityBranch : public Subnet {
 public:
  explicit DensityBranch(int channels);
};

/// Lifts a one-channel mask (or posterior) to a feature map:
/// C(1,64,3)-ReLU-C(64,C,3)-ReLU.
class MaskEmbed : public Subnet {
 public:
  MaskEmbed(int channels, int width_divisor);
};

/// Concatenates image and mask features, then C(2C,C,3)-C(C,C,3)-C(C,1,1)
/// with ReLU between convs and none after the last.
class ConcatRegressor {
 public:
  explicit ConcatRegressor(int channels);

  Tensor forward(const Tensor& image_features, const Tensor& mask_features);
  /// Returns (d image_features, d mask_features).
  std::pair<Tensor, Tensor> backward(const Tensor& grad);
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) { net_.collect_params(prefix, out); }
  void init(std::mt19937_64& rng, double stddev) { net_.init(rng, stddev); }

 private:
  int channels_;
  Subnet net_;
};

}  // namespace maskcount

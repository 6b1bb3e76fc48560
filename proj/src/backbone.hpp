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

#include <cstdint>

#include "layers.hpp"

namespace maskcount {

struct BackboneConfig {
  double init_std = 0.01;
  int unit_count = 2;
  /// Divides every layer width; 1 gives the full-size network. Used to shrink
  /// the network for desk-scale runs.
  int width_divisor = 1;
};

void validate(const BackboneConfig& cfg);

/// Channel width after applying the divisor (never below 1).
int scaled_width(int channels, int divisor);

/// Plain conv stem followed by multi-scale units; output stride 4.
///
/// Stem: C(1,64,3)-C(64,64,3)-MP-C(64,128,3)-C(128,128,3)-MP-C(128,128,3).
/// Each unit runs four branches on its input and concatenates them:
///   1x1 -> 64 | 1x1 -> 48, 3x3 -> 64 | 1x1 -> 48, 1x7 -> 56, 7x1 -> 64 | avgpool3, 1x1 -> 64
/// Every conv is followed by ReLU.
class Backbone {
 public:
  explicit Backbone(const BackboneConfig& cfg);

  /// image: 1 x H x W with H, W >= 4. Returns C x ceil(H/4) x ceil(W/4).
  Tensor forward(const Tensor& image);
  Tensor backward(const Tensor& grad);

  int feature_channels() const noexcept { return feature_channels_; }
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) { net_.collect_params(prefix, out); }
  void init(std::mt19937_64& rng, double stddev) { net_.init(rng, stddev); }

 private:
  Sequential net_;
  int feature_channels_ = 0;
};

/// Builds and initializes (weights ~ N(0, init_std^2), zero biases) from `seed`.
Backbone build_backbone(const BackboneConfig& cfg, std::uint64_t seed);

}  // namespace maskcount

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

#include "heads.hpp"

#include "backbone.hpp"

namespace maskcount {

namespace {

Sequential two_conv_head(int c) {
  Sequential s;
  s.emplace<Conv2d>("conv1", c, c, 3).emplace<Relu>("relu").emplace<Conv2d>("conv2", c, 1, 1);
  return s;
}

Sequential embed_net(int c, int divisor) {
  const int w = scaled_width(64, divisor);
  Sequential s;
  s.emplace<Conv2d>("conv1", 1, w, 3).emplace<Relu>("relu1");
  s.emplace<Conv2d>("conv2", w, c, 3).emplace<Relu>("relu2");
  return s;
}

Sequential regressor_net(int c) {
  Sequential s;
  s.emplace<Conv2d>("conv1", 2 * c, c, 3).emplace<Relu>("relu1");
  s.emplace<Conv2d>("conv2", c, c, 3).emplace<Relu>("relu2");
  s.emplace<Conv2d>("conv3", c, 1, 1);
  return s;
}

}  // namespace

Subnet::Subnet(std::string what, int in_channels, Sequential net)
    : what_(std::move(what)), in_(in_channels), net_(std::move(net)) {}

Tensor Subnet::forward(const Tensor& x) {
  MC_CHECK(x.channels() == in_, InvariantError,
           what_ + " expects " + std::to_string(in_) + " channels, got " + std::to_string(x.channels()));
  return net_.forward(x);
}

MaskBranch::MaskBranch(int channels) : Subnet("mask branch", channels, two_conv_head(channels)) {}

DensityBranch::DensityBranch(int channels) : Subnet("density branch", channels, two_conv_head(channels)) {}

MaskEmbed::MaskEmbed(int channels, int width_divisor)
    : Subnet("mask embedding", 1, embed_net(channels, width_divisor)) {}

ConcatRegressor::ConcatRegressor(int channels)
    : channels_(channels), net_("fusion regressor", 2 * channels, regressor_net(channels)) {}

Tensor ConcatRegressor::forward(const Tensor& image_features, const Tensor& mask_features) {
  MC_CHECK(image_features.channels() == channels_ && mask_features.channels() == channels_, InvariantError,
           "fusion regressor expects two " + std::to_string(channels_) + "-channel inputs, got " +
               image_features.shape_string() + " and " + mask_features.shape_string());
  return net_.forward(concat_channels(image_features, mask_features));
}

std::pair<Tensor, Tensor> ConcatRegressor::backward(const Tensor& grad) {
  Tensor both = net_.backward(grad);
  Tensor a, b;
  split_channels(both, channels_, a, b);
  return {std::move(a), std::move(b)};
}

}  // namespace maskcount

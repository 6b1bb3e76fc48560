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

#include "backbone.hpp"

namespace maskcount {

namespace {

std::unique_ptr<ParallelConcat> multi_scale_unit(int in, int divisor, int& out_channels) {
  const int w64 = scaled_width(64, divisor), w48 = scaled_width(48, divisor), w56 = scaled_width(56, divisor);
  Sequential a, b, c, d;
  a.emplace<Conv2d>("conv", in, w64, 1).emplace<Relu>("relu");
  b.emplace<Conv2d>("reduce", in, w48, 1).emplace<Relu>("relu1");
  b.emplace<Conv2d>("conv3x3", w48, w64, 3).emplace<Relu>("relu2");
  c.emplace<Conv2d>("reduce", in, w48, 1).emplace<Relu>("relu1");
  c.emplace<Conv2d>("conv1x7", w48, w56, 1, 7).emplace<Relu>("relu2");
  c.emplace<Conv2d>("conv7x1", w56, w64, 7, 1).emplace<Relu>("relu3");
  d.emplace<AvgPool3>("pool").emplace<Conv2d>("conv", in, w64, 1).emplace<Relu>("relu");

  auto cat = std::make_unique<ParallelConcat>();
  cat->add("b1x1", std::move(a)).add("b3x3", std::move(b)).add("b7x7", std::move(c)).add("bpool", std::move(d));
  out_channels = cat->out_channels(in);
  return cat;
}

}  // namespace

void validate(const BackboneConfig& cfg) {
  MC_CHECK(cfg.init_std > 0.0, UsageError, "init_std must be positive");
  MC_CHECK(cfg.unit_count >= 1, UsageError, "unit_count must be at least 1");
  MC_CHECK(cfg.width_divisor >= 1, UsageError, "width_divisor must be at least 1");
}

int scaled_width(int channels, int divisor) { return std::max(1, (channels + divisor / 2) / divisor); }

Backbone::Backbone(const BackboneConfig& cfg) {
  validate(cfg);
  const int d = cfg.width_divisor;
  const int w64 = scaled_width(64, d), w128 = scaled_width(128, d);
  net_.emplace<Conv2d>("conv1", 1, w64, 3).emplace<Relu>("relu1");
  net_.emplace<Conv2d>("conv2", w64, w64, 3).emplace<Relu>("relu2");
  net_.emplace<MaxPool2>("pool1");
  net_.emplace<Conv2d>("conv3", w64, w128, 3).emplace<Relu>("relu3");
  net_.emplace<Conv2d>("conv4", w128, w128, 3).emplace<Relu>("relu4");
  net_.emplace<MaxPool2>("pool2");
  net_.emplace<Conv2d>("conv5", w128, w128, 3).emplace<Relu>("relu5");
  int channels = w128;
  for (int u = 0; u < cfg.unit_count; ++u) {
    int out = 0;
    net_.add("unit" + std::to_string(u + 1), multi_scale_unit(channels, d, out));
    channels = out;
  }
  feature_channels_ = channels;
}

Tensor Backbone::forward(const Tensor& image) {
  MC_CHECK(image.channels() == 1, InvariantError,
           "backbone expects a single-channel image, got " + std::to_string(image.channels()) + " channels");
  MC_CHECK(image.height() >= 4 && image.width() >= 4, InvariantError, "backbone input must be at least 4x4");
  return net_.forward(image);
}

Tensor Backbone::backward(const Tensor& grad) { return net_.backward(grad); }

Backbone build_backbone(const BackboneConfig& cfg, std::uint64_t seed) {
  Backbone b(cfg);
  std::mt19937_64 rng(seed);
  b.init(rng, cfg.init_std);
  return b;
}

}  // namespace maskcount

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

#include "model.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "fusion.hpp"

namespace maskcount {

std::string_view to_string(FusionVariant v) {
  switch (v) {
    case FusionVariant::S1: return "S1";
    case FusionVariant::S2: return "S2";
    case FusionVariant::S3: return "S3";
    case FusionVariant::S4: return "S4";
    case FusionVariant::S5: return "S5";
    case FusionVariant::B1: return "B1";
    case FusionVariant::B2: return "B2";
    case FusionVariant::B3: return "B3";
  }
  return "?";
}

FusionVariant parse_variant(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto v : kAllVariants)
    if (to_string(v) == up) return v;
  throw UsageError("unknown variant '" + std::string(name) + "' (expected S1..S5 or B1..B3)");
}

bool has_mask_branch(FusionVariant v) {
  return v != FusionVariant::B1 && v != FusionVariant::B2 && v != FusionVariant::B3;
}

bool has_aux_branch(FusionVariant v) { return v == FusionVariant::B2 || v == FusionVariant::B3; }

bool uses_gt_mask_in_training(FusionVariant v) { return v == FusionVariant::S1 || v == FusionVariant::S4; }

namespace {

bool uses_density_branch(FusionVariant v) {
  return v == FusionVariant::B1 || v == FusionVariant::S1 || v == FusionVariant::S2 || v == FusionVariant::S3;
}

Tensor mask_as_tensor(const ForegroundMask& m) { return Tensor::from_grid_cast(m); }

Tensor add_or(const Tensor& base, const Tensor& extra) {
  if (extra.size() == 0) return base;
  if (base.size() == 0) return extra;
  Tensor out = base;
  out += extra;
  return out;
}

}  // namespace

Model::Model(FusionVariant variant, const BackboneConfig& cfg) : variant_(variant), cfg_(cfg), backbone_(cfg) {
  const int c = backbone_.feature_channels();
  if (variant != FusionVariant::B1) mask_.emplace(c);
  if (uses_density_branch(variant)) {
    density_.emplace(c);
  } else {
    embed_.emplace(c, cfg.width_divisor);
    regressor_.emplace(c);
  }
}

void Model::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  backbone_.init(rng, cfg_.init_std);
  if (mask_) mask_->init(rng, cfg_.init_std);
  if (density_) density_->init(rng, cfg_.init_std);
  if (embed_) embed_->init(rng, cfg_.init_std);
  if (regressor_) regressor_->init(rng, cfg_.init_std);
}

std::vector<ParamRef> Model::params() {
  std::vector<ParamRef> out;
  backbone_.collect_params("backbone", out);
  if (mask_) mask_->collect_params(has_mask_branch(variant_) ? "mask" : "aux", out);
  if (density_) density_->collect_params("density", out);
  if (embed_) embed_->collect_params("embed", out);
  if (regressor_) regressor_->collect_params("regressor", out);
  return out;
}

std::size_t Model::param_count() {
  std::size_t n = 0;
  for (const auto& p : params()) n += p.param->size();
  return n;
}

std::size_t Model::mask_param_count() {
  std::size_t n = 0;
  for (const auto& p : params())
    if (p.name.starts_with("mask.")) n += p.param->size();
  return n;
}

void Model::zero_grad() {
  for (auto& p : params()) p.param->zero_grad();
}

ModelOutputs Model::forward(const Tensor& image, Phase phase, const ForegroundMask* gt_mask) {
  ModelOutputs out;
  const Tensor features = backbone_.forward(image);
  last_phase_ = phase;

  const bool need_gt = phase == Phase::Train && uses_gt_mask_in_training(variant_);
  if (need_gt) {
    MC_CHECK(gt_mask != nullptr, UsageError,
             std::string(to_string(variant_)) + " needs the ground-truth mask while training");
    MC_CHECK(gt_mask->height() == features.height() && gt_mask->width() == features.width(), InvariantError,
             "ground-truth mask does not match the output resolution");
  }

  if (mask_) {
    Tensor head = mask_->forward(features);
    if (variant_ == FusionVariant::B3) {
      aux_out_ = head;
      out.aux = std::move(head);
    } else {
      posterior_ = sigmoid(head);
      (has_mask_branch(variant_) ? out.mask_logits : out.aux) = std::move(head);
    }
  }

  switch (variant_) {
    case FusionVariant::B1:
      raw_ = density_->forward(features);
      out.density = raw_;
      break;
    case FusionVariant::S1:
      raw_ = density_->forward(features);
      gate_ = need_gt ? mask_as_tensor(*gt_mask) : hard_threshold(posterior_);
      out.density = fuse_elementwise(raw_, gate_);
      break;
    case FusionVariant::S2:
      raw_ = density_->forward(features);
      out.density = fuse_elementwise(raw_, posterior_);
      break;
    case FusionVariant::S3:
      raw_ = density_->forward(features);
      out.density = fuse_ste(raw_, posterior_);
      break;
    case FusionVariant::S4:
      gate_ = need_gt ? mask_as_tensor(*gt_mask) : hard_threshold(posterior_);
      out.density = regressor_->forward(features, embed_->forward(gate_));
      break;
    case FusionVariant::S5:
    case FusionVariant::B2:
      out.density = regressor_->forward(features, embed_->forward(posterior_));
      break;
    case FusionVariant::B3:
      out.density = regressor_->forward(features, embed_->forward(aux_out_));
      break;
  }
  return out;
}

Tensor Model::backward(const OutputGrads& grads) {
  MC_CHECK(last_phase_ == Phase::Train, UsageError, "backward requires a preceding Train-phase forward");
  Tensor d_features;
  Tensor d_head;  // gradient flowing into the mask/aux head output

  switch (variant_) {
    case FusionVariant::B1:
      if (grads.density.size()) d_features = density_->backward(grads.density);
      break;
    case FusionVariant::S1: {
      if (grads.density.size()) {
        // The gate is either the ground truth or a hard threshold: no path to the mask branch.
        auto g = fuse_elementwise_backward(raw_, gate_, grads.density);
        d_features = density_->backward(g.raw);
      }
      break;
    }
    case FusionVariant::S2:
    case FusionVariant::S3: {
      if (grads.density.size()) {
        auto g = variant_ == FusionVariant::S2 ? fuse_elementwise_backward(raw_, posterior_, grads.density)
                                               : fuse_ste_backward(raw_, posterior_, grads.density);
        d_features = density_->backward(g.raw);
        d_head = sigmoid_backward(posterior_, g.gate);
      }
      break;
    }
    case FusionVariant::S4: {
      if (grads.density.size()) {
        auto [d_img, d_emb] = regressor_->backward(grads.density);
        embed_->backward(d_emb);  // input is ground truth / thresholded: gradient stops here
        d_features = std::move(d_img);
      }
      break;
    }
    case FusionVariant::S5:
    case FusionVariant::B2:
    case FusionVariant::B3: {
      if (grads.density.size()) {
        auto [d_img, d_emb] = regressor_->backward(grads.density);
        Tensor d_in = embed_->backward(d_emb);
        d_head = variant_ == FusionVariant::B3 ? std::move(d_in) : sigmoid_backward(posterior_, d_in);
        d_features = std::move(d_img);
      }
      break;
    }
  }

  if (mask_) {
    d_head = add_or(d_head, has_mask_branch(variant_) ? grads.mask_logits : grads.aux);
    if (d_head.size()) d_features = add_or(d_features, mask_->backward(d_head));
  }
  if (d_features.size() == 0) return Tensor();
  return backbone_.backward(d_features);
}

Model assemble_model(FusionVariant variant, const BackboneConfig& cfg, std::uint64_t seed) {
  Model m(variant, cfg);
  m.init(seed);
  return m;
}

}  // namespace maskcount

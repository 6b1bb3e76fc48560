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
#include <optional>
#include <string_view>

#include "backbone.hpp"
#include "grid.hpp"
#include "heads.hpp"

namespace maskcount {

/// Network topology. S1..S5 are the mask-aware regressors; B1..B3 the baselines.
enum class FusionVariant { S1, S2, S3, S4, S5, B1, B2, B3 };

inline constexpr FusionVariant kAllVariants[] = {FusionVariant::S1, FusionVariant::S2, FusionVariant::S3,
                                                 FusionVariant::S4, FusionVariant::S5, FusionVariant::B1,
                                                 FusionVariant::B2, FusionVariant::B3};

std::string_view to_string(FusionVariant v);
/// Accepts "S1".."S5", "B1".."B3" (case-insensitive). Throws UsageError otherwise.
FusionVariant parse_variant(std::string_view name);

/// Variants trained with a mask objective (they own a "mask." branch).
bool has_mask_branch(FusionVariant v);
/// Variants with an auxiliary branch that carries no mask objective (B2, B3).
bool has_aux_branch(FusionVariant v);
/// Variants that need the ground-truth mask in the forward pass while training.
bool uses_gt_mask_in_training(FusionVariant v);

enum class Phase { Train, Test };

struct ModelOutputs {
  Tensor density;      // final prediction, 1 x h x w
  Tensor mask_logits;  // S1..S5
  Tensor aux;          // B2: auxiliary logits; B3: auxiliary density
};

/// Gradients of the objective w.r.t. the outputs; an empty tensor means zero.
struct OutputGrads {
  Tensor density;
  Tensor mask_logits;
  Tensor aux;
};

/// Backbone + optional mask/aux branch + variant-specific density regressor.
///
/// Parameter name prefixes: backbone, mask, aux, density, embed, regressor.
class Model {
 public:
  Model(FusionVariant variant, const BackboneConfig& cfg);

  /// `gt_mask` (at output resolution) is required for S1/S4 in the Train phase.
  ModelOutputs forward(const Tensor& image, Phase phase, const ForegroundMask* gt_mask = nullptr);
  /// Accumulates parameter gradients for the last Train-phase forward and
  /// returns the gradient w.r.t. the input image.
  Tensor backward(const OutputGrads& grads);

  std::vector<ParamRef> params();
  std::size_t param_count();
  /// Parameters of the mask-objective branch ("mask." prefix).
  std::size_t mask_param_count();
  void zero_grad();
  void init(std::uint64_t seed);

  FusionVariant variant() const noexcept { return variant_; }
  const BackboneConfig& config() const noexcept { return cfg_; }
  int feature_channels() const noexcept { return backbone_.feature_channels(); }

  Backbone& backbone() { return backbone_; }
  MaskBranch* mask_branch() { return mask_ ? &*mask_ : nullptr; }
  MaskEmbed* mask_embed() { return embed_ ? &*embed_ : nullptr; }
  ConcatRegressor* regressor() { return regressor_ ? &*regressor_ : nullptr; }

 private:
  FusionVariant variant_;
  BackboneConfig cfg_;
  Backbone backbone_;
  std::optional<MaskBranch> mask_;  // mask objective (S1..S5) or auxiliary head (B2, B3)
  std::optional<DensityBranch> density_;
  std::optional<MaskEmbed> embed_;
  std::optional<ConcatRegressor> regressor_;

  std::optional<Phase> last_phase_;
  Tensor raw_, gate_, posterior_, aux_out_;
};

/// Builds the variant's network and draws its initial weights from `seed`.
Model assemble_model(FusionVariant variant, const BackboneConfig& cfg, std::uint64_t seed);

}  // namespace maskcount

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

#include "grid.hpp"
#include "model.hpp"
#include "tensor.hpp"

namespace maskcount {

struct LossConfig {
  double alpha = 1.0;  // weight of the density term
  double gamma = 2.0;  // focal exponent; 0 gives binary cross-entropy
};

void validate(const LossConfig& cfg);

struct LossValue {
  double value = 0.0;
  Tensor grad;  // d value / d input, same shape as the input
};

/// Mean over pixels of -(1 - p_t)^gamma * log(p_t), computed from logits.
/// No class weighting.
LossValue focal_loss(const Tensor& logits, const ForegroundMask& gt, double gamma);

/// Per-image sum of squared differences.
LossValue mse_density_loss(const Tensor& pred, const DensityMap& gt);

/// focal_loss + alpha * mse_density_loss.
double combined_loss(const Tensor& mask_logits, const ForegroundMask& gt_mask, const Tensor& pred_density,
                     const DensityMap& gt_density, const LossConfig& cfg);

struct Objective {
  double mask = 0.0;     // first term (focal, or auxiliary MSE for B3; 0 for B1/B2)
  double density = 0.0;  // density MSE of the final prediction
  double total = 0.0;    // mask + alpha * density
  OutputGrads grads;
};

/// Per-variant objective for one sample. `scale` multiplies every gradient
/// (1/batch for batch averaging); the returned values are unscaled.
Objective variant_objective(FusionVariant variant, const ModelOutputs& out, const ForegroundMask& gt_mask,
                            const DensityMap& gt_density, const LossConfig& cfg, double scale = 1.0);

}  // namespace maskcount

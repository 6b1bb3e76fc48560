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

#include "losses.hpp"

#include <cmath>

namespace maskcount {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

void scale_in_place(Tensor& t, double s) {
  for (auto& v : t.values()) v *= s;
}

}  // namespace

void validate(const LossConfig& cfg) {
  MC_CHECK(cfg.alpha >= 0.0 && std::isfinite(cfg.alpha), UsageError, "alpha must be a non-negative number");
  MC_CHECK(cfg.gamma >= 0.0 && std::isfinite(cfg.gamma), UsageError, "gamma must be non-negative");
}

LossValue focal_loss(const Tensor& logits, const ForegroundMask& gt, double gamma) {
  MC_CHECK(logits.channels() == 1 && logits.height() == gt.height() && logits.width() == gt.width(), InvariantError,
           "focal loss: logits " + logits.shape_string() + " do not match mask " + std::to_string(gt.height()) +
               "x" + std::to_string(gt.width()));
  MC_CHECK(gamma >= 0.0, UsageError, "gamma must be non-negative");
  LossValue out{0.0, Tensor(1, logits.height(), logits.width())};
  const auto labels = gt.values();
  const double n = static_cast<double>(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    // p_t = sigmoid(s*z), with s = +1 for foreground and -1 for background.
    const double s = labels[i] != 0 ? 1.0 : -1.0;
    const double sz = s * logits[i];
    const double log_pt = -softplus(-sz);
    const double one_minus_pt = std::exp(-softplus(sz));  // sigmoid(-sz)
    const double pt = std::exp(log_pt);
    const double mod = gamma == 0.0 ? 1.0 : std::pow(one_minus_pt, gamma);
    out.value += -mod * log_pt;
    out.grad[i] = s * mod * (gamma * pt * log_pt - one_minus_pt) / n;
  }
  out.value /= n;
  return out;
}

LossValue mse_density_loss(const Tensor& pred, const DensityMap& gt) {
  MC_CHECK(pred.channels() == 1 && pred.height() == gt.height() && pred.width() == gt.width(), InvariantError,
           "density loss: prediction " + pred.shape_string() + " does not match ground truth " +
               std::to_string(gt.height()) + "x" + std::to_string(gt.width()));
  LossValue out{0.0, Tensor(1, pred.height(), pred.width())};
  const auto target = gt.values();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    out.value += diff * diff;
    out.grad[i] = 2.0 * diff;
  }
  return out;
}

double combined_loss(const Tensor& mask_logits, const ForegroundMask& gt_mask, const Tensor& pred_density,
                     const DensityMap& gt_density, const LossConfig& cfg) {
  validate(cfg);
  return focal_loss(mask_logits, gt_mask, cfg.gamma).value + cfg.alpha * mse_density_loss(pred_density, gt_density).value;
}

Objective variant_objective(FusionVariant variant, const ModelOutputs& out, const ForegroundMask& gt_mask,
                            const DensityMap& gt_density, const LossConfig& cfg, double scale) {
  validate(cfg);
  Objective obj;
  auto density = mse_density_loss(out.density, gt_density);
  obj.density = density.value;
  obj.grads.density = std::move(density.grad);
  scale_in_place(obj.grads.density, cfg.alpha * scale);

  if (has_mask_branch(variant)) {
    auto mask = focal_loss(out.mask_logits, gt_mask, cfg.gamma);
    obj.mask = mask.value;
    obj.grads.mask_logits = std::move(mask.grad);
    scale_in_place(obj.grads.mask_logits, scale);
  } else if (variant == FusionVariant::B3) {
    auto aux = mse_density_loss(out.aux, gt_density);
    obj.mask = aux.value;
    obj.grads.aux = std::move(aux.grad);
    scale_in_place(obj.grads.aux, scale);
  }
  obj.total = obj.mask + cfg.alpha * obj.density;
  return obj;
}

}  // namespace maskcount

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

#include "tensor.hpp"

namespace maskcount {

/// Numerically stable logistic, elementwise.
Tensor sigmoid(const Tensor& logits);

/// h(p): 1 where p > 0.5 (strictly), else 0.
Tensor hard_threshold(const Tensor& posterior);

/// raw * gate, gate in [0,1].
Tensor fuse_elementwise(const Tensor& raw, const Tensor& gate);

struct FuseGrads {
  Tensor raw;
  Tensor gate;  // w.r.t. gate for fuse_elementwise, w.r.t. posterior for fuse_ste
};

FuseGrads fuse_elementwise_backward(const Tensor& raw, const Tensor& gate, const Tensor& grad_out);

/// Forward: raw * h(posterior). Backward treats h as the identity.
Tensor fuse_ste(const Tensor& raw, const Tensor& posterior);
FuseGrads fuse_ste_backward(const Tensor& raw, const Tensor& posterior, const Tensor& grad_out);

/// Chain rule through the logistic: d logits = d posterior * p * (1 - p).
Tensor sigmoid_backward(const Tensor& posterior, const Tensor& grad_posterior);

}  // namespace maskcount

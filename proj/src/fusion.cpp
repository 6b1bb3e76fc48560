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

#include "fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace maskcount {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  MC_CHECK(a.same_shape(b), InvariantError,
           std::string(what) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

}  // namespace

Tensor sigmoid(const Tensor& logits) {
  Tensor p = logits;
  for (auto& v : p.values()) {
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
    // Saturated logits would otherwise round to exactly 0 or 1.
    v = std::clamp(v, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
  }
  return p;
}

Tensor hard_threshold(const Tensor& posterior) {
  Tensor m = posterior;
  for (auto& v : m.values()) v = v > 0.5 ? 1.0 : 0.0;
  return m;
}

Tensor fuse_elementwise(const Tensor& raw, const Tensor& gate) {
  require_same(raw, gate, "fuse_elementwise");
  Tensor out = raw;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double g = gate[i];
    MC_CHECK(g >= 0.0 && g <= 1.0, InvariantError, "fuse_elementwise: gate value outside [0,1]");
    out[i] *= g;
  }
  return out;
}

FuseGrads fuse_elementwise_backward(const Tensor& raw, const Tensor& gate, const Tensor& grad_out) {
  require_same(raw, gate, "fuse_elementwise_backward");
  require_same(raw, grad_out, "fuse_elementwise_backward");
  FuseGrads g{grad_out, grad_out};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    g.raw[i] *= gate[i];
    g.gate[i] *= raw[i];
  }
  return g;
}

Tensor fuse_ste(const Tensor& raw, const Tensor& posterior) {
  require_same(raw, posterior, "fuse_ste");
  return fuse_elementwise(raw, hard_threshold(posterior));
}

FuseGrads fuse_ste_backward(const Tensor& raw, const Tensor& posterior, const Tensor& grad_out) {
  require_same(raw, posterior, "fuse_ste_backward");
  require_same(raw, grad_out, "fuse_ste_backward");
  FuseGrads g{grad_out, grad_out};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    g.raw[i] *= posterior[i] > 0.5 ? 1.0 : 0.0;
    g.gate[i] *= raw[i];
  }
  return g;
}

Tensor sigmoid_backward(const Tensor& posterior, const Tensor& grad_posterior) {
  require_same(posterior, grad_posterior, "sigmoid_backward");
  Tensor g = grad_posterior;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= posterior[i] * (1.0 - posterior[i]);
  return g;
}

}  // namespace maskcount

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

#include "optimizers.hpp"

#include <cmath>

namespace maskcount {

void Adam::step(std::vector<ParamRef>& params, double lr) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.param->size(), 0.0);
      v_.emplace_back(p.param->size(), 0.0);
    }
  }
  MC_CHECK(m_.size() == params.size(), InvariantError, "optimizer bound to a different parameter set");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k].param->value;
    const auto& grad = params[k].param->grad;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * grad[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * grad[i] * grad[i];
      value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

void Sgd::step(std::vector<ParamRef>& params, double lr) {
  if (velocity_.empty())
    for (const auto& p : params) velocity_.emplace_back(p.param->size(), 0.0);
  MC_CHECK(velocity_.size() == params.size(), InvariantError, "optimizer bound to a different parameter set");
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k].param->value;
    const auto& grad = params[k].param->grad;
    auto& vel = velocity_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      vel[i] = momentum_ * vel[i] + grad[i];
      value[i] -= lr * vel[i];
    }
  }
}

}  // namespace maskcount

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

#include <memory>
#include <string_view>
#include <vector>

#include "layers.hpp"

namespace maskcount {

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  /// Applies one update using the accumulated gradients.
  virtual void step(std::vector<ParamRef>& params, double lr) = 0;
  virtual std::string_view name() const = 0;
};

class Adam : public Optimizer {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(std::vector<ParamRef>& params, double lr) override;
  std::string_view name() const override { return "adam"; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Mini-batch SGD with classical momentum (0 disables it).
class Sgd : public Optimizer {
 public:
  explicit Sgd(double momentum = 0.9) : momentum_(momentum) {}
  void step(std::vector<ParamRef>& params, double lr) override;
  std::string_view name() const override { return "sgd"; }

 private:
  double momentum_;
  std::vector<std::vector<double>> velocity_;
};

}  // namespace maskcount

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
#include <random>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace maskcount {

/// Trainable array with its accumulated gradient.
struct Parameter {
  std::vector<int> shape;
  AlignedVector value;
  AlignedVector grad;

  explicit Parameter(std::vector<int> dims = {});
  std::size_t size() const noexcept { return value.size(); }
  void zero_grad();
};

struct ParamRef {
  std::string name;
  Parameter* param;
};

/// A differentiable stage. forward() caches whatever backward() needs, so each
/// instance handles one sample at a time.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x) = 0;
  /// Accumulates parameter gradients and returns the gradient w.r.t. the input.
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual void collect_params(const std::string& /*prefix*/, std::vector<ParamRef>& /*out*/) {}
  virtual void init(std::mt19937_64& /*rng*/, double /*stddev*/) {}
  virtual int out_channels(int in_channels) const { return in_channels; }
};

/// Stride-1 convolution with "same" zero padding; odd kernel sizes only.
class Conv2d : public Layer {
 public:
  Conv2d(int in_channels, int out_channels, int kernel_h, int kernel_w);
  Conv2d(int in_channels, int out_channels, int kernel) : Conv2d(in_channels, out_channels, kernel, kernel) {}

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
  void init(std::mt19937_64& rng, double stddev) override;
  int out_channels(int) const override { return out_; }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  void im2col(const Tensor& x, AlignedVector& col) const;
  void col2im(const AlignedVector& col, Tensor& dx) const;

  int in_, out_, kh_, kw_;
  Parameter weight_;  // out x in x kh x kw
  Parameter bias_;    // out
  Tensor input_;
};

class Relu : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  Tensor output_;
};

/// 2x2 stride-2 max pooling; odd sizes round up (partial windows at the edge).
class MaxPool2 : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;

 private:
  int in_h_ = 0, in_w_ = 0;
  std::vector<std::size_t> argmax_;
};

/// 3x3 stride-1 average pooling, zero padded, always divides by 9.
class AvgPool3 : public Layer {
 public:
  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
};

class Sequential : public Layer {
 public:
  Sequential& add(std::string name, std::unique_ptr<Layer> layer);
  template <typename L, typename... Args>
  Sequential& emplace(std::string name, Args&&... args) {
    return add(std::move(name), std::make_unique<L>(std::forward<Args>(args)...));
  }

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
  void init(std::mt19937_64& rng, double stddev) override;
  int out_channels(int in_channels) const override;
  bool empty() const noexcept { return layers_.empty(); }

 private:
  std::vector<std::string> names_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Runs branches on the same input and concatenates their outputs along channels.
class ParallelConcat : public Layer {
 public:
  ParallelConcat& add(std::string name, Sequential branch);

  Tensor forward(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
  void init(std::mt19937_64& rng, double stddev) override;
  int out_channels(int in_channels) const override;

 private:
  std::vector<std::string> names_;
  std::vector<Sequential> branches_;
  std::vector<int> widths_;
};

}  // namespace maskcount

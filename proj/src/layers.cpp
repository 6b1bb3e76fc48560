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

#include "layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <limits>

namespace maskcount {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

std::size_t product(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

}  // namespace

Parameter::Parameter(std::vector<int> dims) : shape(std::move(dims)) {
  const std::size_t n = shape.empty() ? 0 : product(shape);
  value.assign(n, 0.0);
  grad.assign(n, 0.0);
}

void Parameter::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

// ---------------------------------------------------------------------------

Conv2d::Conv2d(int in_channels, int out_channels, int kernel_h, int kernel_w)
    : in_(in_channels),
      out_(out_channels),
      kh_(kernel_h),
      kw_(kernel_w),
      weight_({out_channels, in_channels, kernel_h, kernel_w}),
      bias_({out_channels}) {
  MC_CHECK(kernel_h % 2 == 1 && kernel_w % 2 == 1, UsageError, "same-padding conv needs odd kernel sizes");
  MC_CHECK(in_channels > 0 && out_channels > 0, UsageError, "conv channel counts must be positive");
}

void Conv2d::init(std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (auto& w : weight_.value) w = normal(rng);
  std::fill(bias_.value.begin(), bias_.value.end(), 0.0);
}

void Conv2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".weight", &weight_});
  out.push_back({prefix + ".bias", &bias_});
}

void Conv2d::im2col(const Tensor& x, AlignedVector& col) const {
  const int h = x.height(), w = x.width();
  const int ph = kh_ / 2, pw = kw_ / 2;
  const std::size_t hw = x.plane();
  col.assign(static_cast<std::size_t>(in_) * kh_ * kw_ * hw, 0.0);
  std::size_t row = 0;
  for (int c = 0; c < in_; ++c) {
    const double* src = x.channel(c).data();
    for (int ky = 0; ky < kh_; ++ky) {
      for (int kx = 0; kx < kw_; ++kx, ++row) {
        double* dst = col.data() + row * hw;
        const int dy = ky - ph, dx = kx - pw;
        const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
        for (int y = 0; y < h; ++y) {
          const int iy = y + dy;
          if (iy < 0 || iy >= h) continue;
          const double* s = src + static_cast<std::size_t>(iy) * w + dx;
          double* d = dst + static_cast<std::size_t>(y) * w;
          for (int xx = x0; xx < x1; ++xx) d[xx] = s[xx];
        }
      }
    }
  }
}

void Conv2d::col2im(const AlignedVector& col, Tensor& dx) const {
  const int h = dx.height(), w = dx.width();
  const int ph = kh_ / 2, pw = kw_ / 2;
  const std::size_t hw = dx.plane();
  std::size_t row = 0;
  for (int c = 0; c < in_; ++c) {
    double* dst = dx.channel(c).data();
    for (int ky = 0; ky < kh_; ++ky) {
      for (int kx = 0; kx < kw_; ++kx, ++row) {
        const double* src = col.data() + row * hw;
        const int dy = ky - ph, dxo = kx - pw;
        const int x0 = std::max(0, -dxo), x1 = std::min(w, w - dxo);
        for (int y = 0; y < h; ++y) {
          const int iy = y + dy;
          if (iy < 0 || iy >= h) continue;
          double* d = dst + static_cast<std::size_t>(iy) * w + dxo;
          const double* s = src + static_cast<std::size_t>(y) * w;
          for (int xx = x0; xx < x1; ++xx) d[xx] += s[xx];
        }
      }
    }
  }
}

Tensor Conv2d::forward(const Tensor& x) {
  MC_CHECK(x.channels() == in_, InvariantError,
           "conv expects " + std::to_string(in_) + " input channels, got " + std::to_string(x.channels()));
  input_ = x;
  const auto hw = static_cast<Eigen::Index>(x.plane());
  const auto k = static_cast<Eigen::Index>(in_) * kh_ * kw_;
  Tensor y(out_, x.height(), x.width());
  ConstRowMap wmat(weight_.value.data(), out_, k);
  RowMap ymat(y.data(), out_, hw);
  if (kh_ == 1 && kw_ == 1) {
    ymat.noalias() = wmat * ConstRowMap(x.data(), k, hw);
  } else {
    thread_local AlignedVector col;
    im2col(x, col);
    ymat.noalias() = wmat * ConstRowMap(col.data(), k, hw);
  }
  ymat.colwise() += Eigen::Map<const Eigen::VectorXd>(bias_.value.data(), out_);
  return y;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  MC_CHECK(grad_out.channels() == out_ && grad_out.height() == input_.height() && grad_out.width() == input_.width(),
           InvariantError, "conv backward: gradient shape mismatch");
  const auto hw = static_cast<Eigen::Index>(input_.plane());
  const auto k = static_cast<Eigen::Index>(in_) * kh_ * kw_;
  ConstRowMap dy(grad_out.data(), out_, hw);
  ConstRowMap wmat(weight_.value.data(), out_, k);
  RowMap dw(weight_.grad.data(), out_, k);
  Eigen::Map<Eigen::VectorXd>(bias_.grad.data(), out_) += dy.rowwise().sum();

  Tensor dx(in_, input_.height(), input_.width());
  if (kh_ == 1 && kw_ == 1) {
    ConstRowMap xmat(input_.data(), k, hw);
    dw.noalias() += dy * xmat.transpose();
    RowMap(dx.data(), k, hw).noalias() = wmat.transpose() * dy;
  } else {
    thread_local AlignedVector col;
    im2col(input_, col);
    dw.noalias() += dy * ConstRowMap(col.data(), k, hw).transpose();
    RowMap cmat(col.data(), k, hw);
    cmat.noalias() = wmat.transpose() * dy;
    col2im(col, dx);
  }
  return dx;
}

// ---------------------------------------------------------------------------

Tensor Relu::forward(const Tensor& x) {
  output_ = x;
  for (auto& v : output_.values()) v = v < 0.0 ? 0.0 : v;
  return output_;
}

Tensor Relu::backward(const Tensor& grad_out) {
  Tensor dx = grad_out;
  auto out = output_.values();
  auto g = dx.values();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (out[i] <= 0.0) g[i] = 0.0;
  return dx;
}

// ---------------------------------------------------------------------------

Tensor MaxPool2::forward(const Tensor& x) {
  in_h_ = x.height();
  in_w_ = x.width();
  const int oh = (in_h_ + 1) / 2, ow = (in_w_ + 1) / 2;
  Tensor y(x.channels(), oh, ow);
  argmax_.assign(y.size(), 0);
  std::size_t o = 0;
  for (int c = 0; c < x.channels(); ++c) {
    const std::size_t base = c * x.plane();
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox, ++o) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (int dy = 0; dy < 2; ++dy) {
          const int iy = 2 * oy + dy;
          if (iy >= in_h_) break;
          for (int dx = 0; dx < 2; ++dx) {
            const int ix = 2 * ox + dx;
            if (ix >= in_w_) break;
            const std::size_t idx = base + static_cast<std::size_t>(iy) * in_w_ + ix;
            if (x[idx] > best) {
              best = x[idx];
              arg = idx;
            }
          }
        }
        y[o] = best;
        argmax_[o] = arg;
      }
    }
  }
  return y;
}

Tensor MaxPool2::backward(const Tensor& grad_out) {
  Tensor dx(grad_out.channels(), in_h_, in_w_);
  for (std::size_t i = 0; i < grad_out.size(); ++i) dx[argmax_[i]] += grad_out[i];
  return dx;
}

// ---------------------------------------------------------------------------

namespace {

// Box-sums a 3x3 neighbourhood (zero padded) and scales by 1/9.
Tensor box3(const Tensor& x) {
  Tensor y(x.channels(), x.height(), x.width());
  const int h = x.height(), w = x.width();
  for (int c = 0; c < x.channels(); ++c) {
    for (int yy = 0; yy < h; ++yy) {
      for (int xx = 0; xx < w; ++xx) {
        double s = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int iy = yy + dy;
          if (iy < 0 || iy >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int ix = xx + dx;
            if (ix < 0 || ix >= w) continue;
            s += x(c, iy, ix);
          }
        }
        y(c, yy, xx) = s / 9.0;
      }
    }
  }
  return y;
}

}  // namespace

Tensor AvgPool3::forward(const Tensor& x) { return box3(x); }

// The zero-padded box filter is symmetric, so its adjoint is itself.
Tensor AvgPool3::backward(const Tensor& grad_out) { return box3(grad_out); }

// ---------------------------------------------------------------------------

Sequential& Sequential::add(std::string name, std::unique_ptr<Layer> layer) {
  names_.push_back(std::move(name));
  layers_.push_back(std::move(layer));
  return *this;
}

Tensor Sequential::forward(const Tensor& x) {
  Tensor h = x;
  for (auto& l : layers_) h = l->forward(h);
  return h;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

void Sequential::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  for (std::size_t i = 0; i < layers_.size(); ++i)
    layers_[i]->collect_params(prefix.empty() ? names_[i] : prefix + "." + names_[i], out);
}

void Sequential::init(std::mt19937_64& rng, double stddev) {
  for (auto& l : layers_) l->init(rng, stddev);
}

int Sequential::out_channels(int in_channels) const {
  int c = in_channels;
  for (const auto& l : layers_) c = l->out_channels(c);
  return c;
}

// ---------------------------------------------------------------------------

ParallelConcat& ParallelConcat::add(std::string name, Sequential branch) {
  names_.push_back(std::move(name));
  branches_.push_back(std::move(branch));
  return *this;
}

Tensor ParallelConcat::forward(const Tensor& x) {
  widths_.clear();
  Tensor out;
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    Tensor y = branches_[i].forward(x);
    widths_.push_back(y.channels());
    out = i == 0 ? std::move(y) : concat_channels(out, y);
  }
  return out;
}

Tensor ParallelConcat::backward(const Tensor& grad_out) {
  Tensor dx;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    Tensor g(widths_[i], grad_out.height(), grad_out.width());
    std::copy(grad_out.data() + offset, grad_out.data() + offset + g.size(), g.data());
    offset += g.size();
    Tensor gi = branches_[i].backward(g);
    if (i == 0)
      dx = std::move(gi);
    else
      dx += gi;
  }
  return dx;
}

void ParallelConcat::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  for (std::size_t i = 0; i < branches_.size(); ++i) branches_[i].collect_params(prefix + "." + names_[i], out);
}

void ParallelConcat::init(std::mt19937_64& rng, double stddev) {
  for (auto& b : branches_) b.init(rng, stddev);
}

int ParallelConcat::out_channels(int in_channels) const {
  int c = 0;
  for (const auto& b : branches_) c += b.out_channels(in_channels);
  return c;
}

}  // namespace maskcount

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

#include "trainer.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <thread>

#include "eval.hpp"
#include "optimizers.hpp"

namespace maskcount {

namespace {

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

template <typename G>
G reflect_pad(const G& g, int height, int width) {
  G out(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out(y, x) = g(reflect(y, g.height()), reflect(x, g.width()));
  return out;
}

Triple reflect_pad_to(const Triple& t, int height, int width) {
  if (t.image.height() >= height && t.image.width() >= width) return t;
  const int h = std::max(height, t.image.height()), w = std::max(width, t.image.width());
  Triple out;
  out.image = reflect_pad(t.image, h, w);
  out.density = reflect_pad(t.density, h, w);
  out.mask = reflect_pad(t.mask, h, w);
  out.truth = out.density.total();
  return out;
}

Triple crop_triple(const Triple& t, int top, int left, int height, int width) {
  Triple out;
  out.image = crop(t.image, top, left, height, width);
  out.density = crop(t.density, top, left, height, width);
  out.mask = crop(t.mask, top, left, height, width);
  out.truth = out.density.total();
  return out;
}

void check_aligned(const Triple& t) {
  MC_CHECK(t.image.same_shape(t.density) && t.image.same_shape(t.mask), InvariantError,
           "image, density and mask must share a shape");
}

}  // namespace

void validate(const TrainSchedule& s) {
  MC_CHECK(s.base_lr > 0.0, UsageError, "base_lr must be positive");
  MC_CHECK(s.decay_factor > 0.0 && s.decay_factor <= 1.0, UsageError, "decay_factor must be in (0, 1]");
  MC_CHECK(s.decay_every >= 1, UsageError, "decay_every must be at least 1");
  MC_CHECK(s.total_epochs >= 1, UsageError, "total_epochs must be at least 1");
  MC_CHECK(s.adam_epochs >= 0 && s.adam_epochs <= s.total_epochs, UsageError,
           "adam_epochs must lie between 0 and total_epochs");
  MC_CHECK(s.batch_size >= 1, UsageError, "batch_size must be at least 1");
  MC_CHECK(s.sgd_momentum >= 0.0 && s.sgd_momentum < 1.0, UsageError, "sgd_momentum must be in [0, 1)");
  MC_CHECK(s.workers >= 1, UsageError, "workers must be at least 1");
}

double learning_rate(const TrainSchedule& s, int epoch) {
  MC_CHECK(epoch >= 1, UsageError, "epochs are counted from 1");
  return s.base_lr * std::pow(s.decay_factor, static_cast<double>((epoch - 1) / s.decay_every));
}

std::string_view optimizer_for_epoch(const TrainSchedule& s, int epoch) {
  return epoch <= s.adam_epochs ? "adam" : "sgd";
}

Triple triple_from_sample(const Sample& s) { return {s.image, s.density, s.mask, s.truth}; }

Triple augment(Triple t, std::mt19937_64& rng) {
  const bool at_stride = t.density.same_shape(t.mask) && t.image.height() == t.density.height() * kOutputStride &&
                         t.image.width() == t.density.width() * kOutputStride;
  if (!at_stride) check_aligned(t);
  if (std::bernoulli_distribution(0.5)(rng)) {
    t.image = flip_horizontal(t.image);
    t.density = flip_horizontal(t.density);
    t.mask = flip_horizontal(t.mask);
  }
  return t;
}

std::vector<Triple> crop_patches(const Triple& full, int n, int width, int height, std::mt19937_64& rng) {
  MC_CHECK(n > 0, UsageError, "number of patches must be positive");
  MC_CHECK(width > 0 && height > 0, UsageError, "patch size must be positive");
  check_aligned(full);
  const Triple padded = reflect_pad_to(full, height, width);
  std::uniform_int_distribution<int> top(0, padded.image.height() - height);
  std::uniform_int_distribution<int> left(0, padded.image.width() - width);
  std::vector<Triple> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int t = top(rng);
    const int l = left(rng);
    out.push_back(crop_triple(padded, t, l, height, width));
  }
  return out;
}

Triple to_training_example(const Triple& patch) {
  check_aligned(patch);
  Triple ex;
  ex.image = pad_to_multiple(patch.image, kOutputStride);
  ex.density = downsample_density(patch.density, kOutputStride);
  ex.mask = downsample_mask(patch.mask, kOutputStride);
  ex.truth = patch.truth;
  return ex;
}

VectorSource::VectorSource(const std::vector<Triple>& patches) {
  examples_.reserve(patches.size());
  for (const auto& p : patches) examples_.push_back(to_training_example(p));
}

CropSource::CropSource(std::vector<Triple> images, int per_image, int width, int height, std::uint64_t seed)
    : width_(width), height_(height) {
  MC_CHECK(per_image > 0, UsageError, "patches per image must be positive");
  images_.reserve(images.size());
  for (auto& t : images) images_.push_back(reflect_pad_to(t, height, width));
  for (std::size_t i = 0; i < images_.size(); ++i) {
    auto rng = derived_rng(seed, 0xC0FFEE, i);
    std::uniform_int_distribution<int> top(0, images_[i].image.height() - height);
    std::uniform_int_distribution<int> left(0, images_[i].image.width() - width);
    for (int k = 0; k < per_image; ++k) {
      const int t = top(rng);
      crops_.push_back({i, t, left(rng)});
    }
  }
}

Triple CropSource::example(std::size_t i) const {
  const auto& c = crops_[i];
  return to_training_example(crop_triple(images_[c.image], c.top, c.left, height_, width_));
}

Tensor image_tensor(const Image& image) { return Tensor::from_grid(pad_to_multiple(image, kOutputStride)); }

double predict_count(Model& model, const Image& image, bool clamp) {
  const auto out = model.forward(image_tensor(image), Phase::Test);
  return count_from_density(out.density, clamp);
}

double count_mae(Model& model, const std::vector<Triple>& set, bool clamp) {
  MC_CHECK(!set.empty(), UsageError, "cannot compute MAE over an empty set");
  double sum = 0.0;
  for (const auto& t : set) sum += std::abs(predict_count(model, t.image, clamp) - t.truth);
  return sum / static_cast<double>(set.size());
}

TrainResult train(Model& model, const ExampleSource& data, const TrainSchedule& schedule, const LossConfig& loss,
                  const TrainHooks& hooks) {
  validate(schedule);
  validate(loss);
  MC_CHECK(data.size() > 0, UsageError, "training set is empty");

  auto params = model.params();
  std::unique_ptr<Optimizer> optimizer;
  TrainResult result;
  const std::size_t n = data.size();
  const auto batch = static_cast<std::size_t>(schedule.batch_size);
  std::vector<Triple> slots(batch);

  for (int epoch = 1; epoch <= schedule.total_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto kind = optimizer_for_epoch(schedule, epoch);
    if (!optimizer || optimizer->name() != kind) {
      if (optimizer && hooks.on_event)
        hooks.on_event("epoch " + std::to_string(epoch) + ": optimizer switch " + std::string(optimizer->name()) +
                       " -> " + std::string(kind));
      if (kind == "adam")
        optimizer = std::make_unique<Adam>();
      else
        optimizer = std::make_unique<Sgd>(schedule.sgd_momentum);
    }
    const double lr = learning_rate(schedule, epoch);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto shuffle_rng = derived_rng(schedule.seed, static_cast<std::uint64_t>(epoch), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double sum_mask = 0.0, sum_density = 0.0, sum_total = 0.0;
    int step = 0;
    for (std::size_t start = 0; start < n; start += batch, ++step) {
      const std::size_t count = std::min(batch, n - start);
      auto prepare = [&](std::size_t j) {
        auto rng = derived_rng(schedule.seed, static_cast<std::uint64_t>(epoch), 1 + start + j);
        slots[j] = augment(data.example(order[start + j]), rng);
      };
      const auto workers = std::min<std::size_t>(static_cast<std::size_t>(schedule.workers), count);
      if (workers <= 1) {
        for (std::size_t j = 0; j < count; ++j) prepare(j);
      } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
          pool.emplace_back([&, w] {
            for (std::size_t j = w; j < count; j += workers) prepare(j);
          });
        for (auto& th : pool) th.join();
      }

      model.zero_grad();
      const double scale = 1.0 / static_cast<double>(count);
      for (std::size_t j = 0; j < count; ++j) {
        const Triple& ex = slots[j];
        const auto out = model.forward(Tensor::from_grid(ex.image), Phase::Train, &ex.mask);
        const auto obj = variant_objective(model.variant(), out, ex.mask, ex.density, loss, scale);
        if (!std::isfinite(obj.total)) throw NumericError(epoch, step + 1, "non-finite training loss");
        model.backward(obj.grads);
        sum_mask += obj.mask;
        sum_density += obj.density;
        sum_total += obj.total;
      }
      optimizer->step(params, lr);
    }

    EpochLog row;
    row.epoch = epoch;
    row.lr = lr;
    row.optimizer = std::string(kind);
    row.loss_mask = sum_mask / static_cast<double>(n);
    row.loss_density = sum_density / static_cast<double>(n);
    row.loss_total = sum_total / static_cast<double>(n);
    auto guarded_mae = [&](const std::vector<Triple>& set) {
      try {
        return count_mae(model, set, hooks.clamp_counts);
      } catch (const InvariantError& e) {
        throw NumericError(epoch, step, e.what());
      }
    };
    if (hooks.train_eval && !hooks.train_eval->empty()) row.train_mae = guarded_mae(*hooks.train_eval);
    bool improved = false;
    if (hooks.validation && !hooks.validation->empty()) {
      row.val_mae = guarded_mae(*hooks.validation);
      if (std::isnan(result.best_val_mae) || row.val_mae < result.best_val_mae) {
        result.best_val_mae = row.val_mae;
        result.best_epoch = epoch;
        improved = true;
      }
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(row);
    if (hooks.on_epoch) hooks.on_epoch(row, model, improved);
    if (hooks.stop_below_train_mae >= 0.0 && row.train_mae < hooks.stop_below_train_mae) break;
  }
  return result;
}

}  // namespace maskcount

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
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "losses.hpp"
#include "model.hpp"

namespace maskcount {

/// Resolution reduction of the backbone (two 2x2 pools).
inline constexpr int kOutputStride = 4;

struct TrainSchedule {
  int adam_epochs = 10;  // Adam for epochs 1..adam_epochs, SGD afterwards
  double base_lr = 1e-5;
  double decay_factor = 0.1;
  int decay_every = 20;
  int total_epochs = 100;
  int batch_size = 16;
  double sgd_momentum = 0.9;
  std::uint64_t seed = 0;
  int workers = 1;  // batch preparation threads; results do not depend on this
};

void validate(const TrainSchedule& s);

/// base_lr * decay_factor^floor((epoch-1)/decay_every), epochs counted from 1.
double learning_rate(const TrainSchedule& s, int epoch);
/// "adam" or "sgd".
std::string_view optimizer_for_epoch(const TrainSchedule& s, int epoch);

/// Image with aligned density and mask. Depending on the stage the ground truth
/// is at image resolution (patches) or at the network's output stride (examples).
struct Triple {
  Image image;
  DensityMap density;
  ForegroundMask mask;
  double truth = 0.0;  // ground-truth count used for MAE
};

Triple triple_from_sample(const Sample& s);

/// With probability 1/2 flips all three grids horizontally. Accepts triples at
/// image resolution and training examples (ground truth at the output stride).
Triple augment(Triple t, std::mt19937_64& rng);

/// `n` random crops of `width` x `height`. Top-left corners are uniform over
/// positions where the crop fits; inputs smaller than the crop are reflect-padded first.
std::vector<Triple> crop_patches(const Triple& full, int n, int width, int height, std::mt19937_64& rng);

/// Pads the patch to a multiple of the output stride and sum-pools its ground truth.
Triple to_training_example(const Triple& patch);

/// Random-access training data; example(i) returns a training-ready triple.
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual Triple example(std::size_t i) const = 0;
};

class VectorSource : public ExampleSource {
 public:
  /// Converts each full-resolution triple with to_training_example.
  explicit VectorSource(const std::vector<Triple>& patches);
  std::size_t size() const override { return examples_.size(); }
  Triple example(std::size_t i) const override { return examples_[i]; }

 private:
  std::vector<Triple> examples_;
};

/// Fixed random crops materialized on demand, so memory stays at one image set.
class CropSource : public ExampleSource {
 public:
  CropSource(std::vector<Triple> images, int per_image, int width, int height, std::uint64_t seed);
  std::size_t size() const override { return crops_.size(); }
  Triple example(std::size_t i) const override;

 private:
  struct Crop {
    std::size_t image;
    int top, left;
  };
  std::vector<Triple> images_;
  std::vector<Crop> crops_;
  int width_, height_;
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  std::string optimizer;
  double loss_mask = 0.0;
  double loss_density = 0.0;
  double loss_total = 0.0;
  double train_mae = std::numeric_limits<double>::quiet_NaN();
  double val_mae = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
};

struct TrainHooks {
  const std::vector<Triple>* train_eval = nullptr;  // full images for train MAE (test-phase forward)
  const std::vector<Triple>* validation = nullptr;
  bool clamp_counts = false;
  /// Stop after the first epoch whose train MAE falls below this value (disabled when negative).
  double stop_below_train_mae = -1.0;
  std::function<void(std::string_view line)> on_event;
  std::function<void(const EpochLog&, Model&, bool improved_validation)> on_epoch;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_mae = std::numeric_limits<double>::quiet_NaN();
};

/// Runs the schedule. Throws NumericError on a non-finite loss.
TrainResult train(Model& model, const ExampleSource& data, const TrainSchedule& schedule, const LossConfig& loss,
                  const TrainHooks& hooks = {});

/// Predicted count for one image (test phase, padded to the output stride).
double predict_count(Model& model, const Image& image, bool clamp = false);
/// Mean absolute count error over `set`.
double count_mae(Model& model, const std::vector<Triple>& set, bool clamp = false);

/// Image padded to the output stride as a 1 x H x W tensor.
Tensor image_tensor(const Image& image);

}  // namespace maskcount

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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "checkpoint.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "synth.hpp"
#include "tempdir.hpp"
#include "trainer.hpp"

using namespace maskcount;

namespace {

std::vector<Triple> tiny_set(std::size_t n, int h = 16, int w = 20, std::uint64_t seed = 1) {
  SceneSpec spec;
  spec.width = w;
  spec.height = h;
  spec.count_min = 1;
  spec.count_max = 4;
  spec.radius_min = 1.5;
  spec.radius_max = 2.5;
  spec.seed = seed;
  std::vector<Triple> out;
  for (const auto& s : synth_scenes(spec, n)) {
    const auto d = generate_density_map(s.annotation, {2.0, 5});
    out.push_back({s.image, d, derive_mask(d), static_cast<double>(s.annotation.count())});
  }
  return out;
}

BackboneConfig tiny_net() {
  BackboneConfig c;
  c.width_divisor = 16;
  c.init_std = 0.1;
  return c;
}

TrainSchedule quick(int total, int adam) {
  TrainSchedule s;
  s.total_epochs = total;
  s.adam_epochs = adam;
  s.batch_size = 2;
  s.base_lr = 1e-3;
  s.seed = 9;
  return s;
}

std::vector<double> flat_params(Model& m) {
  std::vector<double> v;
  for (auto& p : m.params()) v.insert(v.end(), p.param->value.begin(), p.param->value.end());
  return v;
}

}  // namespace

TEST(Schedule, LearningRateStaircase) {
  TrainSchedule s;
  // values from tests/oracles/frozen_values.py
  EXPECT_DOUBLE_EQ(learning_rate(s, 1), 1e-5);
  EXPECT_DOUBLE_EQ(learning_rate(s, 20), 1e-5);
  EXPECT_DOUBLE_EQ(learning_rate(s, 21), 1.0000000000000002e-06);
  EXPECT_DOUBLE_EQ(learning_rate(s, 41), 1.0000000000000002e-07);
  EXPECT_DOUBLE_EQ(learning_rate(s, 100), 1.0000000000000003e-09);
  for (int e = 1; e < 200; ++e) EXPECT_LE(learning_rate(s, e + 1), learning_rate(s, e));
}

TEST(Schedule, OptimizerSwitchesAtEpochEleven) {
  TrainSchedule s;
  for (int e = 1; e <= 10; ++e) EXPECT_EQ(optimizer_for_epoch(s, e), "adam");
  EXPECT_EQ(optimizer_for_epoch(s, 11), "sgd");
  s.total_epochs = 0;
  EXPECT_THROW(validate(s), UsageError);
}

TEST(Augment, FlipIsInvolutionAndConsistent) {
  auto set = tiny_set(3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 r1(seed), r2(seed);
    const Triple once = augment(set[0], r1);
    std::mt19937_64 r3(seed);
    const Triple twice = augment(augment(set[0], r2), r3);
    EXPECT_EQ(twice.image, set[0].image);
    EXPECT_EQ(twice.density, set[0].density);
    EXPECT_EQ(twice.mask, set[0].mask);
    EXPECT_EQ(once.density.total(), set[0].density.total());
    EXPECT_EQ(derive_mask(once.density), once.mask);
  }
}

TEST(Augment, FlipsSometimes) {
  auto set = tiny_set(1);
  int flipped = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 r(seed);
    flipped += !(augment(set[0], r).image == set[0].image);
  }
  EXPECT_GT(flipped, 60);
  EXPECT_LT(flipped, 140);
}

TEST(Crop, ShapeCountAndWholeImage) {
  auto set = tiny_set(1, 200, 240);
  std::mt19937_64 rng(1);
  const auto patches = crop_patches(set[0], 200, 192, 160, rng);
  ASSERT_EQ(patches.size(), 200u);
  for (const auto& p : patches) {
    EXPECT_EQ(p.image.width(), 192);
    EXPECT_EQ(p.image.height(), 160);
    EXPECT_TRUE(p.density.same_shape(p.image));
    EXPECT_EQ(derive_mask(p.density), p.mask);
  }
  const auto whole = crop_patches(set[0], 1, 240, 200, rng);
  EXPECT_EQ(whole[0].density.total(), set[0].density.total());
}

TEST(Crop, SmallImagesAreReflectPadded) {
  auto set = tiny_set(1, 16, 20);
  std::mt19937_64 rng(2);
  const auto p = crop_patches(set[0], 3, 32, 24, rng);
  EXPECT_EQ(p[0].image.width(), 32);
  EXPECT_EQ(p[0].image.height(), 24);
}

TEST(Crop, TilingPartitionsTheSum) {
  auto set = tiny_set(1, 64, 96, 4);
  double sum = 0.0;
  for (int t = 0; t < 64; t += 16)
    for (int l = 0; l < 96; l += 32) {
      // a single crop of the exact tile via a degenerate image
      Triple tile;
      tile.image = crop(set[0].image, t, l, 16, 32);
      tile.density = crop(set[0].density, t, l, 16, 32);
      tile.mask = crop(set[0].mask, t, l, 16, 32);
      std::mt19937_64 rng(0);
      sum += crop_patches(tile, 1, 32, 16, rng)[0].density.total();
    }
  EXPECT_NEAR(sum, set[0].density.total(), 1e-6);
}

TEST(Examples, GroundTruthAtOutputStride) {
  auto set = tiny_set(1, 18, 21);
  const Triple ex = to_training_example(set[0]);
  EXPECT_EQ(ex.image.height(), 20);
  EXPECT_EQ(ex.image.width(), 24);
  EXPECT_EQ(ex.density.height(), 5);
  EXPECT_EQ(ex.density.width(), 6);
  EXPECT_NEAR(ex.density.total(), set[0].density.total(), 1e-12);
  EXPECT_EQ(ex.mask, derive_mask(ex.density));
}

TEST(Train, SwitchEventOnceAtConfiguredEpoch) {
  auto set = tiny_set(4);
  VectorSource src(set);
  auto model = assemble_model(FusionVariant::S5, tiny_net(), 1);
  std::vector<std::string> events;
  TrainHooks hooks;
  hooks.on_event = [&](std::string_view e) { events.emplace_back(e); };
  const auto r = train(model, src, quick(12, 10), {}, hooks);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0], "epoch 11: optimizer switch adam -> sgd");
  ASSERT_EQ(r.log.size(), 12u);
  EXPECT_EQ(r.log[9].optimizer, "adam");
  EXPECT_EQ(r.log[10].optimizer, "sgd");
}

TEST(Train, DeterministicAcrossRunsAndWorkerCounts) {
  auto set = tiny_set(5);
  VectorSource src(set);
  auto run = [&](int workers) {
    auto model = assemble_model(FusionVariant::S3, tiny_net(), 2);
    auto s = quick(3, 2);
    s.workers = workers;
    train(model, src, s, {});
    return flat_params(model);
  };
  const auto a = run(1), b = run(1), c = run(3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Train, LossDecreasesOnTinySet) {
  auto set = tiny_set(4);
  VectorSource src(set);
  auto model = assemble_model(FusionVariant::S2, tiny_net(), 3);
  const auto r = train(model, src, quick(15, 15), {});
  EXPECT_LT(r.log.back().loss_total, r.log.front().loss_total);
}

TEST(Train, NanAborts) {
  auto set = tiny_set(2);
  set[1].image(3, 3) = std::nan("");
  VectorSource src(set);
  auto model = assemble_model(FusionVariant::S5, tiny_net(), 1);
  EXPECT_THROW(train(model, src, quick(2, 1), {}), NumericError);
}

TEST(Train, EarlyStopOnTrainMae) {
  auto set = tiny_set(2);
  VectorSource src(set);
  auto model = assemble_model(FusionVariant::B1, tiny_net(), 1);
  TrainHooks hooks;
  hooks.train_eval = &set;
  hooks.stop_below_train_mae = 1e9;
  const auto r = train(model, src, quick(5, 5), {}, hooks);
  EXPECT_EQ(r.log.size(), 1u);
  EXPECT_FALSE(std::isnan(r.log[0].train_mae));
}

TEST(Train, CropSourceIsFixedAndAligned) {
  auto set = tiny_set(2, 40, 48);
  CropSource a(set, 3, 16, 12, 5), b(set, 3, 16, 12, 5);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ea = a.example(i), eb = b.example(i);
    EXPECT_EQ(ea.image, eb.image);
    EXPECT_EQ(ea.image.height(), 12);
    EXPECT_EQ(ea.density.height(), 3);
    EXPECT_EQ(ea.density.width(), 4);
  }
}

TEST(Checkpoint, RoundTripReproducesMaeBitForBit) {
  testutil::TempDir tmp;
  auto set = tiny_set(4);
  VectorSource src(set);
  RunConfig cfg;
  cfg.variant = FusionVariant::S4;
  cfg.backbone = tiny_net();
  cfg.schedule = quick(2, 1);
  auto model = assemble_model(cfg.variant, cfg.backbone, 7);
  train(model, src, cfg.schedule, cfg.loss);
  const double before = count_mae(model, set);
  save_checkpoint(tmp / "ck", model, cfg, 2);
  auto ck = load_checkpoint(tmp / "ck");
  EXPECT_EQ(ck.epoch, 2);
  EXPECT_EQ(ck.model.variant(), FusionVariant::S4);
  EXPECT_EQ(count_mae(ck.model, set), before);
  EXPECT_EQ(flat_params(ck.model), flat_params(model));
  EXPECT_EQ(to_config_text(ck.config), to_config_text(cfg));
}

TEST(Checkpoint, VariantMismatchAndCorruption) {
  testutil::TempDir tmp;
  RunConfig cfg;
  cfg.variant = FusionVariant::S2;
  cfg.backbone = tiny_net();
  auto model = assemble_model(cfg.variant, cfg.backbone, 1);
  save_checkpoint(tmp / "ck", model, cfg, 1);
  EXPECT_THROW(load_checkpoint(tmp / "ck", FusionVariant::S5), DataError);
  EXPECT_NO_THROW(load_checkpoint(tmp / "ck", FusionVariant::S2));
  // weights of another variant under this manifest
  auto other = assemble_model(FusionVariant::S5, cfg.backbone, 1);
  save_checkpoint(tmp / "ck5", other, cfg, 1);
  std::filesystem::copy_file(tmp / "ck5" / "params.bin", tmp / "ck" / "params.bin",
                             std::filesystem::copy_options::overwrite_existing);
  EXPECT_THROW(load_checkpoint(tmp / "ck"), DataError);
  EXPECT_THROW(load_checkpoint(tmp / "nothing"), DataError);
}

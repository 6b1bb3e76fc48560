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

#include <random>
#include <set>

#include "backbone.hpp"
#include "errors.hpp"
#include "fusion.hpp"
#include "gradcheck.hpp"
#include "heads.hpp"
#include "losses.hpp"
#include "model.hpp"
#include "oracles.hpp"

using namespace maskcount;

namespace {

Tensor random_image(std::mt19937_64& rng, int h, int w) {
  Tensor t(1, h, w);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

BackboneConfig small(int divisor = 8) {
  BackboneConfig c;
  c.width_divisor = divisor;
  c.init_std = 0.1;
  return c;
}

std::size_t count_with_prefix(Model& m, const std::string& prefix) {
  std::size_t n = 0;
  for (auto& p : m.params())
    if (p.name.rfind(prefix, 0) == 0) n += p.param->size();
  return n;
}

}  // namespace

TEST(Backbone, OutputShapeLaw) {
  Backbone b = build_backbone(small(), 1);
  std::mt19937_64 rng(1);
  for (auto [h, w] : {std::pair{4, 4}, {5, 7}, {8, 8}, {13, 9}, {16, 21}}) {
    const Tensor y = b.forward(random_image(rng, h, w));
    EXPECT_EQ(y.channels(), b.feature_channels());
    EXPECT_EQ(y.height(), (h + 3) / 4);
    EXPECT_EQ(y.width(), (w + 3) / 4);
  }
  EXPECT_THROW(b.forward(Tensor(1, 3, 8)), InvariantError);
  EXPECT_THROW(b.forward(Tensor(2, 8, 8)), InvariantError);
}

TEST(Backbone, FullWidthShapes) {
  Backbone b = build_backbone({}, 0);
  EXPECT_EQ(b.feature_channels(), 256);
  EXPECT_EQ(b.forward(Tensor(1, 4, 4)).height(), 1);
}

TEST(Backbone, SameSeedSameParameters) {
  Backbone a = build_backbone(small(4), 42), b = build_backbone(small(4), 42), c = build_backbone(small(4), 43);
  std::vector<ParamRef> pa, pb, pc;
  a.collect_params("", pa);
  b.collect_params("", pb);
  c.collect_params("", pc);
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].param->value, pb[i].param->value);
    any_diff |= pa[i].param->value != pc[i].param->value;
  }
  EXPECT_TRUE(any_diff);
}

TEST(Backbone, ZeroImageGivesZeroFeatures) {
  Backbone b = build_backbone(small(), 3);
  const Tensor y = b.forward(Tensor(1, 12, 12));
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(Backbone, NonlinearInScale) {
  Backbone b = build_backbone(small(), 3);
  std::mt19937_64 rng(2);
  Tensor x = random_image(rng, 16, 16);
  for (auto& v : x.values()) v -= 0.5;
  Tensor x2 = x;
  for (auto& v : x2.values()) v *= -2.0;
  const Tensor y1 = b.forward(x), y2 = b.forward(x2);
  EXPECT_TRUE(y1.same_shape(y2));
  bool linear = true;
  for (std::size_t i = 0; i < y1.size(); ++i) linear &= std::fabs(y2[i] + 2.0 * y1[i]) < 1e-12;
  EXPECT_FALSE(linear);
}

TEST(Backbone, GradientOfSumMatchesFiniteDifferences) {
  Backbone b = build_backbone(small(), 5);
  std::mt19937_64 rng(3);
  const Tensor x = random_image(rng, 8, 8);
  std::vector<ParamRef> params;
  b.collect_params("backbone", params);
  gradcheck::randomize_biases(params, rng);
  Tensor probe = b.forward(x);
  const auto res = gradcheck::check(
      params, "backbone", [&] { return b.forward(x).sum(); },
      [&] {
        const Tensor y = b.forward(x);
        b.backward(Tensor(y.channels(), y.height(), y.width(), 1.0));
      },
      20, rng);
  EXPECT_LT(res.worst, 1e-3) << res.worst_name;
}

TEST(Heads, ShapesAndZeroInputs) {
  MaskBranch mb(16);
  DensityBranch db(16);
  MaskEmbed me(16, 8);
  ConcatRegressor cr(16);
  const Tensor f(16, 6, 5);
  const Tensor logits = mb.forward(f);
  EXPECT_EQ(logits.channels(), 1);
  EXPECT_EQ(logits.height(), 6);
  const Tensor posterior = sigmoid(logits);
  for (double v : posterior.values()) EXPECT_EQ(v, 0.5);
  const Tensor dens = db.forward(f);
  for (double v : dens.values()) EXPECT_EQ(v, 0.0);
  const Tensor e = me.forward(Tensor(1, 6, 5));
  EXPECT_EQ(e.channels(), 16);
  for (double v : e.values()) EXPECT_EQ(v, 0.0);
  const Tensor out = cr.forward(f, f);
  EXPECT_EQ(out.channels(), 1);
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(mb.forward(Tensor(15, 2, 2)), InvariantError);
  EXPECT_THROW(cr.forward(f, Tensor(8, 6, 5)), InvariantError);
}

TEST(Heads, RegressorGradientReachesBothInputs) {
  std::mt19937_64 rng(6);
  ConcatRegressor cr(4);
  cr.init(rng, 0.3);
  Tensor a(4, 3, 3), b(4, 3, 3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& v : a.values()) v = n(rng);
  for (auto& v : b.values()) v = n(rng);
  const Tensor probe = cr.forward(a, b);
  const auto [ga, gb] = cr.backward(Tensor(1, 3, 3, 1.0));
  auto numeric = [&](Tensor& t, std::size_t i) {
    const double s = t[i];
    t[i] = s + 1e-5;
    const double up = cr.forward(a, b).sum();
    t[i] = s - 1e-5;
    const double down = cr.forward(a, b).sum();
    t[i] = s;
    return (up - down) / 2e-5;
  };
  EXPECT_LT(gradcheck::relative_error(ga[13], numeric(a, 13)), 1e-3);
  EXPECT_LT(gradcheck::relative_error(gb[22], numeric(b, 22)), 1e-3);
  EXPECT_NE(gb[22], 0.0);
}

TEST(Model, VariantNames) {
  for (auto v : kAllVariants) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_EQ(parse_variant("s5"), FusionVariant::S5);
  EXPECT_THROW(parse_variant("S6"), UsageError);
}

TEST(Model, ParameterCountsMatchOracle) {
  // values from tests/oracles/frozen_values.py
  EXPECT_EQ(assemble_model(FusionVariant::S5, {}, 0).param_count(), 3145458u);
  EXPECT_EQ(assemble_model(FusionVariant::S1, {}, 0).param_count(), 1817202u);
  EXPECT_EQ(assemble_model(FusionVariant::B1, {}, 0).param_count(), 1226865u);
  auto s5 = assemble_model(FusionVariant::S5, {}, 0);
  EXPECT_LT(s5.param_count(), 5100000u);
  EXPECT_EQ(s5.mask_param_count(), 590337u);
  EXPECT_EQ(count_with_prefix(s5, "backbone."), 636528u);
}

TEST(Model, BaselinesHaveNoMaskParameters) {
  for (auto v : {FusionVariant::B1, FusionVariant::B2, FusionVariant::B3}) {
    auto m = assemble_model(v, small(), 0);
    EXPECT_EQ(m.mask_param_count(), 0u) << to_string(v);
  }
  auto b2 = assemble_model(FusionVariant::B2, small(), 0);
  auto s5 = assemble_model(FusionVariant::S5, small(), 0);
  EXPECT_EQ(b2.param_count(), s5.param_count());
  EXPECT_GT(count_with_prefix(b2, "aux."), 0u);
}

TEST(Model, S1AndS2ShareParameterShapes) {
  auto a = assemble_model(FusionVariant::S1, small(), 0), b = assemble_model(FusionVariant::S2, small(), 0);
  auto pa = a.params(), pb = b.params();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].name, pb[i].name);
    EXPECT_EQ(pa[i].param->shape, pb[i].param->shape);
  }
}

TEST(Model, AllVariantsShareOutputShape) {
  std::mt19937_64 rng(7);
  const Tensor x = random_image(rng, 20, 28);
  for (auto v : kAllVariants) {
    auto m = assemble_model(v, small(), 1);
    ForegroundMask gt(5, 7, 1);
    const auto out = m.forward(x, Phase::Train, &gt);
    EXPECT_EQ(out.density.channels(), 1);
    EXPECT_EQ(out.density.height(), 5);
    EXPECT_EQ(out.density.width(), 7);
    EXPECT_EQ(m.forward(x, Phase::Test).density.height(), 5);
  }
}

TEST(Model, GtMaskRequiredForS1AndS4Training) {
  std::mt19937_64 rng(8);
  const Tensor x = random_image(rng, 8, 8);
  for (auto v : {FusionVariant::S1, FusionVariant::S4}) {
    auto m = assemble_model(v, small(), 1);
    EXPECT_THROW(m.forward(x, Phase::Train), UsageError);
    ForegroundMask wrong(3, 2);
    EXPECT_THROW(m.forward(x, Phase::Train, &wrong), InvariantError);
    EXPECT_NO_THROW(m.forward(x, Phase::Test));
  }
}

TEST(Model, BackwardNeedsTrainForward) {
  auto m = assemble_model(FusionVariant::S5, small(), 1);
  std::mt19937_64 rng(9);
  const Tensor x = random_image(rng, 8, 8);
  OutputGrads g;
  EXPECT_THROW(m.backward(g), UsageError);
  const auto out = m.forward(x, Phase::Test);
  g.density = Tensor(1, 2, 2, 1.0);
  EXPECT_THROW(m.backward(g), UsageError);
}

namespace {

// Gradient of the density term alone with respect to the mask branch.
double density_grad_into_mask(FusionVariant v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto m = assemble_model(v, small(), seed);
  const Tensor x = random_image(rng, 16, 16);
  ForegroundMask gt(4, 4);
  for (auto& g : gt.values()) g = std::uniform_int_distribution<int>(0, 1)(rng);
  const auto gt_density = oracle::random_density(rng, 4, 4, 0.3);
  m.zero_grad();
  const auto out = m.forward(x, Phase::Train, &gt);
  OutputGrads g;
  g.density = mse_density_loss(out.density, gt_density).grad;
  m.backward(g);
  double mx = 0.0;
  for (auto& p : m.params())
    if (p.name.rfind("mask.", 0) == 0)
      for (double d : p.param->grad) mx = std::max(mx, std::fabs(d));
  return mx;
}

}  // namespace

TEST(Model, GradientRouting) {
  for (auto v : {FusionVariant::S1, FusionVariant::S4}) EXPECT_EQ(density_grad_into_mask(v, 3), 0.0) << to_string(v);
  for (auto v : {FusionVariant::S2, FusionVariant::S3, FusionVariant::S5})
    EXPECT_GT(density_grad_into_mask(v, 3), 0.0) << to_string(v);
}

TEST(Model, EndToEndGradientS4AndS5) {
  for (auto v : {FusionVariant::S4, FusionVariant::S5, FusionVariant::S2, FusionVariant::B3}) {
    std::mt19937_64 rng(12);
    auto m = assemble_model(v, small(), 12);
    const Tensor x = random_image(rng, 8, 8);
    ForegroundMask gt(2, 2);
    gt(0, 1) = gt(1, 1) = 1;
    const auto gd = oracle::random_density(rng, 2, 2, 0.2);
    const LossConfig cfg{};
    gradcheck::randomize_biases(m.params(), rng);
    auto loss = [&] { return variant_objective(v, m.forward(x, Phase::Train, &gt), gt, gd, cfg).total; };
    auto backprop = [&] {
      const auto out = m.forward(x, Phase::Train, &gt);
      m.backward(variant_objective(v, out, gt, gd, cfg).grads);
    };
    for (const char* prefix : {"backbone", "mask", "aux", "embed", "regressor", "density"}) {
      const auto r = gradcheck::check(m.params(), prefix, loss, backprop, 10, rng);
      EXPECT_LT(r.worst, 1e-3) << to_string(v) << " " << r.worst_name;
    }
  }
}

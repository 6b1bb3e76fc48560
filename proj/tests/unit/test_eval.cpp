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

#include <algorithm>
#include <cmath>
#include <random>

#include "errors.hpp"
#include "eval.hpp"
#include "gt_pipeline.hpp"
#include "image_io.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace maskcount;

namespace {

std::vector<CountPair> random_pairs(std::mt19937_64& rng, std::size_t n, double max_truth = 900) {
  std::uniform_real_distribution<double> u(0.0, max_truth), noise(-40.0, 40.0);
  std::vector<CountPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::round(u(rng));
    out.push_back({"img" + std::to_string(i), std::max(0.0, t + noise(rng)), t});
  }
  return out;
}

}  // namespace

TEST(Count, SumsAndClamps) {
  EXPECT_EQ(count_from_density(Tensor(1, 3, 3)), 0.0);
  EXPECT_EQ(count_from_density(Tensor(1, 2, 2, 0.5)), 2.0);
  Tensor t(1, 1, 3);
  t[0] = 1.5;
  t[1] = -0.5;
  t[2] = 0.25;
  EXPECT_EQ(count_from_density(t), 1.25);
  EXPECT_EQ(count_from_density(t, true), 1.75);
  t[1] = std::nan("");
  EXPECT_THROW(count_from_density(t), InvariantError);
}

TEST(Count, GroundTruthScene) {
  std::mt19937_64 rng(37);
  PointAnnotation a;
  a.width = 120;
  a.height = 100;
  std::uniform_real_distribution<double> ux(0, 119.9), uy(0, 99.9);
  for (int i = 0; i < 37; ++i) a.points.push_back({ux(rng), uy(rng)});
  const auto d = generate_density_map(a);
  EXPECT_NEAR(count_from_density(Tensor::from_grid(d)), 37.0, 0.04);
}

TEST(Evaluate, ClosedForms) {
  std::vector<CountPair> same{{"a", 3, 3}, {"b", 7, 7}};
  auto r = evaluate(same);
  EXPECT_EQ(r.mae, 0.0);
  EXPECT_EQ(r.mse, 0.0);
  std::vector<CountPair> one{{"a", 10, 7}};
  r = evaluate(one);
  EXPECT_EQ(r.mae, 3.0);
  EXPECT_EQ(r.mse, 3.0);
  EXPECT_THROW(evaluate(std::vector<CountPair>{}), UsageError);
}

TEST(Evaluate, FrozenValues) {
  const std::vector<CountPair> p{{"0", 12.5, 10}, {"1", 0, 0}, {"2", 310, 305}, {"3", 650.25, 700}, {"4", 800, 712},
                                 {"5", 3, 1}};
  const auto r = evaluate(p);
  EXPECT_NEAR(r.mae, 24.541666666666668, 1e-12);
  EXPECT_NEAR(r.mse, 41.340683150298005, 1e-12);
  EXPECT_EQ(r.empty.n, 1u);
  ASSERT_EQ(r.strata.size(), 3u);
  EXPECT_EQ(r.strata[0].n, 2u);
  EXPECT_EQ(r.strata[1].n, 2u);
  EXPECT_EQ(r.strata[2].n, 1u);
  EXPECT_EQ(r.strata[2].mae, 88.0);
}

TEST(Evaluate, OracleAndInequalityOnRandomSets) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto pairs = random_pairs(rng, 1 + t % 60);
    std::vector<double> pr, gt;
    for (const auto& p : pairs) {
      pr.push_back(p.predicted);
      gt.push_back(p.truth);
    }
    const auto ref = oracle::metrics(pr, gt);
    const auto r = evaluate(pairs);
    EXPECT_NEAR(r.mae, ref.mae, 1e-9);
    EXPECT_NEAR(r.mse, ref.rmse, 1e-9);
    EXPECT_LE(r.mae, r.mse + 1e-12);
  }
}

TEST(Evaluate, PermutationInvariant) {
  std::mt19937_64 rng(6);
  auto pairs = random_pairs(rng, 40);
  const auto a = evaluate(pairs);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const auto b = evaluate(pairs);
  EXPECT_NEAR(a.mae, b.mae, 1e-12);
  EXPECT_NEAR(a.mse, b.mse, 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.strata[i].n, b.strata[i].n);
}

TEST(Evaluate, StrataRecombine) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto pairs = random_pairs(rng, 80);
    const auto r = evaluate(pairs);
    double s = 0.0, sum_abs = 0.0;
    std::size_t n = 0, nonzero = 0;
    for (const auto& st : r.strata)
      if (st.n > 0) {
        s += st.mae * static_cast<double>(st.n);
        n += st.n;
      }
    for (const auto& p : pairs)
      if (std::lround(p.truth) >= 1) {
        sum_abs += std::fabs(p.predicted - p.truth);
        ++nonzero;
      }
    ASSERT_EQ(n, nonzero);
    EXPECT_NEAR(s / static_cast<double>(n), sum_abs / static_cast<double>(nonzero), 1e-9);
    EXPECT_EQ(n + r.empty.n, pairs.size());
  }
}

TEST(Evaluate, StratumBoundaries) {
  const std::vector<CountPair> p{{"a", 0, 300}, {"b", 0, 301}, {"c", 0, 700}, {"d", 0, 701}, {"e", 0, 1}};
  const auto r = evaluate(p);
  EXPECT_EQ(r.strata[0].n, 2u);
  EXPECT_EQ(r.strata[1].n, 2u);
  EXPECT_EQ(r.strata[2].n, 1u);
  EXPECT_TRUE(std::isnan(r.empty.mae));
}

TEST(Report, FilesRoundTrip) {
  testutil::TempDir tmp;
  std::mt19937_64 rng(8);
  const auto pairs = random_pairs(rng, 12, 250);
  write_predictions_csv(tmp / "p.csv", pairs);
  const auto back = read_predictions_csv(tmp / "p.csv");
  ASSERT_EQ(back.size(), pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(back[i].id, pairs[i].id);
    EXPECT_EQ(back[i].predicted, pairs[i].predicted);
    EXPECT_EQ(back[i].truth, pairs[i].truth);
  }
  const auto r = evaluate(pairs);
  write_report_json(tmp / "r.json", r, r);
  const auto rb = read_report_json(tmp / "r.json");
  EXPECT_EQ(rb.mae, r.mae);
  EXPECT_EQ(rb.n, r.n);
  EXPECT_TRUE(std::isnan(rb.strata[2].mae));
  render_strata_chart(tmp / "c.png", r);
  const auto img = read_gray8(tmp / "c.png");
  EXPECT_GT(img.width(), 100);
}

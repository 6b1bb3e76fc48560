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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace maskcount {

/// Sum of the predicted density. With `clamp_negative`, negative cells count as 0.
/// Throws InvariantError on non-finite values.
double count_from_density(const Tensor& pred, bool clamp_negative = false);

struct CountPair {
  std::string id;
  double predicted = 0.0;
  double truth = 0.0;
};

struct Stratum {
  std::string label;
  long lo = 0;
  long hi = -1;  // -1: unbounded
  double mae = 0.0;  // NaN when empty
  std::size_t n = 0;
};

/// MAE and root-mean-square error over images, plus MAE per crowd-density level:
/// low (1-300), middle (301-700), high (701+). Images whose ground truth rounds to
/// zero go to the separate "empty" bucket.
struct EvalReport {
  double mae = 0.0;
  double mse = 0.0;  // root of the mean squared error
  std::size_t n = 0;
  std::vector<Stratum> strata;
  Stratum empty;
};

/// Throws UsageError on empty input.
EvalReport evaluate(std::span<const CountPair> pairs);

void write_predictions_csv(const std::filesystem::path& path, std::span<const CountPair> pairs);
std::vector<CountPair> read_predictions_csv(const std::filesystem::path& path);

/// {"raw": report, "clamped": report}
void write_report_json(const std::filesystem::path& path, const EvalReport& raw, const EvalReport& clamped);
EvalReport read_report_json(const std::filesystem::path& path, const std::string& which = "raw");

/// Bar chart of per-stratum MAE (low, middle, high, empty), one bar per bucket.
void render_strata_chart(const std::filesystem::path& path, const EvalReport& report);

}  // namespace maskcount

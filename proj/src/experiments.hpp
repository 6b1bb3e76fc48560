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
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "eval.hpp"
#include "synth.hpp"

namespace maskcount {

/// Writes `run_manifest.json` (command, config hash, seed, code version, extra fields) into `out_dir`.
void write_run_manifest(const std::filesystem::path& out_dir, const std::string& command, const std::string& config_text,
                        std::uint64_t seed, const std::map<std::string, std::string>& extra = {});

DatasetManifest run_synth(const SceneSpec& spec, std::size_t n, Split split, const std::filesystem::path& out_dir);

/// Density (`density/ID.mca`, float32) and mask (`mask/ID.png`) ground truth for every entry.
/// `source` is a manifest file or a dataset layout directory; for a layout the
/// generated manifest is written to `out_dir/manifest.json`.
std::size_t run_gen_gt(const std::filesystem::path& source, const KernelConfig& kernel, const std::filesystem::path& out_dir);

struct TrainRunSummary {
  int epochs_run = 0;
  int switch_epoch = 0;  // 0 if the optimizer never switched
  double final_train_mae = 0.0;
  double final_val_mae = 0.0;  // NaN without a validation set
  double best_val_mae = 0.0;
  std::size_t param_count = 0;
  std::size_t mask_param_count = 0;
  std::filesystem::path last_checkpoint;
};

/// Trains per `cfg` and writes config.toml, run_manifest.json, epoch_log.csv,
/// train.log and checkpoints/{last,best} under `out_dir`.
TrainRunSummary run_train(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream* progress = nullptr);

struct EvalOutcome {
  EvalReport raw;
  EvalReport clamped;
  std::vector<CountPair> pairs;
};

/// Evaluates a checkpoint on a manifest. With `out_dir`, writes predictions.csv,
/// report.json, strata.png and run_manifest.json.
EvalOutcome run_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& manifest,
                     const std::optional<std::filesystem::path>& out_dir);

struct PredictOutcome {
  double count = 0.0;
  double count_clamped = 0.0;
};

/// `dump_mask` ending in .png gets the thresholded mask; any other extension the
/// float32 posterior.
PredictOutcome run_predict(const std::filesystem::path& checkpoint, const std::filesystem::path& image,
                           const std::optional<std::filesystem::path>& dump_density,
                           const std::optional<std::filesystem::path>& dump_mask);

struct AblationRow {
  FusionVariant variant{};
  std::vector<double> mae;  // one per seed
  std::vector<double> mse;
  double mae_mean = 0.0, mae_std = 0.0, mse_mean = 0.0, mse_std = 0.0;
};

/// Trains and evaluates every (variant, seed) pair; writes ablation.csv,
/// ablation.md and runs.csv under `out_dir`.
std::vector<AblationRow> run_ablate(const RunConfig& cfg, const std::vector<FusionVariant>& variants,
                                    const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out_dir,
                                    std::ostream* progress = nullptr);

/// Renders a report.json as a strata bar chart and returns a text summary.
std::string run_report(const std::filesystem::path& report_json, const std::filesystem::path& chart_png);

}  // namespace maskcount

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
#include <string>

#include "backbone.hpp"
#include "gt_pipeline.hpp"
#include "losses.hpp"
#include "model.hpp"
#include "trainer.hpp"

namespace maskcount {

/// Everything a training run needs. Serialized as flat `key = value` lines.
struct RunConfig {
  FusionVariant variant = FusionVariant::S5;
  BackboneConfig backbone;
  LossConfig loss;
  TrainSchedule schedule;
  KernelConfig kernel;

  std::filesystem::path train_manifest;
  std::filesystem::path val_manifest;   // optional
  std::filesystem::path test_manifest;  // optional; used by ablate (falls back to val)

  int patches_per_image = 0;  // 0 trains on whole images
  int patch_width = 192;
  int patch_height = 160;
  bool clamp_counts = false;
  bool eval_train = true;
  double stop_train_mae = -1.0;
};

/// Parses `key = value` lines; `#` starts a comment, string values may be quoted.
/// Unknown keys are a UsageError. Relative paths resolve against the file's directory.
RunConfig read_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

std::map<std::string, std::string> to_key_values(const RunConfig& cfg);
std::string to_config_text(const RunConfig& cfg);

void validate(const RunConfig& cfg);

/// 64-bit FNV-1a, hex encoded. Stable across platforms.
std::string stable_hash(const std::string& text);

}  // namespace maskcount

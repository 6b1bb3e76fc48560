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
#include <optional>

#include "config.hpp"
#include "model.hpp"

namespace maskcount {

/// A checkpoint directory holds `manifest.json` (variant, config, epoch, seed,
/// parameter list) and `params.bin` (named float64 arrays).
struct Checkpoint {
  Model model;
  RunConfig config;
  int epoch = 0;
};

void save_checkpoint(const std::filesystem::path& dir, Model& model, const RunConfig& config, int epoch);

/// Rebuilds the model from the manifest and loads its weights. If `expected` is
/// given and differs from the recorded variant, or the weights do not match the
/// variant's parameter layout, throws DataError.
Checkpoint load_checkpoint(const std::filesystem::path& dir, std::optional<FusionVariant> expected = std::nullopt);

const char* code_version();

}  // namespace maskcount

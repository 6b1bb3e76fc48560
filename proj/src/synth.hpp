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
#include <filesystem>
#include <vector>

#include "dataset.hpp"

namespace maskcount {

enum class Background { Flat, Gradient, Noise };

std::string_view to_string(Background b);
Background parse_background(std::string_view s);

struct SceneSpec {
  int width = 192;
  int height = 160;
  int count_min = 10;
  int count_max = 60;
  double radius_min = 2.5;  // pixels
  double radius_max = 5.0;
  Background background = Background::Noise;
  std::uint64_t seed = 0;
};

void validate(const SceneSpec& spec);

/// A rendered scene. Pixel values are already quantized to 8 bits so a PNG
/// round trip is lossless.
struct Scene {
  Image image;
  PointAnnotation annotation;
  std::size_t blob_count = 0;
};

/// Scene `index` of the stream defined by `spec.seed`; independent of how many are drawn.
Scene synth_scene(const SceneSpec& spec, std::size_t index);
std::vector<Scene> synth_scenes(const SceneSpec& spec, std::size_t n);

/// Writes `images/`, `annotations/` and `manifest.json` under `out_dir`.
DatasetManifest synth_generate(const SceneSpec& spec, std::size_t n, const std::filesystem::path& out_dir,
                               Split split = Split::Train);

}  // namespace maskcount

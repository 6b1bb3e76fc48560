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
#include <string>
#include <vector>

#include "gt_pipeline.hpp"

namespace maskcount {

enum class Split { Train, Test };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct ManifestEntry {
  std::filesystem::path image;
  std::filesystem::path annotation;
  std::optional<std::filesystem::path> roi;
};

/// Paths are absolute in memory and stored relative to the manifest's directory on disk.
struct DatasetManifest {
  Split split = Split::Train;
  std::vector<ManifestEntry> entries;
};

/// Throws DataError if the file is malformed or a referenced file is missing.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Normalized dataset layout: `images/NAME.{png,jpg}`, `annotations/NAME.{json,csv}` and
/// optional `roi/NAME.{png,json}`. Entries are sorted by file name.
DatasetManifest manifest_from_layout(const std::filesystem::path& root, Split split);

/// One image with its full-resolution ground truth. With an ROI, the image,
/// density and mask are all masked and `truth` counts only heads inside it.
struct Sample {
  std::string id;
  Image image;
  PointAnnotation annotation;
  DensityMap density;
  ForegroundMask mask;
  std::optional<RoiMask> roi;
  double truth = 0.0;
};

Sample make_sample(std::string id, Image image, PointAnnotation annotation, const KernelConfig& kernel,
                   std::optional<RoiMask> roi = std::nullopt);

/// Loads entries in manifest order. Errors carry the offending path.
std::vector<Sample> load_dataset(const DatasetManifest& manifest, const KernelConfig& kernel);
Sample load_entry(const ManifestEntry& entry, const KernelConfig& kernel);

}  // namespace maskcount

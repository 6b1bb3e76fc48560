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

#include "gt_pipeline.hpp"

namespace maskcount {

/// JSON `{"width":W,"height":H,"points":[[x,y],...]}`, or a CSV of x,y rows whose
/// dimensions come from `paired_image` (required for CSV).
PointAnnotation read_annotation(const std::filesystem::path& path,
                                const std::optional<std::filesystem::path>& paired_image = std::nullopt);

void write_annotation_json(const std::filesystem::path& path, const PointAnnotation& ann);

/// PNG (nonzero = inside) or JSON `{"polygon":[[x,y],...]}`. Must have at least one inside pixel.
RoiMask read_roi(const std::filesystem::path& path, int height, int width);

}  // namespace maskcount

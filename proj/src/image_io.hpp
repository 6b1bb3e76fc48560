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

#include "grid.hpp"

namespace maskcount {

/// Reads PNG or JPEG (by extension), converting to grayscale in [0,1].
Image read_image(const std::filesystem::path& path);

/// Raw 8-bit grayscale read; used for ROI PNGs.
Grid<std::uint8_t> read_gray8(const std::filesystem::path& path);

void write_gray8_png(const std::filesystem::path& path, const Grid<std::uint8_t>& pixels);
/// Quantizes to 8 bits (round-to-nearest, clamped).
void write_image_png(const std::filesystem::path& path, const Image& image);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};
void write_rgb_png(const std::filesystem::path& path, const Grid<Rgb>& pixels);

}  // namespace maskcount

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
#include <string>
#include <vector>

#include "grid.hpp"

namespace maskcount {

enum class DType : std::uint8_t { Float32 = 1, Float64 = 2 };

/// In-memory form of one array record: shape plus row-major values.
struct ArrayRecord {
  DType dtype = DType::Float32;
  std::vector<std::uint64_t> shape;
  std::vector<double> values;  // widened from float32 when dtype is Float32
};

struct NamedArray {
  std::string name;
  ArrayRecord array;
};

// Single array file layout (little-endian):
//   "MCARRAY1" | u8 dtype | u8 ndim | u16 reserved | u64 dims[ndim] | payload
void write_array(const std::filesystem::path& path, const ArrayRecord& rec);
ArrayRecord read_array(const std::filesystem::path& path);

// Bundle layout: "MCBUNDL1" | u32 count | { u32 name_len | name | array record without magic }*
void write_bundle(const std::filesystem::path& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_bundle(const std::filesystem::path& path);

/// Density maps are persisted as float32.
void write_density(const std::filesystem::path& path, const Grid<double>& d);
DensityMap read_density(const std::filesystem::path& path);

}  // namespace maskcount

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

#include "array_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace maskcount {

static_assert(std::endian::native == std::endian::little, "array container assumes a little-endian host");

namespace {

constexpr char kArrayMagic[8] = {'M', 'C', 'A', 'R', 'R', 'A', 'Y', '1'};
constexpr char kBundleMagic[8] = {'M', 'C', 'B', 'U', 'N', 'D', 'L', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError(path, "truncated array file");
  return v;
}

std::uint64_t element_count(const std::vector<std::uint64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void write_record(std::ostream& os, const ArrayRecord& rec) {
  MC_CHECK(element_count(rec.shape) == rec.values.size(), InvariantError, "array shape does not match value count");
  MC_CHECK(rec.shape.size() < 256, UsageError, "too many dimensions");
  put(os, static_cast<std::uint8_t>(rec.dtype));
  put(os, static_cast<std::uint8_t>(rec.shape.size()));
  put(os, std::uint16_t{0});
  for (auto d : rec.shape) put(os, d);
  if (rec.dtype == DType::Float64) {
    os.write(reinterpret_cast<const char*>(rec.values.data()),
             static_cast<std::streamsize>(rec.values.size() * sizeof(double)));
  } else {
    std::vector<float> narrow(rec.values.begin(), rec.values.end());
    os.write(reinterpret_cast<const char*>(narrow.data()), static_cast<std::streamsize>(narrow.size() * sizeof(float)));
  }
}

ArrayRecord read_record(std::istream& is, const std::string& path) {
  ArrayRecord rec;
  const auto dtype = get<std::uint8_t>(is, path);
  if (dtype != 1 && dtype != 2) throw DataError(path, "unknown dtype code " + std::to_string(dtype));
  rec.dtype = static_cast<DType>(dtype);
  const auto ndim = get<std::uint8_t>(is, path);
  get<std::uint16_t>(is, path);
  for (int i = 0; i < ndim; ++i) rec.shape.push_back(get<std::uint64_t>(is, path));
  const auto n = element_count(rec.shape);
  if (n > (1ULL << 34)) throw DataError(path, "implausible array size");
  rec.values.resize(n);
  if (rec.dtype == DType::Float64) {
    is.read(reinterpret_cast<char*>(rec.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    std::vector<float> narrow(n);
    is.read(reinterpret_cast<char*>(narrow.data()), static_cast<std::streamsize>(n * sizeof(float)));
    std::copy(narrow.begin(), narrow.end(), rec.values.begin());
  }
  if (!is) throw DataError(path, "truncated array payload");
  return rec;
}

void check_magic(std::istream& is, const char (&magic)[8], const std::string& path) {
  char buf[8];
  is.read(buf, 8);
  if (!is || std::memcmp(buf, magic, 8) != 0) throw DataError(path, "bad magic; not a maskcount container");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError(path.string(), "cannot open for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError(path.string(), "cannot open for reading");
  return is;
}

}  // namespace

void write_array(const std::filesystem::path& path, const ArrayRecord& rec) {
  auto os = open_out(path);
  os.write(kArrayMagic, 8);
  write_record(os, rec);
  if (!os) throw DataError(path.string(), "write failed");
}

ArrayRecord read_array(const std::filesystem::path& path) {
  auto is = open_in(path);
  check_magic(is, kArrayMagic, path.string());
  return read_record(is, path.string());
}

void write_bundle(const std::filesystem::path& path, const std::vector<NamedArray>& arrays) {
  auto os = open_out(path);
  os.write(kBundleMagic, 8);
  put(os, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    put(os, static_cast<std::uint32_t>(a.name.size()));
    os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    write_record(os, a.array);
  }
  if (!os) throw DataError(path.string(), "write failed");
}

std::vector<NamedArray> read_bundle(const std::filesystem::path& path) {
  auto is = open_in(path);
  const std::string p = path.string();
  check_magic(is, kBundleMagic, p);
  const auto count = get<std::uint32_t>(is, p);
  std::vector<NamedArray> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(is, p);
    if (len > 4096) throw DataError(p, "implausible parameter name length");
    NamedArray a;
    a.name.resize(len);
    is.read(a.name.data(), len);
    a.array = read_record(is, p);
    out.push_back(std::move(a));
  }
  return out;
}

void write_density(const std::filesystem::path& path, const Grid<double>& d) {
  ArrayRecord rec;
  rec.dtype = DType::Float32;
  rec.shape = {static_cast<std::uint64_t>(d.height()), static_cast<std::uint64_t>(d.width())};
  rec.values.assign(d.values().begin(), d.values().end());
  write_array(path, rec);
}

DensityMap read_density(const std::filesystem::path& path) {
  auto rec = read_array(path);
  if (rec.shape.size() != 2) throw DataError(path.string(), "density map must be two-dimensional");
  DensityMap d(static_cast<int>(rec.shape[0]), static_cast<int>(rec.shape[1]));
  std::copy(rec.values.begin(), rec.values.end(), d.values().begin());
  return d;
}

}  // namespace maskcount

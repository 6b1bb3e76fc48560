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

#include "image_io.hpp"

#include <png.h>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

namespace maskcount {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw DataError(path.string(), std::string("cannot open file (") + mode + ")");
  return f;
}

std::string lower_ext(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

Grid<std::uint8_t> read_png_gray(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw DataError(path.string(), std::string("PNG read failed: ") + img.message);
  img.format = PNG_FORMAT_GRAY;
  Grid<std::uint8_t> out(static_cast<int>(img.height), static_cast<int>(img.width));
  if (!png_image_finish_read(&img, nullptr, out.values().data(), 0, nullptr)) {
    png_image_free(&img);
    throw DataError(path.string(), std::string("PNG decode failed: ") + img.message);
  }
  return out;
}

struct JpegErrorMgr {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Grid<std::uint8_t> read_jpeg_gray(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  jpeg_decompress_struct cinfo{};
  JpegErrorMgr err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  std::vector<std::uint8_t> buf;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DataError(path.string(), std::string("JPEG decode failed: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_GRAYSCALE;
  jpeg_start_decompress(&cinfo);
  buf.resize(static_cast<std::size_t>(cinfo.output_width) * cinfo.output_height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = buf.data() + static_cast<std::size_t>(cinfo.output_scanline) * cinfo.output_width;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  const int h = static_cast<int>(cinfo.output_height), w = static_cast<int>(cinfo.output_width);
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  Grid<std::uint8_t> out(h, w);
  std::copy(buf.begin(), buf.end(), out.values().begin());
  return out;
}

void write_png(const std::filesystem::path& path, int height, int width, png_uint_32 format, const void* data) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = format;
  if (!png_image_write_to_file(&img, path.c_str(), 0, data, 0, nullptr))
    throw DataError(path.string(), std::string("PNG write failed: ") + img.message);
}

}  // namespace

Grid<std::uint8_t> read_gray8(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError(path.string(), "file does not exist");
  const auto ext = lower_ext(path);
  if (ext == ".png") return read_png_gray(path);
  if (ext == ".jpg" || ext == ".jpeg") return read_jpeg_gray(path);
  throw DataError(path.string(), "unsupported image extension '" + ext + "' (expected .png/.jpg)");
}

Image read_image(const std::filesystem::path& path) {
  const auto raw = read_gray8(path);
  Image img(raw.height(), raw.width());
  auto src = raw.values();
  auto dst = img.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / 255.0;
  return img;
}

void write_gray8_png(const std::filesystem::path& path, const Grid<std::uint8_t>& pixels) {
  write_png(path, pixels.height(), pixels.width(), PNG_FORMAT_GRAY, pixels.values().data());
}

void write_image_png(const std::filesystem::path& path, const Image& image) {
  Grid<std::uint8_t> q(image.height(), image.width());
  auto src = image.values();
  auto dst = q.values();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = static_cast<std::uint8_t>(std::lround(std::clamp(src[i], 0.0, 1.0) * 255.0));
  write_gray8_png(path, q);
}

void write_rgb_png(const std::filesystem::path& path, const Grid<Rgb>& pixels) {
  static_assert(sizeof(Rgb) == 3);
  write_png(path, pixels.height(), pixels.width(), PNG_FORMAT_RGB, pixels.values().data());
}

}  // namespace maskcount

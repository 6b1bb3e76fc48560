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

#include "synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "annotation_io.hpp"
#include "image_io.hpp"

namespace maskcount {

namespace fs = std::filesystem;

std::string_view to_string(Background b) {
  switch (b) {
    case Background::Flat: return "flat";
    case Background::Gradient: return "gradient";
    case Background::Noise: return "noise";
  }
  return "?";
}

Background parse_background(std::string_view s) {
  for (auto b : {Background::Flat, Background::Gradient, Background::Noise})
    if (to_string(b) == s) return b;
  throw UsageError("background must be flat, gradient or noise; got '" + std::string(s) + "'");
}

void validate(const SceneSpec& spec) {
  MC_CHECK(spec.width > 0 && spec.height > 0, UsageError, "scene dimensions must be positive");
  MC_CHECK(spec.count_min >= 0 && spec.count_min <= spec.count_max, UsageError, "need 0 <= count_min <= count_max");
  MC_CHECK(spec.radius_min > 0.0 && spec.radius_min <= spec.radius_max, UsageError,
           "need 0 < radius_min <= radius_max");
}

Scene synth_scene(const SceneSpec& spec, std::size_t index) {
  validate(spec);
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Scene s;
  s.image = Image(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double v = 0.15;
      if (spec.background == Background::Gradient) v = 0.05 + 0.3 * x / spec.width;
      if (spec.background == Background::Noise) v = 0.15 + 0.16 * (unit(rng) - 0.5);
      s.image(y, x) = v;
    }
  }

  const int count = std::uniform_int_distribution<int>(spec.count_min, spec.count_max)(rng);
  s.annotation.width = spec.width;
  s.annotation.height = spec.height;
  for (int i = 0; i < count; ++i) {
    const Point p{unit(rng) * spec.width, unit(rng) * spec.height};
    const double radius = spec.radius_min + unit(rng) * (spec.radius_max - spec.radius_min);
    const double amplitude = 0.45 + 0.3 * unit(rng);
    const double sd = radius / 1.5;
    const int reach = static_cast<int>(std::ceil(3.0 * sd));
    const int cx = static_cast<int>(std::floor(p.x)), cy = static_cast<int>(std::floor(p.y));
    for (int y = std::max(0, cy - reach); y <= std::min(spec.height - 1, cy + reach); ++y) {
      for (int x = std::max(0, cx - reach); x <= std::min(spec.width - 1, cx + reach); ++x) {
        const double dx = x + 0.5 - p.x, dy = y + 0.5 - p.y;
        const double g = amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sd * sd));
        double& v = s.image(y, x);
        v += g * (1.0 - v);  // overlapping blobs saturate instead of exceeding 1
      }
    }
    s.annotation.points.push_back(p);
    ++s.blob_count;
  }

  for (auto& v : s.image.values()) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  return s;
}

std::vector<Scene> synth_scenes(const SceneSpec& spec, std::size_t n) {
  std::vector<Scene> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(synth_scene(spec, i));
  return out;
}

DatasetManifest synth_generate(const SceneSpec& spec, std::size_t n, const fs::path& out_dir, Split split) {
  validate(spec);
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "annotations");
  DatasetManifest m;
  m.split = split;
  for (std::size_t i = 0; i < n; ++i) {
    const Scene s = synth_scene(spec, i);
    char stem[32];
    std::snprintf(stem, sizeof stem, "scene_%05zu", i);
    const fs::path img = fs::absolute(out_dir / "images" / (std::string(stem) + ".png"));
    const fs::path ann = fs::absolute(out_dir / "annotations" / (std::string(stem) + ".json"));
    write_image_png(img, s.image);
    write_annotation_json(ann, s.annotation);
    m.entries.push_back({img, ann, std::nullopt});
  }
  write_manifest(out_dir / "manifest.json", m);
  return m;
}

}  // namespace maskcount

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

#include "dataset.hpp"

#include <algorithm>
#include <fstream>

#include "annotation_io.hpp"
#include "image_io.hpp"
#include "json.hpp"

namespace maskcount {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw UsageError("split must be 'train' or 'test', got '" + std::string(s) + "'");
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  std::error_code ec;
  auto rel = fs::relative(p, base, ec);
  return ec || rel.empty() ? p.string() : rel.generic_string();
}

std::optional<fs::path> find_with_ext(const fs::path& dir, const std::string& stem,
                                      std::initializer_list<const char*> exts) {
  for (const char* ext : exts) {
    auto p = dir / (stem + ext);
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

}  // namespace

DatasetManifest read_manifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError(path.string(), "cannot open manifest");
  const fs::path base = fs::absolute(path).parent_path();
  DatasetManifest m;
  try {
    const auto j = json::parse(is);
    m.split = parse_split(j.value("split", std::string("train")));
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry;
      entry.image = resolve(base, e.at("image").get<std::string>());
      entry.annotation = resolve(base, e.at("annotation").get<std::string>());
      if (e.contains("roi") && !e.at("roi").is_null()) entry.roi = resolve(base, e.at("roi").get<std::string>());
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw DataError(path.string(), std::string("malformed manifest: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(path.string(), e.what());
  }
  for (const auto& e : m.entries) {
    for (const auto* p : {&e.image, &e.annotation})
      if (!fs::exists(*p)) throw DataError(p->string(), "referenced by manifest but missing");
    if (e.roi && !fs::exists(*e.roi)) throw DataError(e.roi->string(), "referenced by manifest but missing");
  }
  return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  const fs::path base = fs::absolute(path).parent_path();
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    json j{{"image", relative_to(fs::absolute(e.image), base)},
           {"annotation", relative_to(fs::absolute(e.annotation), base)}};
    if (e.roi) j["roi"] = relative_to(fs::absolute(*e.roi), base);
    entries.push_back(std::move(j));
  }
  std::ofstream os(path);
  if (!os) throw DataError(path.string(), "cannot open for writing");
  os << json{{"split", std::string(to_string(manifest.split))}, {"entries", entries}}.dump(2) << '\n';
}

DatasetManifest manifest_from_layout(const fs::path& root, Split split) {
  const fs::path images = root / "images";
  if (!fs::is_directory(images)) throw DataError(images.string(), "layout has no images/ directory");
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(images)) {
    auto ext = f.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(f.path());
  }
  std::sort(files.begin(), files.end());
  DatasetManifest m;
  m.split = split;
  for (const auto& img : files) {
    const auto stem = img.stem().string();
    auto ann = find_with_ext(root / "annotations", stem, {".json", ".csv"});
    if (!ann) throw DataError(img.string(), "no annotations/" + stem + ".{json,csv}");
    m.entries.push_back({fs::absolute(img), fs::absolute(*ann), std::nullopt});
    if (auto roi = find_with_ext(root / "roi", stem, {".png", ".json"})) m.entries.back().roi = fs::absolute(*roi);
  }
  return m;
}

Sample make_sample(std::string id, Image image, PointAnnotation annotation, const KernelConfig& kernel,
                   std::optional<RoiMask> roi) {
  MC_CHECK(image.height() == annotation.height && image.width() == annotation.width, DataError,
           "image size does not match annotation dimensions");
  Sample s;
  s.id = std::move(id);
  s.density = generate_density_map(annotation, kernel);
  if (roi) {
    s.image = apply_roi(image, *roi);
    s.density = apply_roi(s.density, *roi);
    s.truth = static_cast<double>(count_points_in_roi(annotation, *roi));
  } else {
    s.image = std::move(image);
    s.truth = static_cast<double>(annotation.count());
  }
  s.mask = derive_mask(s.density);
  s.annotation = std::move(annotation);
  s.roi = std::move(roi);
  return s;
}

Sample load_entry(const ManifestEntry& entry, const KernelConfig& kernel) {
  Image image = read_image(entry.image);
  PointAnnotation ann = read_annotation(entry.annotation, entry.image);
  if (ann.width != image.width() || ann.height != image.height())
    throw DataError(entry.annotation.string(), "annotation dimensions do not match " + entry.image.string());
  std::optional<RoiMask> roi;
  if (entry.roi) roi = read_roi(*entry.roi, image.height(), image.width());
  return make_sample(entry.image.stem().string(), std::move(image), std::move(ann), kernel, std::move(roi));
}

std::vector<Sample> load_dataset(const DatasetManifest& manifest, const KernelConfig& kernel) {
  std::vector<Sample> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) out.push_back(load_entry(e, kernel));
  return out;
}

}  // namespace maskcount

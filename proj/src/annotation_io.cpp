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

#include "annotation_io.hpp"

#include <fstream>
#include <sstream>

#include "image_io.hpp"
#include "json.hpp"

namespace maskcount {

namespace {

using nlohmann::json;

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError(path.string(), "cannot open for reading");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw DataError(path.string(), std::string("invalid JSON: ") + e.what());
  }
}

Point parse_point(const json& j) {
  if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number())
    throw DataError("point must be an [x, y] pair of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

PointAnnotation read_csv(const std::filesystem::path& path, const std::filesystem::path& image) {
  const auto img = read_gray8(image);
  PointAnnotation ann;
  ann.width = img.width();
  ann.height = img.height();
  std::ifstream is(path);
  if (!is) throw DataError(path.string(), "cannot open for reading");
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Point p;
    if (!(ss >> p.x >> p.y)) {
      if (lineno == 1) continue;  // header row
      throw DataError(path.string(), "line " + std::to_string(lineno) + ": expected x,y");
    }
    ann.points.push_back(p);
  }
  return ann;
}

}  // namespace

PointAnnotation read_annotation(const std::filesystem::path& path,
                                const std::optional<std::filesystem::path>& paired_image) {
  PointAnnotation ann;
  if (path.extension() == ".csv") {
    if (!paired_image) throw DataError(path.string(), "CSV annotations need a paired image for dimensions");
    ann = read_csv(path, *paired_image);
  } else {
    const auto j = parse_json_file(path);
    try {
      ann.width = j.at("width").get<int>();
      ann.height = j.at("height").get<int>();
      for (const auto& p : j.at("points")) ann.points.push_back(parse_point(p));
    } catch (const json::exception& e) {
      throw DataError(path.string(), std::string("malformed annotation: ") + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string(), e.what());
    }
  }
  try {
    validate_annotation(ann);
  } catch (const DataError& e) {
    throw DataError(path.string(), e.what());
  }
  return ann;
}

void write_annotation_json(const std::filesystem::path& path, const PointAnnotation& ann) {
  json pts = json::array();
  for (const auto& p : ann.points) pts.push_back({p.x, p.y});
  json j{{"width", ann.width}, {"height", ann.height}, {"points", pts}};
  std::ofstream os(path);
  if (!os) throw DataError(path.string(), "cannot open for writing");
  os << j.dump() << '\n';
}

RoiMask read_roi(const std::filesystem::path& path, int height, int width) {
  RoiMask roi;
  if (path.extension() == ".json") {
    const auto j = parse_json_file(path);
    std::vector<Point> poly;
    try {
      for (const auto& p : j.at("polygon")) poly.push_back(parse_point(p));
    } catch (const json::exception& e) {
      throw DataError(path.string(), std::string("malformed ROI polygon: ") + e.what());
    }
    roi = rasterize_polygon(poly, height, width);
  } else {
    const auto px = read_gray8(path);
    if (px.height() != height || px.width() != width)
      throw DataError(path.string(), "ROI size does not match the image");
    roi = RoiMask(height, width);
    auto src = px.values();
    auto dst = roi.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] != 0 ? 1 : 0;
  }
  const auto v = roi.values();
  if (std::find(v.begin(), v.end(), std::uint8_t{1}) == v.end())
    throw DataError(path.string(), "ROI contains no inside pixel");
  return roi;
}

}  // namespace maskcount

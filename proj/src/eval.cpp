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

#include "eval.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "image_io.hpp"
#include "json.hpp"

namespace maskcount {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json stratum_json(const Stratum& s) {
  json j{{"label", s.label}, {"lo", s.lo}, {"n", s.n}};
  j["hi"] = s.hi < 0 ? json(nullptr) : json(s.hi);
  j["mae"] = std::isnan(s.mae) ? json(nullptr) : json(s.mae);
  return j;
}

Stratum stratum_from(const json& j) {
  Stratum s;
  s.label = j.at("label").get<std::string>();
  s.lo = j.at("lo").get<long>();
  s.hi = j.at("hi").is_null() ? -1 : j.at("hi").get<long>();
  s.mae = j.at("mae").is_null() ? kNaN : j.at("mae").get<double>();
  s.n = j.at("n").get<std::size_t>();
  return s;
}

json report_json(const EvalReport& r) {
  json strata = json::array();
  for (const auto& s : r.strata) strata.push_back(stratum_json(s));
  return json{{"mae", r.mae}, {"mse", r.mse}, {"n", r.n}, {"strata", strata}, {"empty", stratum_json(r.empty)}};
}

}  // namespace

double count_from_density(const Tensor& pred, bool clamp_negative) {
  double sum = 0.0;
  for (double v : pred.values()) {
    MC_CHECK(std::isfinite(v), InvariantError, "predicted density contains a non-finite value");
    sum += clamp_negative && v < 0.0 ? 0.0 : v;
  }
  return sum;
}

EvalReport evaluate(std::span<const CountPair> pairs) {
  MC_CHECK(!pairs.empty(), UsageError, "evaluate needs at least one (prediction, ground truth) pair");
  EvalReport r;
  r.strata = {{"low", 1, 300, 0.0, 0}, {"middle", 301, 700, 0.0, 0}, {"high", 701, -1, 0.0, 0}};
  r.empty = {"empty", 0, 0, 0.0, 0};
  double abs_sum = 0.0, sq_sum = 0.0;
  for (const auto& p : pairs) {
    const double err = p.predicted - p.truth;
    abs_sum += std::abs(err);
    sq_sum += err * err;
    const long gt = std::lround(p.truth);
    Stratum* bucket = &r.empty;
    for (auto& s : r.strata)
      if (gt >= s.lo && (s.hi < 0 || gt <= s.hi)) bucket = &s;
    bucket->mae += std::abs(err);
    ++bucket->n;
  }
  r.n = pairs.size();
  r.mae = abs_sum / static_cast<double>(r.n);
  r.mse = std::sqrt(sq_sum / static_cast<double>(r.n));
  auto finish = [](Stratum& s) { s.mae = s.n ? s.mae / static_cast<double>(s.n) : kNaN; };
  for (auto& s : r.strata) finish(s);
  finish(r.empty);
  return r;
}

void write_predictions_csv(const std::filesystem::path& path, std::span<const CountPair> pairs) {
  std::ofstream os(path);
  if (!os) throw DataError(path.string(), "cannot open for writing");
  os << "image_id,Pr,Gt\n";
  os.precision(17);
  for (const auto& p : pairs) os << p.id << ',' << p.predicted << ',' << p.truth << '\n';
}

std::vector<CountPair> read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError(path.string(), "cannot open for reading");
  std::vector<CountPair> out;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.rfind(',');
    if (a == std::string::npos || a == b) throw DataError(path.string(), "malformed row: " + line);
    CountPair p;
    p.id = line.substr(0, a);
    p.predicted = std::stod(line.substr(a + 1, b - a - 1));
    p.truth = std::stod(line.substr(b + 1));
    out.push_back(p);
  }
  return out;
}

void write_report_json(const std::filesystem::path& path, const EvalReport& raw, const EvalReport& clamped) {
  std::ofstream os(path);
  if (!os) throw DataError(path.string(), "cannot open for writing");
  os << json{{"raw", report_json(raw)}, {"clamped", report_json(clamped)}}.dump(2) << '\n';
}

EvalReport read_report_json(const std::filesystem::path& path, const std::string& which) {
  std::ifstream is(path);
  if (!is) throw DataError(path.string(), "cannot open for reading");
  try {
    const auto j = json::parse(is).at(which);
    EvalReport r;
    r.mae = j.at("mae").get<double>();
    r.mse = j.at("mse").get<double>();
    r.n = j.at("n").get<std::size_t>();
    for (const auto& s : j.at("strata")) r.strata.push_back(stratum_from(s));
    r.empty = stratum_from(j.at("empty"));
    return r;
  } catch (const json::exception& e) {
    throw DataError(path.string(), std::string("malformed report: ") + e.what());
  }
}

void render_strata_chart(const std::filesystem::path& path, const EvalReport& report) {
  constexpr int kW = 420, kH = 280, kMargin = 20, kBar = 70, kGap = 30;
  const Rgb background{255, 255, 255}, axis{40, 40, 40};
  const Rgb colors[] = {{76, 153, 0}, {255, 153, 51}, {204, 51, 51}, {128, 128, 128}};
  Grid<Rgb> img(kH, kW, background);

  std::vector<double> values;
  for (const auto& s : report.strata) values.push_back(std::isnan(s.mae) ? 0.0 : s.mae);
  values.push_back(std::isnan(report.empty.mae) ? 0.0 : report.empty.mae);
  double top = 0.0;
  for (double v : values) top = std::max(top, v);
  if (top <= 0.0) top = 1.0;

  const int base = kH - kMargin;
  for (int x = kMargin; x < kW - kMargin; ++x) img(base, x) = axis;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int h = static_cast<int>(std::lround(values[i] / top * (kH - 2 * kMargin - 10)));
    const int x0 = kMargin + kGap + static_cast<int>(i) * (kBar + kGap);
    for (int y = base - h; y < base; ++y)
      for (int x = x0; x < x0 + kBar && x < kW; ++x) img(y, x) = colors[i % 4];
  }
  write_rgb_png(path, img);
}

}  // namespace maskcount

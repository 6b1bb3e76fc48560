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

#include "checkpoint.hpp"

#include <fstream>

#include "array_io.hpp"
#include "json.hpp"

#ifndef MASKCOUNT_VERSION
#define MASKCOUNT_VERSION "unknown"
#endif

namespace maskcount {

namespace fs = std::filesystem;
using nlohmann::json;

const char* code_version() { return MASKCOUNT_VERSION; }

void save_checkpoint(const fs::path& dir, Model& model, const RunConfig& config, int epoch) {
  fs::create_directories(dir);
  std::vector<NamedArray> arrays;
  json plist = json::array();
  for (const auto& p : model.params()) {
    NamedArray a;
    a.name = p.name;
    a.array.dtype = DType::Float64;
    for (int d : p.param->shape) a.array.shape.push_back(static_cast<std::uint64_t>(d));
    a.array.values.assign(p.param->value.begin(), p.param->value.end());
    plist.push_back({{"name", p.name}, {"shape", p.param->shape}});
    arrays.push_back(std::move(a));
  }
  // Write the payload first so a manifest never points at a half-written file.
  write_bundle(dir / "params.bin", arrays);

  const auto& b = model.config();
  json manifest{{"format", "maskcount-checkpoint"},
                {"format_version", 1},
                {"code_version", code_version()},
                {"variant", std::string(to_string(model.variant()))},
                {"epoch", epoch},
                {"seed", config.schedule.seed},
                {"backbone", {{"init_std", b.init_std}, {"unit_count", b.unit_count}, {"width_divisor", b.width_divisor}}},
                {"config", to_key_values(config)},
                {"param_count", model.param_count()},
                {"mask_param_count", model.mask_param_count()},
                {"params", plist}};
  std::ofstream os(dir / "manifest.json");
  if (!os) throw DataError((dir / "manifest.json").string(), "cannot open for writing");
  os << manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const fs::path& dir, std::optional<FusionVariant> expected) {
  const fs::path mpath = dir / "manifest.json";
  std::ifstream is(mpath);
  if (!is) throw DataError(mpath.string(), "checkpoint manifest not found");
  json manifest;
  FusionVariant variant{};
  RunConfig config;
  int epoch = 0;
  try {
    manifest = json::parse(is);
    if (manifest.value("format", std::string()) != "maskcount-checkpoint")
      throw DataError(mpath.string(), "not a maskcount checkpoint");
    variant = parse_variant(manifest.at("variant").get<std::string>());
    std::string text;
    for (const auto& [k, v] : manifest.at("config").items()) text += k + " = " + v.get<std::string>() + "\n";
    config = parse_config(text);
    epoch = manifest.at("epoch").get<int>();
  } catch (const json::exception& e) {
    throw DataError(mpath.string(), std::string("malformed checkpoint manifest: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(mpath.string(), e.what());
  }
  if (expected && *expected != variant)
    throw DataError(mpath.string(), "checkpoint variant " + std::string(to_string(variant)) + " does not match " +
                                        std::string(to_string(*expected)));
  config.variant = variant;

  Model model(variant, config.backbone);
  auto arrays = read_bundle(dir / "params.bin");
  auto params = model.params();
  if (arrays.size() != params.size())
    throw DataError((dir / "params.bin").string(), "parameter count does not match variant " +
                                                       std::string(to_string(variant)));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& a = arrays[i];
    if (a.name != params[i].name || a.array.values.size() != params[i].param->size())
      throw DataError((dir / "params.bin").string(),
                      "parameter '" + a.name + "' does not match the " + std::string(to_string(variant)) + " layout");
    params[i].param->value.assign(a.array.values.begin(), a.array.values.end());
  }
  return Checkpoint{std::move(model), std::move(config), epoch};
}

}  // namespace maskcount

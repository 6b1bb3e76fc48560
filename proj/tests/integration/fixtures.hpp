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
#include <fstream>
#include <sstream>
#include <string>

#include "maskcount/maskcount.h"

namespace fixtures {

inline void synth(const std::filesystem::path& dir, std::size_t n, std::uint64_t seed, const char* split = "train",
                  int w = 32, int h = 32) {
  mc_synth_options o;
  mc_synth_defaults(&o);
  o.width = w;
  o.height = h;
  o.count_min = 1;
  o.count_max = 6;
  o.radius_min = 1.5;
  o.radius_max = 2.5;
  o.n = n;
  o.seed = seed;
  o.split = split;
  if (mc_synth(&o, dir.string().c_str()) != MC_OK) throw std::runtime_error(mc_last_error());
}

// Small, fast training config over `root`/train and `root`/test.
inline std::filesystem::path write_config(const std::filesystem::path& root, const std::string& extra = "") {
  const auto path = root / "run.toml";
  std::ofstream os(path);
  os << "train_manifest = \"train/manifest.json\"\n"
        "val_manifest = \"test/manifest.json\"\n"
        "test_manifest = \"test/manifest.json\"\n"
        "width_divisor = 16\n"
        "init_std = 0.1\n"
        "base_lr = 1e-3\n"
        "batch_size = 2\n"
        "total_epochs = 3\n"
        "adam_epochs = 2\n"
        "sigma = 2\n"
        "radius = 5\n"
     << extra;
  return path;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace fixtures

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

#include "config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace maskcount {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw UsageError("config key '" + key + "': cannot parse '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::logic_error&) {
    throw UsageError("config key '" + key + "': cannot parse '" + v + "' as a number");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw UsageError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quoted(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig c;
  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.empty() || p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"variant", [&](auto&, auto& v) { c.variant = parse_variant(v); }},
      {"seed", [&](auto& k, auto& v) { c.schedule.seed = parse_number<std::uint64_t>(k, v); }},
      {"train_manifest", [&](auto&, auto& v) { c.train_manifest = path_of(v); }},
      {"val_manifest", [&](auto&, auto& v) { c.val_manifest = path_of(v); }},
      {"test_manifest", [&](auto&, auto& v) { c.test_manifest = path_of(v); }},
      {"adam_epochs", [&](auto& k, auto& v) { c.schedule.adam_epochs = parse_number<int>(k, v); }},
      {"total_epochs", [&](auto& k, auto& v) { c.schedule.total_epochs = parse_number<int>(k, v); }},
      {"base_lr", [&](auto& k, auto& v) { c.schedule.base_lr = parse_double(k, v); }},
      {"decay_factor", [&](auto& k, auto& v) { c.schedule.decay_factor = parse_double(k, v); }},
      {"decay_every", [&](auto& k, auto& v) { c.schedule.decay_every = parse_number<int>(k, v); }},
      {"batch_size", [&](auto& k, auto& v) { c.schedule.batch_size = parse_number<int>(k, v); }},
      {"sgd_momentum", [&](auto& k, auto& v) { c.schedule.sgd_momentum = parse_double(k, v); }},
      {"workers", [&](auto& k, auto& v) { c.schedule.workers = parse_number<int>(k, v); }},
      {"alpha", [&](auto& k, auto& v) { c.loss.alpha = parse_double(k, v); }},
      {"gamma", [&](auto& k, auto& v) { c.loss.gamma = parse_double(k, v); }},
      {"init_std", [&](auto& k, auto& v) { c.backbone.init_std = parse_double(k, v); }},
      {"unit_count", [&](auto& k, auto& v) { c.backbone.unit_count = parse_number<int>(k, v); }},
      {"width_divisor", [&](auto& k, auto& v) { c.backbone.width_divisor = parse_number<int>(k, v); }},
      {"sigma", [&](auto& k, auto& v) { c.kernel.sigma = parse_double(k, v); }},
      {"radius", [&](auto& k, auto& v) { c.kernel.radius = parse_number<int>(k, v); }},
      {"patches_per_image", [&](auto& k, auto& v) { c.patches_per_image = parse_number<int>(k, v); }},
      {"patch_width", [&](auto& k, auto& v) { c.patch_width = parse_number<int>(k, v); }},
      {"patch_height", [&](auto& k, auto& v) { c.patch_height = parse_number<int>(k, v); }},
      {"clamp_counts", [&](auto& k, auto& v) { c.clamp_counts = parse_bool(k, v); }},
      {"eval_train", [&](auto& k, auto& v) { c.eval_train = parse_bool(k, v); }},
      {"stop_train_mae", [&](auto& k, auto& v) { c.stop_train_mae = parse_double(k, v); }},
  };

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty() || line.front() == '[') continue;  // section headers are ignored; keys are flat
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = unquote(trim(line.substr(eq + 1)));
    const auto it = setters.find(key);
    if (it == setters.end()) throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(key, value);
  }
  validate(c);
  return c;
}

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::filesystem::absolute(path).parent_path());
}

std::map<std::string, std::string> to_key_values(const RunConfig& c) {
  std::map<std::string, std::string> kv{
      {"variant", std::string(to_string(c.variant))},
      {"seed", std::to_string(c.schedule.seed)},
      {"adam_epochs", std::to_string(c.schedule.adam_epochs)},
      {"total_epochs", std::to_string(c.schedule.total_epochs)},
      {"base_lr", fmt_double(c.schedule.base_lr)},
      {"decay_factor", fmt_double(c.schedule.decay_factor)},
      {"decay_every", std::to_string(c.schedule.decay_every)},
      {"batch_size", std::to_string(c.schedule.batch_size)},
      {"sgd_momentum", fmt_double(c.schedule.sgd_momentum)},
      {"workers", std::to_string(c.schedule.workers)},
      {"alpha", fmt_double(c.loss.alpha)},
      {"gamma", fmt_double(c.loss.gamma)},
      {"init_std", fmt_double(c.backbone.init_std)},
      {"unit_count", std::to_string(c.backbone.unit_count)},
      {"width_divisor", std::to_string(c.backbone.width_divisor)},
      {"sigma", fmt_double(c.kernel.sigma)},
      {"radius", std::to_string(c.kernel.radius)},
      {"patches_per_image", std::to_string(c.patches_per_image)},
      {"patch_width", std::to_string(c.patch_width)},
      {"patch_height", std::to_string(c.patch_height)},
      {"clamp_counts", c.clamp_counts ? "true" : "false"},
      {"eval_train", c.eval_train ? "true" : "false"},
      {"stop_train_mae", fmt_double(c.stop_train_mae)},
  };
  if (!c.train_manifest.empty()) kv["train_manifest"] = quoted(c.train_manifest);
  if (!c.val_manifest.empty()) kv["val_manifest"] = quoted(c.val_manifest);
  if (!c.test_manifest.empty()) kv["test_manifest"] = quoted(c.test_manifest);
  return kv;
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : to_key_values(cfg)) out += k + " = " + v + "\n";
  return out;
}

void validate(const RunConfig& c) {
  validate(c.backbone);
  validate(c.loss);
  validate(c.schedule);
  MC_CHECK(c.kernel.sigma > 0.0 && c.kernel.radius >= 2.0 * c.kernel.sigma, UsageError,
           "kernel needs sigma > 0 and radius >= 2*sigma");
  MC_CHECK(c.patches_per_image >= 0, UsageError, "patches_per_image must be non-negative");
  MC_CHECK(c.patch_width >= 4 && c.patch_height >= 4, UsageError, "patches must be at least 4x4");
}

std::string stable_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace maskcount

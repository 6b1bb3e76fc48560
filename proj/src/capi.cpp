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

#include "maskcount/maskcount.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "checkpoint.hpp"
#include "experiments.hpp"
#include "trainer.hpp"

namespace {

thread_local std::string g_last_error;

template <typename F>
mc_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return MC_OK;
  } catch (const maskcount::UsageError& e) {
    g_last_error = e.what();
    return MC_ERR_USAGE;
  } catch (const maskcount::DataError& e) {
    g_last_error = e.what();
    return MC_ERR_DATA;
  } catch (const maskcount::NumericError& e) {
    g_last_error = e.what();
    return MC_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MC_ERR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw maskcount::UsageError(what);
}

maskcount::RunConfig load_config(const char* path, const char* overrides) {
  require(path != nullptr, "config path is required");
  std::filesystem::path p(path);
  std::ifstream is(p);
  if (!is) throw maskcount::DataError(p.string(), "cannot open config");
  std::stringstream ss;
  ss << is.rdbuf();
  std::string text = ss.str();
  // later assignments win, so overrides are appended
  if (overrides) text += std::string("\n") + overrides + "\n";
  return maskcount::parse_config(text, p.parent_path());
}

std::vector<std::string> split_list(const char* s) {
  std::vector<std::string> out;
  if (!s) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

struct mc_model {
  maskcount::Checkpoint ckpt;
  std::string variant;
};

extern "C" {

const char* mc_last_error(void) { return g_last_error.c_str(); }
const char* mc_version(void) { return maskcount::code_version(); }

void mc_synth_defaults(mc_synth_options* opts) {
  if (!opts) return;
  const maskcount::SceneSpec d;
  opts->width = d.width;
  opts->height = d.height;
  opts->count_min = d.count_min;
  opts->count_max = d.count_max;
  opts->radius_min = d.radius_min;
  opts->radius_max = d.radius_max;
  opts->background = "noise";
  opts->seed = d.seed;
  opts->n = 10;
  opts->split = "train";
}

mc_status mc_synth(const mc_synth_options* opts, const char* out_dir) {
  return guarded([&] {
    require(opts && out_dir, "synth needs options and an output directory");
    maskcount::SceneSpec spec;
    spec.width = opts->width;
    spec.height = opts->height;
    spec.count_min = opts->count_min;
    spec.count_max = opts->count_max;
    spec.radius_min = opts->radius_min;
    spec.radius_max = opts->radius_max;
    spec.background = maskcount::parse_background(opts->background ? opts->background : "noise");
    spec.seed = opts->seed;
    maskcount::run_synth(spec, opts->n, maskcount::parse_split(opts->split ? opts->split : "train"), out_dir);
  });
}

mc_status mc_gen_gt(const char* source, double sigma, int radius, const char* out_dir, size_t* entries_out) {
  return guarded([&] {
    require(source && out_dir, "gen-gt needs a source and an output directory");
    maskcount::KernelConfig k;
    k.sigma = sigma;
    k.radius = radius;
    const auto n = maskcount::run_gen_gt(source, k, out_dir);
    if (entries_out) *entries_out = n;
  });
}

mc_status mc_train(const char* config_path, const char* overrides, const char* out_dir, int verbose) {
  return guarded([&] {
    require(out_dir != nullptr, "train needs an output directory");
    const auto cfg = load_config(config_path, overrides);
    maskcount::run_train(cfg, out_dir, verbose ? &std::cout : nullptr);
  });
}

mc_status mc_model_load(const char* checkpoint_dir, mc_model** out) {
  return guarded([&] {
    require(checkpoint_dir && out, "model_load needs a checkpoint directory and an output handle");
    *out = nullptr;
    auto ckpt = maskcount::load_checkpoint(checkpoint_dir);
    std::string v(maskcount::to_string(ckpt.model.variant()));
    *out = new mc_model{std::move(ckpt), std::move(v)};
  });
}

void mc_model_free(mc_model* model) { delete model; }

const char* mc_model_variant(const mc_model* model) { return model ? model->variant.c_str() : ""; }

size_t mc_model_param_count(mc_model* model) { return model ? model->ckpt.model.param_count() : 0; }

size_t mc_model_mask_param_count(mc_model* model) { return model ? model->ckpt.model.mask_param_count() : 0; }

mc_status mc_model_predict(mc_model* model, const double* pixels, int height, int width, double* count_out) {
  return guarded([&] {
    require(model && pixels && count_out, "predict needs a model, pixels and an output");
    require(height > 0 && width > 0, "image dimensions must be positive");
    maskcount::Image img(height, width);
    std::memcpy(img.values().data(), pixels, sizeof(double) * img.size());
    *count_out = maskcount::predict_count(model->ckpt.model, img, model->ckpt.config.clamp_counts);
  });
}

mc_status mc_evaluate(const char* checkpoint_dir, const char* manifest, const char* out_dir,
                      mc_eval_summary* summary) {
  return guarded([&] {
    require(checkpoint_dir && manifest, "evaluate needs a checkpoint and a manifest");
    std::optional<std::filesystem::path> out;
    if (out_dir) out = out_dir;
    const auto r = maskcount::run_eval(checkpoint_dir, manifest, out);
    if (summary) *summary = {r.raw.mae, r.raw.mse, r.clamped.mae, r.clamped.mse, r.raw.n};
  });
}

mc_status mc_predict_file(const char* checkpoint_dir, const char* image_path, const char* dump_density,
                          const char* dump_mask, double* count_out, double* count_clamped_out) {
  return guarded([&] {
    require(checkpoint_dir && image_path, "predict needs a checkpoint and an image");
    std::optional<std::filesystem::path> dd, dm;
    if (dump_density) dd = dump_density;
    if (dump_mask) dm = dump_mask;
    const auto r = maskcount::run_predict(checkpoint_dir, image_path, dd, dm);
    if (count_out) *count_out = r.count;
    if (count_clamped_out) *count_clamped_out = r.count_clamped;
  });
}

mc_status mc_ablate(const char* config_path, const char* overrides, const char* variants, const char* seeds,
                    const char* out_dir, int verbose) {
  return guarded([&] {
    require(out_dir != nullptr, "ablate needs an output directory");
    const auto cfg = load_config(config_path, overrides);
    std::vector<maskcount::FusionVariant> vs;
    for (const auto& v : split_list(variants)) vs.push_back(maskcount::parse_variant(v));
    std::vector<std::uint64_t> ss;
    for (const auto& s : split_list(seeds)) {
      std::size_t used = 0;
      unsigned long long value = 0;
      try {
        value = std::stoull(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == s.size() && !s.empty() && s[0] != '-', ("invalid seed '" + s + "'").c_str());
      ss.push_back(value);
    }
    if (ss.empty()) ss.push_back(cfg.schedule.seed);
    maskcount::run_ablate(cfg, vs, ss, out_dir, verbose ? &std::cout : nullptr);
  });
}

mc_status mc_report(const char* report_json, const char* chart_png, char** text_out) {
  return guarded([&] {
    require(report_json && chart_png, "report needs a report file and a chart path");
    const std::string text = maskcount::run_report(report_json, chart_png);
    if (text_out) {
      *text_out = static_cast<char*>(std::malloc(text.size() + 1));
      if (!*text_out) throw std::bad_alloc();
      std::memcpy(*text_out, text.c_str(), text.size() + 1);
    }
  });
}

void mc_string_free(char* s) { std::free(s); }

}  // extern "C"

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

#ifndef MASKCOUNT_MASKCOUNT_H
#define MASKCOUNT_MASKCOUNT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MC_API __declspec(dllexport)
#else
#define MC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mc_status {
  MC_OK = 0,
  MC_ERR_INTERNAL = 1,
  MC_ERR_USAGE = 2,
  MC_ERR_DATA = 3,
  MC_ERR_NUMERIC = 4
} mc_status;

typedef struct mc_model mc_model;

/* Message of the last failed call on this thread; empty string if none. */
MC_API const char* mc_last_error(void);
MC_API const char* mc_version(void);

/* Synthetic dataset. background is "flat", "gradient" or "noise"; split "train" or "test". */
typedef struct mc_synth_options {
  int width;
  int height;
  int count_min;
  int count_max;
  double radius_min;
  double radius_max;
  const char* background;
  uint64_t seed;
  size_t n;
  const char* split;
} mc_synth_options;

MC_API void mc_synth_defaults(mc_synth_options* opts);
MC_API mc_status mc_synth(const mc_synth_options* opts, const char* out_dir);

/* source is a manifest file or a dataset layout directory; entries_out may be NULL. */
MC_API mc_status mc_gen_gt(const char* source, double sigma, int radius, const char* out_dir, size_t* entries_out);

/* overrides: newline separated "key = value" lines applied on top of the config file (may be NULL). */
MC_API mc_status mc_train(const char* config_path, const char* overrides, const char* out_dir, int verbose);

MC_API mc_status mc_model_load(const char* checkpoint_dir, mc_model** out);
MC_API void mc_model_free(mc_model* model);
MC_API const char* mc_model_variant(const mc_model* model);
MC_API size_t mc_model_param_count(mc_model* model);
MC_API size_t mc_model_mask_param_count(mc_model* model);

/* Grayscale image in [0,1], row-major height x width. */
MC_API mc_status mc_model_predict(mc_model* model, const double* pixels, int height, int width, double* count_out);

typedef struct mc_eval_summary {
  double mae;
  double mse;
  double mae_clamped;
  double mse_clamped;
  size_t n;
} mc_eval_summary;

/* out_dir may be NULL; summary may be NULL. */
MC_API mc_status mc_evaluate(const char* checkpoint_dir, const char* manifest, const char* out_dir,
                             mc_eval_summary* summary);

/* dump_density and dump_mask may be NULL. */
MC_API mc_status mc_predict_file(const char* checkpoint_dir, const char* image_path, const char* dump_density,
                                 const char* dump_mask, double* count_out, double* count_clamped_out);

/* variants: comma separated names; seeds: comma separated integers. */
MC_API mc_status mc_ablate(const char* config_path, const char* overrides, const char* variants, const char* seeds,
                           const char* out_dir, int verbose);

/* Writes the chart; text_out receives a malloc'd summary to release with mc_string_free (may be NULL). */
MC_API mc_status mc_report(const char* report_json, const char* chart_png, char** text_out);
MC_API void mc_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif

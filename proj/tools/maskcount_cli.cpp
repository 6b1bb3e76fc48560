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

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "maskcount/maskcount.h"

namespace {

int finish(mc_status s) {
  if (s != MC_OK) std::fprintf(stderr, "error: %s\n", mc_last_error());
  return s == MC_ERR_INTERNAL ? 1 : static_cast<int>(s);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

std::string join_overrides(const std::vector<std::string>& sets, const std::string& variant, const std::string& seed) {
  std::string text;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
    text += kv.substr(0, eq) + " = " + kv.substr(eq + 1) + "\n";
  }
  if (!variant.empty()) text += "variant = " + variant + "\n";
  if (!seed.empty()) text += "seed = " + seed + "\n";
  return text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maskcount: mask-aware density regression for crowd counting"};
  app.set_version_flag("--version", std::string(mc_version()));
  app.require_subcommand(1);

  mc_synth_options so;
  mc_synth_defaults(&so);
  std::string synth_bg = "noise", synth_split = "train", synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic annotated dataset");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--n", so.n, "Number of scenes")->capture_default_str();
  synth->add_option("--seed", so.seed, "Random seed")->capture_default_str();
  synth->add_option("--width", so.width)->capture_default_str();
  synth->add_option("--height", so.height)->capture_default_str();
  synth->add_option("--count-min", so.count_min)->capture_default_str();
  synth->add_option("--count-max", so.count_max)->capture_default_str();
  synth->add_option("--radius-min", so.radius_min)->capture_default_str();
  synth->add_option("--radius-max", so.radius_max)->capture_default_str();
  synth->add_option("--background", synth_bg, "flat, gradient or noise")->capture_default_str();
  synth->add_option("--split", synth_split, "train or test")->capture_default_str();

  std::string gt_manifest, gt_layout, gt_out;
  double gt_sigma = 4.0;
  int gt_radius = 15;
  auto* gengt = app.add_subcommand("gen-gt", "Write density and mask ground truth for a dataset");
  auto* gm = gengt->add_option("--manifest", gt_manifest, "Dataset manifest");
  auto* gl = gengt->add_option("--layout", gt_layout, "Dataset directory with images/ and annotations/");
  gm->excludes(gl);
  gengt->add_option("--sigma", gt_sigma, "Kernel standard deviation")->capture_default_str();
  gengt->add_option("--radius", gt_radius, "Kernel window radius")->capture_default_str();
  gengt->add_option("--out", gt_out, "Output directory")->required();

  std::string tr_config, tr_variant, tr_seed, tr_out;
  std::vector<std::string> tr_sets;
  bool tr_quiet = false;
  auto* train = app.add_subcommand("train", "Train one variant");
  train->add_option("config", tr_config, "Run config file")->required()->check(CLI::ExistingFile);
  train->add_option("--variant", tr_variant, "S1..S5 or B1..B3");
  train->add_option("--seed", tr_seed, "Random seed");
  train->add_option("--set", tr_sets, "Config override key=value (repeatable)");
  train->add_option("--out", tr_out, "Output directory")->required();
  train->add_flag("--quiet", tr_quiet, "No per-epoch progress");

  std::string ev_ckpt, ev_manifest, ev_out;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval->add_option("--checkpoint", ev_ckpt, "Checkpoint directory")->required();
  eval->add_option("--manifest", ev_manifest, "Dataset manifest")->required();
  eval->add_option("--out", ev_out, "Output directory")->required();

  std::string pr_ckpt, pr_image, pr_density, pr_mask, pr_out;
  auto* predict = app.add_subcommand("predict", "Count one image");
  predict->add_option("--checkpoint", pr_ckpt, "Checkpoint directory")->required();
  predict->add_option("--image", pr_image, "Image file")->required();
  predict->add_option("--dump-density", pr_density, "Write the density map (.mca)");
  predict->add_option("--dump-mask", pr_mask, "Write the mask (.png thresholded, otherwise posterior .mca)");
  predict->add_option("--out", pr_out, "Directory for relative dump paths");

  std::string ab_config, ab_variants, ab_seeds, ab_out;
  std::vector<std::string> ab_sets;
  bool ab_quiet = false;
  auto* ablate = app.add_subcommand("ablate", "Train and evaluate several variants over several seeds");
  ablate->add_option("config", ab_config, "Run config file")->required()->check(CLI::ExistingFile);
  ablate->add_option("--variants", ab_variants, "Comma separated variants")->required();
  ablate->add_option("--seeds", ab_seeds, "Comma separated seeds")->required();
  ablate->add_option("--set", ab_sets, "Config override key=value (repeatable)");
  ablate->add_option("--out", ab_out, "Output directory")->required();
  ablate->add_flag("--quiet", ab_quiet, "No progress output");

  std::string rp_report, rp_out;
  auto* report = app.add_subcommand("report", "Render an evaluation report");
  report->add_option("--report", rp_report, "report.json from eval")->required();
  report->add_option("--out", rp_out, "Output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return MC_ERR_USAGE;
  }

  try {
    if (*synth) {
      so.background = synth_bg.c_str();
      so.split = synth_split.c_str();
      const auto s = mc_synth(&so, synth_out.c_str());
      if (s == MC_OK) std::printf("wrote %zu scenes to %s\n", so.n, synth_out.c_str());
      return finish(s);
    }
    if (*gengt) {
      if (gt_manifest.empty() == gt_layout.empty()) {
        std::fprintf(stderr, "error: gen-gt needs exactly one of --manifest or --layout\n");
        return MC_ERR_USAGE;
      }
      std::size_t n = 0;
      const auto s = mc_gen_gt(gt_manifest.empty() ? gt_layout.c_str() : gt_manifest.c_str(), gt_sigma, gt_radius,
                               gt_out.c_str(), &n);
      if (s == MC_OK) std::printf("wrote ground truth for %zu images to %s\n", n, gt_out.c_str());
      return finish(s);
    }
    if (*train) {
      const std::string ov = join_overrides(tr_sets, tr_variant, tr_seed);
      return finish(mc_train(tr_config.c_str(), ov.c_str(), tr_out.c_str(), tr_quiet ? 0 : 1));
    }
    if (*eval) {
      mc_eval_summary sum{};
      const auto s = mc_evaluate(ev_ckpt.c_str(), ev_manifest.c_str(), ev_out.c_str(), &sum);
      if (s == MC_OK)
        std::printf("images %zu  MAE %.4f  MSE %.4f  (clamped MAE %.4f  MSE %.4f)\n", sum.n, sum.mae, sum.mse,
                    sum.mae_clamped, sum.mse_clamped);
      return finish(s);
    }
    if (*predict) {
      auto place = [&](const std::string& p) -> std::string {
        if (p.empty() || pr_out.empty() || std::filesystem::path(p).is_absolute()) return p;
        std::filesystem::create_directories(pr_out);
        return (std::filesystem::path(pr_out) / p).string();
      };
      const std::string dd = place(pr_density), dm = place(pr_mask);
      double count = 0, clamped = 0;
      const auto s = mc_predict_file(pr_ckpt.c_str(), pr_image.c_str(), opt(dd), opt(dm), &count, &clamped);
      if (s == MC_OK) std::printf("%.6f\n", count);
      return finish(s);
    }
    if (*ablate) {
      const std::string ov = join_overrides(ab_sets, "", "");
      const auto s =
          mc_ablate(ab_config.c_str(), ov.c_str(), ab_variants.c_str(), ab_seeds.c_str(), ab_out.c_str(), ab_quiet ? 0 : 1);
      if (s == MC_OK) {
        std::FILE* f = std::fopen((std::filesystem::path(ab_out) / "ablation.md").string().c_str(), "r");
        if (f) {
          char buf[512];
          while (std::fgets(buf, sizeof buf, f)) std::fputs(buf, stdout);
          std::fclose(f);
        }
      }
      return finish(s);
    }
    if (*report) {
      char* text = nullptr;
      const auto s = mc_report(rp_report.c_str(), rp_out.c_str(), &text);
      if (s == MC_OK) std::fputs(text, stdout);
      mc_string_free(text);
      return finish(s);
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return MC_ERR_USAGE;
  }
  return MC_ERR_USAGE;
}

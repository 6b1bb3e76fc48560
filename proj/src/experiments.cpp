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

#include "experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "array_io.hpp"
#include "checkpoint.hpp"
#include "fusion.hpp"
#include "image_io.hpp"
#include "json.hpp"

namespace maskcount {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string csv_number(double v) { return std::isnan(v) ? std::string() : fmt("%.10g", v); }

std::vector<Triple> load_triples(const fs::path& manifest, const KernelConfig& kernel) {
  std::vector<Triple> out;
  for (const auto& s : load_dataset(read_manifest(manifest), kernel)) out.push_back(triple_from_sample(s));
  return out;
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

void write_run_manifest(const fs::path& out_dir, const std::string& command, const std::string& config_text,
                        std::uint64_t seed, const std::map<std::string, std::string>& extra) {
  fs::create_directories(out_dir);
  json j{{"command", command},
         {"code_version", code_version()},
         {"config_hash", stable_hash(config_text)},
         {"seed", seed},
         {"config", config_text}};
  for (const auto& [k, v] : extra) j[k] = v;
  std::ofstream os(out_dir / "run_manifest.json");
  if (!os) throw DataError((out_dir / "run_manifest.json").string(), "cannot open for writing");
  os << j.dump(2) << '\n';
}

DatasetManifest run_synth(const SceneSpec& spec, std::size_t n, Split split, const fs::path& out_dir) {
  auto m = synth_generate(spec, n, out_dir, split);
  std::ostringstream cfg;
  cfg << "width = " << spec.width << "\nheight = " << spec.height << "\ncount_min = " << spec.count_min
      << "\ncount_max = " << spec.count_max << "\nradius_min = " << spec.radius_min
      << "\nradius_max = " << spec.radius_max << "\nbackground = " << to_string(spec.background) << "\nn = " << n
      << "\nsplit = " << to_string(split) << "\n";
  write_run_manifest(out_dir, "synth", cfg.str(), spec.seed);
  return m;
}

std::size_t run_gen_gt(const fs::path& source, const KernelConfig& kernel, const fs::path& out_dir) {
  fs::create_directories(out_dir / "density");
  fs::create_directories(out_dir / "mask");
  DatasetManifest manifest;
  if (fs::is_directory(source)) {
    manifest = manifest_from_layout(source, Split::Train);
    write_manifest(out_dir / "manifest.json", manifest);
  } else {
    manifest = read_manifest(source);
  }
  std::size_t n = 0;
  for (const auto& e : manifest.entries) {
    const Sample s = load_entry(e, kernel);
    write_density(out_dir / "density" / (s.id + ".mca"), s.density);
    Grid<std::uint8_t> px(s.mask.height(), s.mask.width());
    for (std::size_t i = 0; i < px.size(); ++i) px.values()[i] = s.mask.values()[i] ? 255 : 0;
    write_gray8_png(out_dir / "mask" / (s.id + ".png"), px);
    ++n;
  }
  std::ostringstream cfg;
  cfg << "source = " << source.string() << "\nsigma = " << kernel.sigma << "\nradius = " << kernel.radius << "\n";
  write_run_manifest(out_dir, "gen-gt", cfg.str(), 0, {{"entries", std::to_string(n)}});
  return n;
}

TrainRunSummary run_train(const RunConfig& cfg, const fs::path& out_dir, std::ostream* progress) {
  validate(cfg);
  MC_CHECK(!cfg.train_manifest.empty(), UsageError, "config has no train_manifest");
  const auto train_full = load_triples(cfg.train_manifest, cfg.kernel);
  MC_CHECK(!train_full.empty(), DataError, "training manifest has no entries");
  std::vector<Triple> val;
  if (!cfg.val_manifest.empty()) val = load_triples(cfg.val_manifest, cfg.kernel);

  std::unique_ptr<ExampleSource> source;
  if (cfg.patches_per_image > 0)
    source = std::make_unique<CropSource>(train_full, cfg.patches_per_image, cfg.patch_width, cfg.patch_height,
                                          cfg.schedule.seed);
  else
    source = std::make_unique<VectorSource>(train_full);

  Model model = assemble_model(cfg.variant, cfg.backbone, cfg.schedule.seed);
  const std::string cfg_text = to_config_text(cfg);
  fs::create_directories(out_dir);
  {
    std::ofstream os(out_dir / "config.toml");
    os << cfg_text;
  }
  write_run_manifest(out_dir, "train", cfg_text, cfg.schedule.seed,
                     {{"variant", std::string(to_string(cfg.variant))},
                      {"param_count", std::to_string(model.param_count())},
                      {"mask_param_count", std::to_string(model.mask_param_count())}});

  std::ofstream csv(out_dir / "epoch_log.csv");
  csv << "epoch,lr,optimizer,loss_mask,loss_density,loss_total,train_mae,val_mae,wall_seconds\n";
  std::ofstream log(out_dir / "train.log");
  log << "variant " << to_string(cfg.variant) << ", " << source->size() << " training examples, "
      << model.param_count() << " parameters\n";

  TrainRunSummary summary;
  summary.param_count = model.param_count();
  summary.mask_param_count = model.mask_param_count();
  summary.last_checkpoint = out_dir / "checkpoints" / "last";

  TrainHooks hooks;
  if (cfg.eval_train) hooks.train_eval = &train_full;
  if (!val.empty()) hooks.validation = &val;
  hooks.clamp_counts = cfg.clamp_counts;
  hooks.stop_below_train_mae = cfg.stop_train_mae;
  hooks.on_event = [&](std::string_view line) {
    log << line << '\n';
    log.flush();
    if (line.find("optimizer switch") != std::string_view::npos) {
      summary.switch_epoch = std::stoi(std::string(line.substr(6)));
    }
    if (progress) *progress << line << '\n';
  };
  hooks.on_epoch = [&](const EpochLog& r, Model& m, bool improved) {
    csv << r.epoch << ',' << fmt("%.10g", r.lr) << ',' << r.optimizer << ',' << csv_number(r.loss_mask) << ','
        << csv_number(r.loss_density) << ',' << csv_number(r.loss_total) << ',' << csv_number(r.train_mae) << ','
        << csv_number(r.val_mae) << ',' << fmt("%.3f", r.wall_seconds) << '\n';
    csv.flush();
    save_checkpoint(out_dir / "checkpoints" / "last", m, cfg, r.epoch);
    if (improved) save_checkpoint(out_dir / "checkpoints" / "best", m, cfg, r.epoch);
    if (progress)
      *progress << "epoch " << r.epoch << " " << r.optimizer << " lr=" << r.lr << " loss=" << r.loss_total
                << " train_mae=" << r.train_mae << " val_mae=" << r.val_mae << '\n';
  };

  const auto result = train(model, *source, cfg.schedule, cfg.loss, hooks);
  summary.epochs_run = static_cast<int>(result.log.size());
  summary.final_train_mae = result.log.back().train_mae;
  summary.final_val_mae = result.log.back().val_mae;
  summary.best_val_mae = result.best_val_mae;
  log << "finished after " << summary.epochs_run << " epochs\n";
  return summary;
}

EvalOutcome run_eval(const fs::path& checkpoint, const fs::path& manifest, const std::optional<fs::path>& out_dir) {
  auto ckpt = load_checkpoint(checkpoint);
  const auto samples = load_dataset(read_manifest(manifest), ckpt.config.kernel);
  MC_CHECK(!samples.empty(), DataError, "evaluation manifest has no entries");
  EvalOutcome out;
  std::vector<CountPair> clamped;
  for (const auto& s : samples) {
    const auto pred = ckpt.model.forward(image_tensor(s.image), Phase::Test);
    out.pairs.push_back({s.id, count_from_density(pred.density, false), s.truth});
    clamped.push_back({s.id, count_from_density(pred.density, true), s.truth});
  }
  out.raw = evaluate(out.pairs);
  out.clamped = evaluate(clamped);
  if (out_dir) {
    fs::create_directories(*out_dir);
    write_predictions_csv(*out_dir / "predictions.csv", out.pairs);
    write_report_json(*out_dir / "report.json", out.raw, out.clamped);
    render_strata_chart(*out_dir / "strata.png", out.raw);
    write_run_manifest(*out_dir, "eval", to_config_text(ckpt.config), ckpt.config.schedule.seed,
                       {{"checkpoint", fs::absolute(checkpoint).string()}, {"manifest", fs::absolute(manifest).string()}});
  }
  return out;
}

PredictOutcome run_predict(const fs::path& checkpoint, const fs::path& image, const std::optional<fs::path>& dump_density,
                           const std::optional<fs::path>& dump_mask) {
  auto ckpt = load_checkpoint(checkpoint);
  const Image img = read_image(image);
  const auto out = ckpt.model.forward(image_tensor(img), Phase::Test);
  PredictOutcome r{count_from_density(out.density, false), count_from_density(out.density, true)};
  if (dump_density) write_density(*dump_density, out.density.to_grid());
  if (dump_mask) {
    MC_CHECK(out.mask_logits.size() > 0, UsageError,
             "variant " + std::string(to_string(ckpt.model.variant())) + " has no mask branch to dump");
    const Tensor posterior = sigmoid(out.mask_logits);
    if (dump_mask->extension() == ".png") {
      Grid<std::uint8_t> px(posterior.height(), posterior.width());
      for (std::size_t i = 0; i < px.size(); ++i) px.values()[i] = posterior[i] > 0.5 ? 255 : 0;
      write_gray8_png(*dump_mask, px);
    } else {
      write_density(*dump_mask, posterior.to_grid());
    }
  }
  return r;
}

std::vector<AblationRow> run_ablate(const RunConfig& cfg, const std::vector<FusionVariant>& variants,
                                    const std::vector<std::uint64_t>& seeds, const fs::path& out_dir,
                                    std::ostream* progress) {
  MC_CHECK(!variants.empty(), UsageError, "ablate needs at least one variant");
  MC_CHECK(!seeds.empty(), UsageError, "ablate needs at least one seed");
  const fs::path test = !cfg.test_manifest.empty() ? cfg.test_manifest : cfg.val_manifest;
  MC_CHECK(!test.empty(), UsageError, "ablate needs test_manifest (or val_manifest) in the config");

  fs::create_directories(out_dir);
  std::ofstream runs(out_dir / "runs.csv");
  runs << "variant,seed,mae,mse\n";
  std::vector<AblationRow> rows;
  for (auto v : variants) {
    AblationRow row;
    row.variant = v;
    for (auto seed : seeds) {
      RunConfig c = cfg;
      c.variant = v;
      c.schedule.seed = seed;
      const fs::path run_dir = out_dir / std::string(to_string(v)) / ("seed_" + std::to_string(seed));
      if (progress) *progress << "== " << to_string(v) << " seed " << seed << '\n';
      const auto summary = run_train(c, run_dir, nullptr);
      const auto ev = run_eval(summary.last_checkpoint, test, run_dir / "eval");
      row.mae.push_back(ev.raw.mae);
      row.mse.push_back(ev.raw.mse);
      runs << to_string(v) << ',' << seed << ',' << fmt("%.10g", ev.raw.mae) << ',' << fmt("%.10g", ev.raw.mse) << '\n';
      if (progress) *progress << "   MAE " << ev.raw.mae << "  MSE " << ev.raw.mse << '\n';
    }
    mean_std(row.mae, row.mae_mean, row.mae_std);
    mean_std(row.mse, row.mse_mean, row.mse_std);
    rows.push_back(std::move(row));
  }

  std::ofstream csv(out_dir / "ablation.csv");
  csv << "variant,seeds,mae_mean,mae_std,mse_mean,mse_std\n";
  std::ofstream md(out_dir / "ablation.md");
  md << "| Method | MAE | MSE |\n|---|---|---|\n";
  for (const auto& r : rows) {
    csv << to_string(r.variant) << ',' << r.mae.size() << ',' << fmt("%.10g", r.mae_mean) << ','
        << fmt("%.10g", r.mae_std) << ',' << fmt("%.10g", r.mse_mean) << ',' << fmt("%.10g", r.mse_std) << '\n';
    md << "| " << to_string(r.variant) << " | " << fmt("%.2f", r.mae_mean) << " ± " << fmt("%.2f", r.mae_std) << " | "
       << fmt("%.2f", r.mse_mean) << " ± " << fmt("%.2f", r.mse_std) << " |\n";
  }
  std::string vlist, slist;
  for (auto v : variants) vlist += std::string(vlist.empty() ? "" : ",") + std::string(to_string(v));
  for (auto s : seeds) slist += (slist.empty() ? "" : ",") + std::to_string(s);
  write_run_manifest(out_dir, "ablate", to_config_text(cfg), cfg.schedule.seed,
                     {{"variants", vlist}, {"seeds", slist}});
  return rows;
}

std::string run_report(const fs::path& report_json, const fs::path& chart_png) {
  const EvalReport r = read_report_json(report_json, "raw");
  render_strata_chart(chart_png, r);
  std::ostringstream os;
  os << "images " << r.n << "  MAE " << fmt("%.4f", r.mae) << "  MSE " << fmt("%.4f", r.mse) << '\n';
  auto line = [&](const Stratum& s) {
    os << "  " << s.label << " (" << s.lo << "-" << (s.hi < 0 ? std::string() : std::to_string(s.hi)) << "): n=" << s.n
       << " MAE=" << (std::isnan(s.mae) ? std::string("n/a") : fmt("%.4f", s.mae)) << '\n';
  };
  for (const auto& s : r.strata) line(s);
  line(r.empty);
  return os.str();
}

}  // namespace maskcount

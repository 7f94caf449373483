// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line entry point. Machine-readable output goes to stdout,
// diagnostics to stderr. Exit codes: 0 ok, 1 validation or check failure,
// 2 usage error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "quadpool/quadpool.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace quadpool;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct ModelFlags {
  std::string arch = "patch";
  std::string pooling = "square";
  int size = 16;
  int smaller_edge = 1440;
  int levels = 4;

  void add_to(CLI::App* app) {
    app->add_option("--arch", arch, "patch or pyramid")->capture_default_str();
    app->add_option("--pooling", pooling, "square or quad")->capture_default_str();
    app->add_option("--size", size, "patch model pooling resolution")->capture_default_str();
    app->add_option("--smaller-edge", smaller_edge, "pyramid model input smaller edge")->capture_default_str();
    app->add_option("--levels", levels, "pyramid levels")->capture_default_str();
  }

  ModelConfig build() const {
    const PoolingMethod m = parse_pooling_method(pooling);
    if (parse_architecture(arch) == Architecture::patch) return PatchModelConfig{m, size};
    PyramidModelConfig cfg;
    cfg.pooling = m;
    cfg.smaller_edge = smaller_edge;
    cfg.levels = levels;
    cfg.level_cfg.level_max = std::min(cfg.level_cfg.level_max, levels - 1);
    return cfg;
  }
};

struct TrainFlags {
  int epochs1 = 50;
  int epochs2 = 50;
  double lr1 = 1e-4;
  double lr2 = 1e-5;
  double weight_decay = 0.01;
  bool no_augment = false;

  void add_to(CLI::App* app) {
    app->add_option("--epochs1", epochs1, "epochs at the first learning rate")->capture_default_str();
    app->add_option("--epochs2", epochs2, "epochs at the second learning rate")->capture_default_str();
    app->add_option("--lr1", lr1)->capture_default_str();
    app->add_option("--lr2", lr2)->capture_default_str();
    app->add_option("--weight-decay", weight_decay)->capture_default_str();
    app->add_flag("--no-augment", no_augment, "disable training augmentation");
  }

  TrainConfig build(std::uint64_t seed) const {
    TrainConfig tc;
    tc.epochs_phase1 = epochs1;
    tc.epochs_phase2 = epochs2;
    tc.lr_phase1 = lr1;
    tc.lr_phase2 = lr2;
    tc.weight_decay = weight_decay;
    tc.seed = seed;
    tc.augment = !no_augment;
    return tc;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

const SceneAnnotation& pick_scene(const std::vector<SceneAnnotation>& scenes, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= scenes.size())
    throw InvalidParameterError("scene index " + std::to_string(index) + " out of range (" +
                                std::to_string(scenes.size()) + " scenes)");
  return scenes[static_cast<std::size_t>(index)];
}

ModelParams load_params(const std::string& checkpoint, std::uint64_t seed) {
  if (checkpoint.empty()) return init_params(seed);
  return read_checkpoint(checkpoint).params;
}

// Outline in red (occupied) or green (free), one sample per half pixel.
void draw_outline(ImageBuffer& img, const Quadrilateral& q, bool occupied) {
  const Rgb color = occupied ? Rgb{1.0, 0.0, 0.0} : Rgb{0.0, 1.0, 0.0};
  const auto& v = q.vertices();
  for (int e = 0; e < 4; ++e) {
    const Point2 a = v[e], b = v[(e + 1) % 4];
    const int steps = 1 + static_cast<int>(2.0 * std::hypot(b.x - a.x, b.y - a.y));
    for (int k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) / steps;
      const int x = static_cast<int>(std::lround(a.x + t * (b.x - a.x)));
      const int y = static_cast<int>(std::lround(a.y + t * (b.y - a.y)));
      if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.set_pixel(x, y, color);
    }
  }
}

// --- subcommands -------------------------------------------------------------

int cmd_validate(const std::string& manifest) {
  std::vector<SceneAnnotation> scenes;
  try {
    scenes = load_dataset(manifest);
  } catch (const DatasetError& e) {
    std::cout << json{{"valid", false}, {"errors", {e.what()}}, {"violations", json::array()}}.dump(2) << '\n';
    return kExitFailure;
  }
  const SplitReport rep = validate_splits(scenes);
  json out = {{"valid", rep.lot_disjoint()}, {"num_scenes", scenes.size()}, {"errors", json::array()}};
  out["violations"] = rep.to_json();
  std::cout << out.dump(2) << '\n';
  return rep.lot_disjoint() ? kExitOk : kExitFailure;
}

int cmd_stats(const std::string& manifest) {
  std::cout << compute_stats(load_dataset(manifest)).to_json().dump(2) << '\n';
  return kExitOk;
}

struct SynthFlags {
  std::string out;
  int train_lots = 6, valid_lots = 2, test_lots = 2;
  int train_scenes = 10, eval_scenes = 5;
  double occupancy = 0.5, occlusion = 0.0, noise = 0.02, foreshortening = 0.6;
  std::uint64_t seed = 0;
};

int cmd_synth(const SynthFlags& f) {
  const SceneStyle style{f.occupancy, f.occlusion, f.noise, f.foreshortening};
  std::vector<LotSpec> specs;
  SplitAssignment assignment;
  auto add = [&](const std::string& prefix, int lots, int scenes, Split split, std::uint64_t salt) {
    auto s = make_lot_specs(prefix, lots, scenes, style, f.seed * 16 + salt);
    for (int l = 0; l < lots; ++l) assignment.emplace_back(prefix + std::to_string(l), split);
    specs.insert(specs.end(), s.begin(), s.end());
  };
  add("train", f.train_lots, f.train_scenes, Split::train, 1);
  add("valid", f.valid_lots, f.eval_scenes, Split::valid, 2);
  add("test", f.test_lots, f.eval_scenes, Split::test, 3);
  const GeneratedDataset ds = generate_dataset(specs, assignment, f.out);
  json out = ds.ledger_stats.to_json();
  out["manifest"] = ds.manifest_path.string();
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int cmd_pool(const std::string& manifest, int scene_index, const std::string& method, int size,
             const std::string& out_dir, int threads) {
  const auto scenes = load_dataset(manifest);
  const SceneAnnotation& scene = pick_scene(scenes, scene_index);
  const ImageBuffer img = read_ppm(scene.image_path);
  const PatchModelConfig cfg{parse_pooling_method(method), size};
  const auto patches = extract_patches(cfg, img, scene.quads(), {threads, nullptr});
  fs::create_directories(out_dir);
  json out = json::array();
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto& p = patches[i];
    const fs::path path = fs::path(out_dir) / ("patch_" + std::to_string(i) + ".ppm");
    write_ppm(path, ImageBuffer(p.size, p.size, p.data));
    out.push_back({{"space_index", i}, {"occupied", static_cast<bool>(scene.spaces[i].occupied)},
                   {"path", path.string()}});
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int cmd_augment_preview(const std::string& manifest, int scene_index, std::uint64_t seed, const std::string& out) {
  const auto scenes = load_dataset(manifest);
  const SceneAnnotation& scene = pick_scene(scenes, scene_index);
  const ImageBuffer img = read_ppm(scene.image_path);
  Rng rng = Rng::derive(seed, 0xa09);
  const AugmentParams params;
  const AugmentationSample sample = sample_augmentation(params, img.width(), img.height(), rng);
  const AugmentedScene aug = apply_augmentation(img, scene.spaces, sample, params.fill);
  ImageBuffer preview = aug.image;
  for (const auto& sp : aug.spaces) draw_outline(preview, sp.quad, sp.occupied);
  write_ppm(out, preview);
  json quads = json::array();
  for (const auto& sp : aug.spaces) {
    json v = json::array();
    for (const auto& p : sp.quad.vertices()) v.push_back({p.x, p.y});
    quads.push_back({{"quad", v}, {"occupied", static_cast<bool>(sp.occupied)}});
  }
  std::cout << json{{"image", out},
                    {"flipped", sample.flipped},
                    {"rotation_degrees", sample.rotation_degrees},
                    {"brightness", sample.photometric.brightness},
                    {"contrast", sample.photometric.contrast},
                    {"saturation", sample.photometric.saturation},
                    {"hue_degrees", sample.photometric.hue_degrees},
                    {"spaces", quads}}
                   .dump(2)
            << '\n';
  return kExitOk;
}

int cmd_train(const std::string& manifest, const ModelFlags& mf, const TrainFlags& tf, std::uint64_t seed,
              const std::string& out, const std::string& history, int threads) {
  const CachedDataset ds = cache_in_memory(load_dataset(manifest));
  const auto train_scenes = ds.split(Split::train);
  const auto valid_scenes = ds.split(Split::valid);
  const ModelConfig model = mf.build();
  const TrainResult r = train(model, train_scenes, valid_scenes, tf.build(seed), init_params(seed));
  write_checkpoint(out, r.params, &r.optim);
  if (!history.empty()) write_text(history, history_to_csv(r.history));
  json summary = {{"config", config_id(model)}, {"seed", seed}, {"checkpoint", out}, {"epochs", r.history.size()}};
  if (!r.history.empty()) summary["final_train_loss"] = r.history.back().train_loss;
  if (!valid_scenes.empty()) summary["valid_accuracy"] = evaluate_accuracy(model, r.params, valid_scenes, threads);
  std::cout << summary.dump(2) << '\n';
  return kExitOk;
}

struct SweepFlags {
  std::string archs = "pyramid,patch";
  std::string poolings = "square,quad";
  std::string sizes = "16";
  std::string edges = "256";
  std::string seeds = "1,2,3";
  std::string out;
};

int cmd_eval(const std::string& manifest, const ModelFlags& mf, const std::string& checkpoint, bool sweep,
             const SweepFlags& sf, const TrainFlags& tf, int threads) {
  const CachedDataset ds = cache_in_memory(load_dataset(manifest));
  if (!sweep) {
    const ModelConfig model = mf.build();
    if (checkpoint.empty()) throw InvalidParameterError("eval needs --checkpoint (or --sweep)");
    const ModelParams params = read_checkpoint(checkpoint).params;
    json out = {{"config", config_id(model)}};
    for (Split s : kAllSplits) {
      const auto scenes = ds.split(s);
      if (!scenes.empty()) out[std::string(to_string(s))] = evaluate_accuracy(model, params, scenes, threads);
    }
    std::cout << out.dump(2) << '\n';
    return kExitOk;
  }
  std::vector<SweepCell> grid;
  for (const auto& a : split_list(sf.archs)) {
    for (const auto& p : split_list(sf.poolings)) {
      const auto resolutions = parse_architecture(a) == Architecture::patch ? split_list(sf.sizes) : split_list(sf.edges);
      for (const auto& r : resolutions) {
        ModelFlags cell = mf;
        cell.arch = a;
        cell.pooling = p;
        cell.size = cell.smaller_edge = std::stoi(r);
        grid.push_back({cell.build(), tf.build(0)});
      }
    }
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_list(sf.seeds)) seeds.push_back(std::stoull(s));
  const SweepTable table =
      sweep_configs(ds.split(Split::train), ds.split(Split::valid), ds.split(Split::test), grid, seeds, threads);
  const std::string csv = table.to_csv();
  if (sf.out.empty())
    std::cout << csv;
  else
    write_text(sf.out, csv);
  if (table.best) {
    const auto& best = table.rows[*table.best];
    std::cerr << "selected " << best.config_id << ": valid " << format_mean_stderr(*best.valid) << ", test "
              << format_mean_stderr(*best.test) << '\n';
  }
  for (const auto& row : table.rows)
    if (row.error) std::cerr << "cell " << row.config_id << " failed: " << *row.error << '\n';
  return kExitOk;
}

int cmd_bench(const ModelFlags& mf, const std::string& counts_spec, const std::string& out,
              const std::string& manifest, int scene_index, const std::string& checkpoint, int reps, int warmup,
              bool check, int threads) {
  auto base = [&]() -> std::pair<ImageBuffer, std::vector<Quadrilateral>> {
    if (manifest.empty()) {
      LotSpec spec;
      spec.rows = 4;
      spec.spaces_per_row = 8;
      spec.seed = 1;
      GeneratedScene g = generate_scene(spec);
      return {std::move(g.image), g.annotation.quads()};
    }
    const auto scenes = load_dataset(manifest);
    const SceneAnnotation& scene = pick_scene(scenes, scene_index);
    return {read_ppm(scene.image_path), scene.quads()};
  };
  const auto [image, quads] = base();
  const ModelConfig model = mf.build();
  const ModelParams params = load_params(checkpoint, 1);
  const TimingCurve curve =
      benchmark_inference(model, params, image, quads, parse_count_range(counts_spec), {reps, warmup, threads});
  if (out.empty())
    std::cout << curve.to_csv();
  else
    write_text(out, curve.to_csv());

  json summary = {{"architecture", curve.architecture}, {"points", curve.points.size()}};
  bool ok = true;
  if (curve.points.size() >= 2) {
    const LinearFit fit = fit_line(curve);
    const double spread = relative_spread(curve);
    summary["slope"] = fit.slope;
    summary["intercept"] = fit.intercept;
    summary["r_squared"] = fit.r_squared;
    summary["relative_spread"] = spread;
    if (check) {
      if (architecture_of(model) == Architecture::patch) {
        summary["check"] = "r_squared >= 0.98";
        ok = fit.r_squared >= 0.98;
      } else {
        summary["check"] = "relative_spread <= 0.10";
        ok = spread <= 0.10;
      }
      summary["check_passed"] = ok;
    }
  }
  (out.empty() ? std::cerr : std::cout) << summary.dump(2) << '\n';
  return ok ? kExitOk : kExitFailure;
}

int cmd_predict(const std::string& image_path, const std::string& manifest, int scene_index, const ModelFlags& mf,
                const std::string& checkpoint, int threads) {
  const auto scenes = load_dataset(manifest);
  const SceneAnnotation& scene = pick_scene(scenes, scene_index);
  const ImageBuffer img = read_ppm(image_path.empty() ? scene.image_path : fs::path(image_path));
  const ModelParams params = read_checkpoint(checkpoint).params;
  std::cout << infer(mf.build(), params, img, scene.quads(), {threads, nullptr}).to_json().dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parking-space occupancy from quadrilateral annotations"};
  app.require_subcommand(1);
  int threads = default_thread_count();
  app.add_option("--threads", threads, "worker threads (default: QUADPOOL_THREADS or 1)");

  std::string manifest, out, checkpoint, history, image_path;
  int scene_index = 0;
  std::uint64_t seed = 0;
  ModelFlags mf;
  TrainFlags tf;

  auto* validate = app.add_subcommand("validate", "check a manifest for parse errors and split leakage");
  validate->add_option("--manifest", manifest)->required();

  auto* stats = app.add_subcommand("stats", "dataset statistics as JSON");
  stats->add_option("--manifest", manifest)->required();

  SynthFlags sf;
  auto* synth = app.add_subcommand("synth", "generate a lot-disjoint synthetic dataset");
  synth->add_option("--out", sf.out)->required();
  synth->add_option("--train-lots", sf.train_lots)->capture_default_str();
  synth->add_option("--valid-lots", sf.valid_lots)->capture_default_str();
  synth->add_option("--test-lots", sf.test_lots)->capture_default_str();
  synth->add_option("--train-scenes-per-lot", sf.train_scenes)->capture_default_str();
  synth->add_option("--eval-scenes-per-lot", sf.eval_scenes)->capture_default_str();
  synth->add_option("--occupancy", sf.occupancy)->capture_default_str();
  synth->add_option("--occlusion", sf.occlusion)->capture_default_str();
  synth->add_option("--noise", sf.noise)->capture_default_str();
  synth->add_option("--foreshortening", sf.foreshortening)->capture_default_str();
  synth->add_option("--seed", sf.seed)->capture_default_str();

  std::string method = "square";
  int size = 16;
  auto* pool_cmd = app.add_subcommand("pool", "dump pooled patches of one scene as PPM");
  pool_cmd->add_option("--manifest", manifest)->required();
  pool_cmd->add_option("--scene", scene_index)->capture_default_str();
  pool_cmd->add_option("--method", method, "quad or square")->capture_default_str();
  pool_cmd->add_option("--size", size)->capture_default_str();
  pool_cmd->add_option("--out", out)->required();

  auto* preview = app.add_subcommand("augment-preview", "write one augmented scene and its transformed quads");
  preview->add_option("--manifest", manifest)->required();
  preview->add_option("--scene", scene_index)->capture_default_str();
  preview->add_option("--seed", seed)->capture_default_str();
  preview->add_option("--out", out)->required();

  auto* train_cmd = app.add_subcommand("train", "train on the manifest's train split");
  train_cmd->add_option("--manifest", manifest)->required();
  mf.add_to(train_cmd);
  tf.add_to(train_cmd);
  train_cmd->add_option("--seed", seed)->capture_default_str();
  train_cmd->add_option("--out", out, "checkpoint path")->required();
  train_cmd->add_option("--history", history, "per-epoch CSV path");

  bool sweep = false;
  SweepFlags sw;
  auto* eval_cmd = app.add_subcommand("eval", "accuracy per split, or a configuration sweep");
  eval_cmd->add_option("--manifest", manifest)->required();
  mf.add_to(eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint);
  eval_cmd->add_flag("--sweep", sweep, "train and evaluate a configuration grid");
  tf.add_to(eval_cmd);
  eval_cmd->add_option("--archs", sw.archs)->capture_default_str();
  eval_cmd->add_option("--poolings", sw.poolings)->capture_default_str();
  eval_cmd->add_option("--sizes", sw.sizes, "patch model resolutions")->capture_default_str();
  eval_cmd->add_option("--edges", sw.edges, "pyramid model smaller edges")->capture_default_str();
  eval_cmd->add_option("--seeds", sw.seeds)->capture_default_str();
  eval_cmd->add_option("--out", sw.out, "CSV path (default stdout)");

  std::string counts = "10:100:10";
  int reps = 5, warmup = 2;
  bool check = false;
  auto* bench = app.add_subcommand("bench", "inference time against number of spaces");
  mf.add_to(bench);
  bench->add_option("--counts", counts, "start:stop:step or a comma list")->capture_default_str();
  bench->add_option("--out", out, "CSV path (default stdout)");
  bench->add_option("--manifest", manifest, "base scene (default: a synthetic lot)");
  bench->add_option("--scene", scene_index)->capture_default_str();
  bench->add_option("--checkpoint", checkpoint, "weights (default: seeded init)");
  bench->add_option("--repetitions", reps)->capture_default_str();
  bench->add_option("--warmup", warmup)->capture_default_str();
  bench->add_flag("--check", check, "exit 1 unless the timing shape holds");

  auto* predict = app.add_subcommand("predict", "occupancy scores for one image");
  predict->add_option("--manifest", manifest)->required();
  predict->add_option("--scene", scene_index)->capture_default_str();
  predict->add_option("--image", image_path, "image to score (default: the scene's own)");
  predict->add_option("--checkpoint", checkpoint)->required();
  mf.add_to(predict);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (threads < 1) throw InvalidParameterError("--threads must be >= 1");
    if (*validate) return cmd_validate(manifest);
    if (*stats) return cmd_stats(manifest);
    if (*synth) return cmd_synth(sf);
    if (*pool_cmd) return cmd_pool(manifest, scene_index, method, size, out, threads);
    if (*preview) return cmd_augment_preview(manifest, scene_index, seed, out);
    if (*train_cmd) return cmd_train(manifest, mf, tf, seed, out, history, threads);
    if (*eval_cmd) return cmd_eval(manifest, mf, checkpoint, sweep, sw, tf, threads);
    if (*bench) return cmd_bench(mf, counts, out, manifest, scene_index, checkpoint, reps, warmup, check, threads);
    if (*predict) return cmd_predict(image_path, manifest, scene_index, mf, checkpoint, threads);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

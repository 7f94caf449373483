// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "quadpool/augment.hpp"
#include "quadpool/classifier.hpp"
#include "quadpool/dataset.hpp"
#include "quadpool/error.hpp"
#include "quadpool/pipeline.hpp"
#include "quadpool/rng.hpp"

namespace quadpool {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> valid_accuracy;
};

struct TrainResult {
  ModelParams params;
  OptimState optim;
  std::vector<EpochRecord> history;
};

/// Parameters drawn from the seeded initializer.
inline ModelParams init_params(std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 0x1a17);
  return ModelParams::random_init(rng);
}

/// Fraction of spaces whose predicted label matches the annotation, pooled
/// over all scenes.
inline double evaluate_accuracy(const ModelConfig& cfg, const ModelParams& params,
                                std::span<const CachedScene> scenes, int threads = 1) {
  std::size_t correct = 0, total = 0;
  for (const auto& s : scenes) {
    const auto pred = infer(cfg, params, s.image, s.annotation.quads(), {threads, nullptr});
    for (std::size_t i = 0; i < s.annotation.spaces.size(); ++i) {
      correct += pred.labels[i] == s.annotation.spaces[i].occupied ? 1 : 0;
      ++total;
    }
  }
  if (total == 0) throw InvalidParameterError("no spaces to evaluate");
  return static_cast<double>(correct) / static_cast<double>(total);
}

/// Mini-batch = one scene: each epoch visits the training scenes in a seeded
/// shuffled order, augments the scene, pools every space, and takes one
/// AdamW step on the mean per-space loss. Phase 1 runs at lr_phase1, phase 2
/// at lr_phase2. Output depends only on (scenes, configs, init, seed).
inline TrainResult train(const ModelConfig& model, std::span<const CachedScene> train_scenes,
                         std::span<const CachedScene> valid_scenes, const TrainConfig& cfg, ModelParams init) {
  cfg.validate();
  std::visit([](const auto& c) { c.validate(); }, model);
  if (train_scenes.empty()) throw InvalidParameterError("training split is empty");
  if (!init.has_canonical_shapes()) throw InvalidParameterError("initial parameters have wrong shapes");

  TrainResult result{std::move(init), OptimState{}, {}};
  std::vector<std::size_t> order(train_scenes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng order_rng = Rng::derive(cfg.seed, 0x5eed);

  const int total_epochs = cfg.epochs_phase1 + cfg.epochs_phase2;
  for (int epoch = 0; epoch < total_epochs; ++epoch) {
    const double lr = epoch < cfg.epochs_phase1 ? cfg.lr_phase1 : cfg.lr_phase2;
    order_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t step = 0; step < order.size(); ++step) {
      const CachedScene& scene = train_scenes[order[step]];
      Rng aug_rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(epoch) + 1, order[step]);
      const AugmentedScene aug = cfg.augment ? augment_scene(scene.image, scene.annotation.spaces,
                                                             cfg.augment_params, aug_rng)
                                             : AugmentedScene{scene.image, scene.annotation.spaces};
      std::vector<Quadrilateral> quads;
      quads.reserve(aug.spaces.size());
      for (const auto& sp : aug.spaces) quads.push_back(sp.quad);
      const auto patches = extract_patches(model, aug.image, quads);

      ModelParams grads = ModelParams::zeros();
      double scene_loss = 0.0;
      const double weight = 1.0 / static_cast<double>(patches.size());
      for (std::size_t i = 0; i < patches.size(); ++i)
        scene_loss += accumulate_loss_and_grad(result.params, patches[i], aug.spaces[i].occupied, weight, grads);
      epoch_loss += scene_loss * weight;
      adamw_step(result.params, grads, result.optim, lr, cfg);
    }
    EpochRecord rec{epoch + 1, lr, epoch_loss / static_cast<double>(order.size()), std::nullopt};
    if (!valid_scenes.empty()) rec.valid_accuracy = evaluate_accuracy(model, result.params, valid_scenes);
    result.history.push_back(rec);
  }
  return result;
}

inline std::string history_to_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,lr,train_loss,valid_accuracy\n";
  for (const auto& r : history) {
    os << r.epoch << ',' << r.lr << ',' << r.train_loss << ',';
    if (r.valid_accuracy) os << *r.valid_accuracy;
    os << '\n';
  }
  return os.str();
}

}  // namespace quadpool

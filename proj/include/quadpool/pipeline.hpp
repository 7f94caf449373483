// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scene-level models. Both take the full image plus the annotated space
// quads (which play the role of region proposals) and return one occupancy
// score per space:
//
//  * patch model: pool an S x S patch per space from the full-resolution
//    image and classify each patch independently;
//  * pyramid model: resize the image by its smaller edge, build a 2x image
//    pyramid, pool 7 x 7 per space from the level picked by the area
//    heuristic, and classify.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "quadpool/classifier.hpp"
#include "quadpool/error.hpp"
#include "quadpool/geometry.hpp"
#include "quadpool/image.hpp"
#include "quadpool/parallel.hpp"
#include "quadpool/pooling.hpp"

namespace quadpool {

enum class Architecture { patch, pyramid };

inline std::string_view to_string(Architecture a) { return a == Architecture::patch ? "patch" : "pyramid"; }

inline Architecture parse_architecture(std::string_view s) {
  if (s == "patch" || s == "rcnn") return Architecture::patch;
  if (s == "pyramid" || s == "fpn") return Architecture::pyramid;
  throw InvalidParameterError("unknown architecture '" + std::string(s) + "'");
}

struct PatchModelConfig {
  PoolingMethod pooling = PoolingMethod::square;
  int resolution = 128;

  void validate() const {
    if (resolution < kMinPatchSize)
      throw InvalidParameterError("patch resolution must be >= " + std::to_string(kMinPatchSize));
  }
};

struct PyramidModelConfig {
  static constexpr int kHeadPoolSize = kPyramidPoolSize;

  PoolingMethod pooling = PoolingMethod::square;
  int smaller_edge = 1440;
  int levels = 4;
  LevelAssignConfig level_cfg{};

  void validate() const {
    if (smaller_edge < 1) throw InvalidParameterError("smaller_edge must be positive");
    if (levels < 1) throw InvalidParameterError("pyramid needs at least one level");
    level_cfg.validate();
    if (level_cfg.level_max >= levels)
      throw InvalidParameterError("level_max " + std::to_string(level_cfg.level_max) + " exceeds pyramid depth " +
                                  std::to_string(levels));
  }
};

using ModelConfig = std::variant<PatchModelConfig, PyramidModelConfig>;

inline Architecture architecture_of(const ModelConfig& cfg) {
  return std::holds_alternative<PatchModelConfig>(cfg) ? Architecture::patch : Architecture::pyramid;
}

inline PoolingMethod pooling_of(const ModelConfig& cfg) {
  return std::visit([](const auto& c) { return c.pooling; }, cfg);
}

/// Pooling resolution for the patch model, input smaller edge for the
/// pyramid model.
inline int resolution_of(const ModelConfig& cfg) {
  if (const auto* p = std::get_if<PatchModelConfig>(&cfg)) return p->resolution;
  return std::get<PyramidModelConfig>(cfg).smaller_edge;
}

/// e.g. "patch/square/128" or "pyramid/quadrilateral/800".
inline std::string config_id(const ModelConfig& cfg) {
  return std::string(to_string(architecture_of(cfg))) + "/" + std::string(to_string(pooling_of(cfg))) + "/" +
         std::to_string(resolution_of(cfg));
}

/// Per-space record of where a pyramid-model patch came from.
struct InferenceTrace {
  int input_width = 0;
  int input_height = 0;
  std::vector<int> levels;
};

struct ExtractOptions {
  int threads = 1;
  InferenceTrace* trace = nullptr;
};

namespace detail {

inline std::vector<PooledPatch> pool_each(std::size_t n, int threads,
                                          const std::function<PooledPatch(std::size_t)>& pool_one) {
  std::vector<PooledPatch> patches(n);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      patches[i] = pool_one(i);
    } catch (const DegenerateGeometryError& e) {
      throw DegenerateGeometryError("space " + std::to_string(i) + ": " + e.what());
    }
  });
  return patches;
}

}  // namespace detail

inline std::vector<PooledPatch> extract_patches(const PatchModelConfig& cfg, const ImageBuffer& img,
                                                const std::vector<Quadrilateral>& quads,
                                                const ExtractOptions& opts = {}) {
  cfg.validate();
  return detail::pool_each(quads.size(), opts.threads,
                           [&](std::size_t i) { return pool(img, quads[i], cfg.pooling, cfg.resolution); });
}

inline std::vector<PooledPatch> extract_patches(const PyramidModelConfig& cfg, const ImageBuffer& img,
                                                const std::vector<Quadrilateral>& quads,
                                                const ExtractOptions& opts = {}) {
  cfg.validate();
  if (quads.empty()) return {};
  const ImageBuffer input = resize_smaller_edge(img, cfg.smaller_edge);
  const double sx = static_cast<double>(input.width()) / img.width();
  const double sy = static_cast<double>(input.height()) / img.height();
  const ImagePyramid pyr = build_pyramid(input, cfg.levels);
  std::vector<int> levels(quads.size(), 0);
  auto patches = detail::pool_each(quads.size(), opts.threads, [&](std::size_t i) {
    auto r = pool_from_pyramid_traced(pyr, rescale_between_rasters(quads[i], sx, sy), cfg.pooling, cfg.level_cfg);
    levels[i] = r.level;
    return std::move(r.patch);
  });
  if (opts.trace) *opts.trace = {input.width(), input.height(), std::move(levels)};
  return patches;
}

inline std::vector<PooledPatch> extract_patches(const ModelConfig& cfg, const ImageBuffer& img,
                                                const std::vector<Quadrilateral>& quads,
                                                const ExtractOptions& opts = {}) {
  return std::visit([&](const auto& c) { return extract_patches(c, img, quads, opts); }, cfg);
}

struct OccupancyPrediction {
  std::vector<double> scores;
  std::vector<bool> labels;

  std::size_t size() const { return scores.size(); }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < scores.size(); ++i)
      arr.push_back({{"space_index", i}, {"score", scores[i]}, {"label", static_cast<bool>(labels[i])}});
    return arr;
  }
};

inline constexpr double kDecisionThreshold = 0.5;

/// Ties at the threshold count as occupied.
inline std::vector<bool> predict_labels(const std::vector<double>& scores) {
  std::vector<bool> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s >= kDecisionThreshold);
  return out;
}

inline std::vector<bool> predict_labels(const OccupancyPrediction& pred) { return predict_labels(pred.scores); }

inline OccupancyPrediction classify_patches(const ModelParams& params, const std::vector<PooledPatch>& patches,
                                            int threads = 1) {
  OccupancyPrediction pred;
  pred.scores.resize(patches.size());
  parallel_for(patches.size(), threads, [&](std::size_t i) { pred.scores[i] = sigmoid(forward(params, patches[i])); });
  pred.labels = predict_labels(pred.scores);
  return pred;
}

inline OccupancyPrediction infer(const ModelConfig& cfg, const ModelParams& params, const ImageBuffer& img,
                                 const std::vector<Quadrilateral>& quads, const ExtractOptions& opts = {}) {
  return classify_patches(params, extract_patches(cfg, img, quads, opts), opts.threads);
}

inline OccupancyPrediction infer_patch_model(const PatchModelConfig& cfg, const ModelParams& params,
                                             const ImageBuffer& img, const std::vector<Quadrilateral>& quads,
                                             const ExtractOptions& opts = {}) {
  return infer(ModelConfig{cfg}, params, img, quads, opts);
}

inline OccupancyPrediction infer_pyramid_model(const PyramidModelConfig& cfg, const ModelParams& params,
                                               const ImageBuffer& img, const std::vector<Quadrilateral>& quads,
                                               const ExtractOptions& opts = {}) {
  return infer(ModelConfig{cfg}, params, img, quads, opts);
}

}  // namespace quadpool

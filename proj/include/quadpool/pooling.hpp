// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quadpool/error.hpp"
#include "quadpool/geometry.hpp"
#include "quadpool/image.hpp"

namespace quadpool {

/// S x S x 3 patch, row-major with interleaved channels.
struct PooledPatch {
  int size = 0;
  std::vector<double> data;

  PooledPatch() = default;
  explicit PooledPatch(int s) : size(s), data(static_cast<std::size_t>(s) * s * 3, 0.0) {}

  double at(int row, int col, int c) const { return data[(static_cast<std::size_t>(row) * size + col) * 3 + c]; }
  double& at(int row, int col, int c) { return data[(static_cast<std::size_t>(row) * size + col) * 3 + c]; }

  friend bool operator==(const PooledPatch&, const PooledPatch&) = default;
};

enum class PoolingMethod { quadrilateral, square };

inline std::string_view to_string(PoolingMethod m) {
  return m == PoolingMethod::quadrilateral ? "quadrilateral" : "square";
}

inline PoolingMethod parse_pooling_method(std::string_view s) {
  if (s == "quadrilateral" || s == "quad") return PoolingMethod::quadrilateral;
  if (s == "square") return PoolingMethod::square;
  throw InvalidParameterError("unknown pooling method '" + std::string(s) + "'");
}

/// Constants of the area-based pyramid level heuristic
/// k = clamp(floor(k0 + log2(sqrt(area) / canonical_size)), level_min, level_max).
///
/// Level indices refer to our image pyramid (level 0 = input resolution).
/// The defaults place the canonical 224 px region at level 2, which is the
/// FPN convention (k0 = 4 over P2..P5) shifted so P2 becomes level 0.
struct LevelAssignConfig {
  int k0 = 2;
  double canonical_size = 224.0;
  int level_min = 0;
  int level_max = 3;

  void validate() const {
    if (!(level_min <= k0 && k0 <= level_max)) throw InvalidParameterError("level config needs min <= k0 <= max");
    if (!(canonical_size > 0.0)) throw InvalidParameterError("canonical size must be positive");
  }
};

/// Pools the quad interior onto an S x S grid: cell (i, j) is the bilinear
/// sample at H((j + 0.5) / S, (i + 0.5) / S), H the unit-square homography.
inline PooledPatch pool_quadrilateral(const ImageBuffer& img, const Quadrilateral& quad, int size) {
  if (size < 1) throw InvalidParameterError("pooling size must be >= 1");
  // Evaluate H on the cell-center grid directly: with H' = H * diag(1/S, 1/S, 1)
  // an S x S pixel-aligned rectangle maps cell centers onto exact integers.
  const double inv = 1.0 / size;
  const Homography3x3 grid = homography_from_unit_square(quad).scale_domain(inv, inv);
  PooledPatch patch(size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const Rgb v = bilinear_sample(img, grid.apply({j + 0.5, i + 0.5}));
      for (int c = 0; c < 3; ++c) patch.at(i, j, c) = v[static_cast<std::size_t>(c)];
    }
  }
  return patch;
}

/// Pools the axis-aligned minimum bounding square of the quad.
inline PooledPatch pool_square(const ImageBuffer& img, const Quadrilateral& quad, int size) {
  return pool_quadrilateral(img, min_bounding_square(quad), size);
}

inline PooledPatch pool(const ImageBuffer& img, const Quadrilateral& quad, PoolingMethod method, int size) {
  return method == PoolingMethod::square ? pool_square(img, quad, size) : pool_quadrilateral(img, quad, size);
}

inline int assign_level(const Quadrilateral& quad, const LevelAssignConfig& cfg) {
  const double k = std::floor(cfg.k0 + std::log2(std::sqrt(quad_area(quad)) / cfg.canonical_size));
  if (k < cfg.level_min) return cfg.level_min;
  if (k > cfg.level_max) return cfg.level_max;
  return static_cast<int>(k);
}

inline constexpr int kPyramidPoolSize = 7;

struct PyramidPoolResult {
  PooledPatch patch;
  int level = 0;
};

/// Pools a 7 x 7 patch from the level chosen by assign_level(). The quad is
/// given in level-0 pixels and mapped to level k with the per-axis size
/// ratio of the two levels (2^-k when the dimensions halve evenly).
inline PyramidPoolResult pool_from_pyramid_traced(const ImagePyramid& pyr, const Quadrilateral& quad,
                                                  PoolingMethod method, const LevelAssignConfig& cfg,
                                                  std::optional<int> forced_level = std::nullopt) {
  if (pyr.size() == 0) throw InvalidParameterError("empty pyramid");
  const int level = forced_level ? *forced_level : assign_level(quad, cfg);
  if (level < 0 || static_cast<std::size_t>(level) >= pyr.size())
    throw InvalidParameterError("assigned pyramid level " + std::to_string(level) + " not in pyramid of " +
                                std::to_string(pyr.size()) + " levels");
  const ImageBuffer& base = pyr[0];
  const ImageBuffer& target = pyr[static_cast<std::size_t>(level)];
  const Quadrilateral scaled =
      rescale_between_rasters(quad, static_cast<double>(target.width()) / base.width(),
                              static_cast<double>(target.height()) / base.height());
  return {pool(target, scaled, method, kPyramidPoolSize), level};
}

inline PooledPatch pool_from_pyramid(const ImagePyramid& pyr, const Quadrilateral& quad, PoolingMethod method,
                                     const LevelAssignConfig& cfg) {
  return pool_from_pyramid_traced(pyr, quad, method, cfg).patch;
}

}  // namespace quadpool

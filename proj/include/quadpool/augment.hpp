// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include "quadpool/dataset.hpp"
#include "quadpool/error.hpp"
#include "quadpool/geometry.hpp"
#include "quadpool/image.hpp"
#include "quadpool/rng.hpp"

namespace quadpool {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
};

struct AugmentParams {
  double flip_prob = 0.5;
  double max_rotation = 15.0;  // degrees
  Interval brightness{0.8, 1.2};
  Interval contrast{0.8, 1.2};
  Interval saturation{0.8, 1.2};
  Interval hue{-10.0, 10.0};  // degrees
  Rgb fill{0.5, 0.5, 0.5};

  static AugmentParams none() {
    return {0.0, 0.0, {1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}, {0.5, 0.5, 0.5}};
  }

  void validate() const {
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw InvalidParameterError("flip_prob must lie in [0, 1]");
    if (!(max_rotation >= 0.0)) throw InvalidParameterError("max_rotation must be >= 0");
    if (!brightness.contains(1.0) || !contrast.contains(1.0) || !saturation.contains(1.0))
      throw InvalidParameterError("photometric factor ranges must contain 1");
    if (!(brightness.lo > 0.0) || !(contrast.lo > 0.0) || !(saturation.lo >= 0.0))
      throw InvalidParameterError("photometric factor ranges must be positive");
    if (!hue.contains(0.0) || hue.lo < -180.0 || hue.hi > 180.0)
      throw InvalidParameterError("hue range must contain 0 and lie within [-180, 180]");
  }
};

/// One draw of the augmentation: the joint geometric map for image and
/// annotations, plus the photometric settings.
struct AugmentationSample {
  bool flipped = false;
  double rotation_degrees = 0.0;
  AffineTransform transform;
  PhotometricSettings photometric;

  bool is_identity() const { return !flipped && rotation_degrees == 0.0 && photometric.is_identity(); }
};

/// Flip (mirror about the vertical center line) then rotation about the
/// image center. Draw order is fixed: flip, rotation, brightness, contrast,
/// saturation, hue.
inline AugmentationSample sample_augmentation(const AugmentParams& params, int width, int height, Rng& rng) {
  params.validate();
  AugmentationSample s;
  s.flipped = rng.bernoulli(params.flip_prob);
  s.rotation_degrees = params.max_rotation > 0.0 ? rng.uniform(-params.max_rotation, params.max_rotation) : 0.0;
  auto draw = [&rng](const Interval& iv) { return iv.lo == iv.hi ? iv.lo : rng.uniform(iv.lo, iv.hi); };
  s.photometric.brightness = draw(params.brightness);
  s.photometric.contrast = draw(params.contrast);
  s.photometric.saturation = draw(params.saturation);
  s.photometric.hue_degrees = draw(params.hue);

  const Point2 center{0.5 * (width - 1), 0.5 * (height - 1)};
  AffineTransform t = AffineTransform::identity();
  if (s.flipped) t = AffineTransform::mirror_x(center.x);
  if (s.rotation_degrees != 0.0) t = AffineTransform::rotation_about(center, s.rotation_degrees) * t;
  s.transform = t;
  return s;
}

struct AugmentedScene {
  ImageBuffer image;
  std::vector<SpaceLabel> spaces;
};

/// Applies one augmentation draw to the image and to every annotation.
inline AugmentedScene apply_augmentation(const ImageBuffer& img, const std::vector<SpaceLabel>& spaces,
                                         const AugmentationSample& sample, const Rgb& fill) {
  const bool geometric = sample.flipped || sample.rotation_degrees != 0.0;
  ImageBuffer warped = geometric ? warp_affine(img, sample.transform, fill) : img;
  AugmentedScene out{adjust_photometric(warped, sample.photometric), {}};
  out.spaces.reserve(spaces.size());
  for (const auto& sp : spaces) {
    out.spaces.push_back({geometric ? apply_transform(sp.quad, sample.transform) : sp.quad, sp.occupied});
  }
  return out;
}

inline AugmentedScene augment_scene(const ImageBuffer& img, const std::vector<SpaceLabel>& spaces,
                                    const AugmentParams& params, Rng& rng) {
  const AugmentationSample sample = sample_augmentation(params, img.width(), img.height(), rng);
  return apply_augmentation(img, spaces, sample, params.fill);
}

}  // namespace quadpool

// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "quadpool/augment.hpp"
#include "quadpool/pooling.hpp"

using namespace quadpool;

namespace {

ImageBuffer smooth_image(int w, int h) {
  ImageBuffer img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set_pixel(x, y, {0.5 + 0.4 * std::sin(x * 0.21), 0.5 + 0.4 * std::cos(y * 0.17), 0.5 + 0.3 * std::sin((x + y) * 0.1)});
  return img;
}

std::vector<SpaceLabel> some_spaces() {
  return {{Quadrilateral({Point2{10, 10}, Point2{30, 12}, Point2{28, 30}, Point2{12, 28}}), true},
          {Quadrilateral({Point2{35, 15}, Point2{50, 15}, Point2{50, 40}, Point2{35, 40}}), false}};
}

bool same_vertex_set(const Quadrilateral& a, const std::array<Point2, 4>& b, double tol) {
  for (const auto& p : b) {
    bool found = false;
    for (const auto& q : a.vertices()) found |= std::abs(p.x - q.x) <= tol && std::abs(p.y - q.y) <= tol;
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST(SampleAugmentation, DegenerateParamsGiveIdentity) {
  Rng rng(1);
  const AugmentationSample s = sample_augmentation(AugmentParams::none(), 64, 48, rng);
  EXPECT_TRUE(s.is_identity());
  const Point2 p{3.25, 7.5};
  EXPECT_EQ(s.transform.apply(p), p);
}

TEST(SampleAugmentation, FlipProbOneMirrorsAboutCenter) {
  AugmentParams params = AugmentParams::none();
  params.flip_prob = 1.0;
  Rng rng(2);
  const AugmentationSample s = sample_augmentation(params, 64, 48, rng);
  EXPECT_TRUE(s.flipped);
  EXPECT_EQ(s.transform.apply({0, 5}), (Point2{63, 5}));
  EXPECT_EQ(s.transform.apply({20.5, 1}), (Point2{42.5, 1}));
}

TEST(SampleAugmentation, SameSeedSameDraws) {
  const AugmentParams params;
  Rng a(42), b(42);
  for (int i = 0; i < 20; ++i) {
    const AugmentationSample x = sample_augmentation(params, 100, 80, a);
    const AugmentationSample y = sample_augmentation(params, 100, 80, b);
    EXPECT_EQ(x.flipped, y.flipped);
    EXPECT_EQ(x.rotation_degrees, y.rotation_degrees);
    EXPECT_EQ(x.photometric, y.photometric);
    EXPECT_LE(std::abs(x.rotation_degrees), params.max_rotation);
    EXPECT_TRUE(params.brightness.contains(x.photometric.brightness));
    EXPECT_TRUE(params.hue.contains(x.photometric.hue_degrees));
  }
}

TEST(AugmentParams, Validation) {
  AugmentParams p;
  p.flip_prob = 1.5;
  EXPECT_THROW(p.validate(), InvalidParameterError);
  p = {};
  p.brightness = {1.1, 1.3};
  EXPECT_THROW(p.validate(), InvalidParameterError);
  p = {};
  p.hue = {5, 10};
  EXPECT_THROW(p.validate(), InvalidParameterError);
  p = {};
  p.max_rotation = -1;
  EXPECT_THROW(p.validate(), InvalidParameterError);
}

TEST(AugmentScene, IdentityParamsChangeNothing) {
  std::mt19937_64 gen(3);
  const ImageBuffer img = oracle::random_image(60, 50, gen);
  Rng rng(3);
  const AugmentedScene out = augment_scene(img, some_spaces(), AugmentParams::none(), rng);
  EXPECT_EQ(out.image, img);
  EXPECT_EQ(out.spaces, some_spaces());
}

TEST(AugmentScene, PureFlipMirrorsVertices) {
  std::mt19937_64 gen(4);
  const ImageBuffer img = oracle::random_image(60, 50, gen);
  AugmentParams params = AugmentParams::none();
  params.flip_prob = 1.0;
  Rng rng(4);
  const AugmentedScene out = augment_scene(img, some_spaces(), params, rng);
  for (std::size_t i = 0; i < out.spaces.size(); ++i) {
    std::array<Point2, 4> expected;
    for (int k = 0; k < 4; ++k) expected[k] = {(60 - 1) - some_spaces()[i].quad[k].x, some_spaces()[i].quad[k].y};
    EXPECT_TRUE(same_vertex_set(out.spaces[i].quad, expected, 0.0));
  }
  for (int y = 0; y < 50; ++y)
    for (int x = 0; x < 60; ++x) EXPECT_EQ(out.image.pixel(x, y), img.pixel(59 - x, y));
}

TEST(AugmentScene, RotationCommutesWithPooling) {
  const ImageBuffer img = smooth_image(64, 64);
  AugmentParams params = AugmentParams::none();
  params.max_rotation = 10.0;
  Rng rng(5);
  AugmentationSample s = sample_augmentation(params, 64, 64, rng);
  s.rotation_degrees = 10.0;
  s.transform = AffineTransform::rotation_about(image_center(img), 10.0);
  const auto spaces = some_spaces();
  const AugmentedScene out = apply_augmentation(img, spaces, s, params.fill);
  const AffineTransform inv = s.transform.inverse();
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    const PooledPatch a = pool_square(out.image, out.spaces[i].quad, 8);
    const PooledPatch qa = pool_quadrilateral(out.image, out.spaces[i].quad, 8);
    const PooledPatch qb = pool_quadrilateral(img, spaces[i].quad, 8);
    // Square cells mapped back into the original image.
    const Homography3x3 ha = homography_from_unit_square(min_bounding_square(out.spaces[i].quad));
    for (int r = 1; r < 7; ++r)
      for (int c = 1; c < 7; ++c) {
        const Point2 src = inv.apply(ha.apply({(c + 0.5) / 8, (r + 0.5) / 8}));
        const Rgb ref = bilinear_sample(img, src);
        for (int ch = 0; ch < 3; ++ch) {
          EXPECT_NEAR(a.at(r, c, ch), ref[ch], 5e-2);
          EXPECT_NEAR(qa.at(r, c, ch), qb.at(r, c, ch), 5e-2);
        }
      }
  }
}

TEST(AugmentScene, MarkersFollowQuadCentroidsProperty) {
  const int w = 80, h = 64;
  std::vector<SpaceLabel> spaces;
  ImageBuffer img(w, h, Rgb{0.0, 0.0, 0.0});
  const Point2 centers[] = {{20, 20}, {55, 18}, {40, 45}};
  for (const auto& c : centers) {
    spaces.push_back({Quadrilateral({Point2{c.x - 6, c.y - 4}, Point2{c.x + 6, c.y - 4}, Point2{c.x + 6, c.y + 4},
                                     Point2{c.x - 6, c.y + 4}}),
                      false});
    img.set_pixel(static_cast<int>(c.x), static_cast<int>(c.y), {1, 1, 1});
  }
  AugmentParams params;
  params.brightness = params.contrast = params.saturation = {1.0, 1.0};
  params.hue = {0.0, 0.0};
  params.fill = {0, 0, 0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const AugmentedScene out = augment_scene(img, spaces, params, rng);
    for (const auto& sp : out.spaces) {
      const Point2 m = sp.quad.vertex_mean();
      double sw = 0, sx = 0, sy = 0;
      for (int y = std::max(0, static_cast<int>(m.y) - 3); y <= std::min(h - 1, static_cast<int>(m.y) + 3); ++y)
        for (int x = std::max(0, static_cast<int>(m.x) - 3); x <= std::min(w - 1, static_cast<int>(m.x) + 3); ++x) {
          const double v = out.image.at(x, y, 0);
          sw += v;
          sx += v * x;
          sy += v * y;
        }
      ASSERT_GT(sw, 0.0) << "seed " << seed;
      EXPECT_NEAR(sx / sw, m.x, 0.75) << "seed " << seed;
      EXPECT_NEAR(sy / sw, m.y, 0.75) << "seed " << seed;
    }
  }
}

TEST(AugmentScene, LabelsCardinalityAndDeterminism) {
  std::mt19937_64 gen(6);
  const ImageBuffer img = oracle::random_image(60, 50, gen);
  const AugmentParams params;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng a(seed), b(seed);
    const AugmentedScene x = augment_scene(img, some_spaces(), params, a);
    const AugmentedScene y = augment_scene(img, some_spaces(), params, b);
    EXPECT_EQ(x.image, y.image);
    EXPECT_EQ(x.spaces, y.spaces);
    ASSERT_EQ(x.spaces.size(), 2u);
    EXPECT_TRUE(x.spaces[0].occupied);
    EXPECT_FALSE(x.spaces[1].occupied);
    for (double v : x.image.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(AugmentScene, BoundingSquareDoesNotCommuteWithRotation) {
  const Quadrilateral thin({Point2{0, 0}, Point2{20, 0}, Point2{20, 2}, Point2{0, 2}});
  const AffineTransform r = AffineTransform::rotation_about({10, 1}, 45.0);
  const Quadrilateral a = min_bounding_square(apply_transform(thin, r));
  const Quadrilateral b = apply_transform(min_bounding_square(thin), r);
  EXPECT_GT(std::abs(quad_area(a) - quad_area(b)), 1.0);
}

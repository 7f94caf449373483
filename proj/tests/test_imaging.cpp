// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "quadpool/image.hpp"

using namespace quadpool;

TEST(Bilinear, ConstantField) {
  const ImageBuffer img(5, 4, Rgb{0.5, 0.5, 0.5});
  for (double x : {-3.0, 0.0, 1.7, 4.0, 9.0})
    for (double y : {-1.0, 0.2, 3.0, 7.5}) EXPECT_EQ(bilinear_sample(img, x, y), (Rgb{0.5, 0.5, 0.5}));
}

TEST(Bilinear, MidpointOfTwoPixels) {
  ImageBuffer img(2, 1);
  img.set_pixel(1, 0, {1.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(bilinear_sample(img, 0.5, 0.0)[0], 0.5);
}

TEST(Bilinear, MatchesTentOracleIncludingOutOfBounds) {
  std::mt19937_64 gen(1);
  const ImageBuffer img = oracle::random_image(8, 8, gen);
  std::uniform_real_distribution<double> u(-2.0, 10.0);
  for (int t = 0; t < 100; ++t) {
    const double x = u(gen), y = u(gen);
    const Rgb a = bilinear_sample(img, x, y);
    const auto b = oracle::bilinear(img, x, y);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(a[c], b[c], 1e-12);
  }
}

TEST(Bilinear, PixelCentersAreExact) {
  std::mt19937_64 gen(2);
  const ImageBuffer img = oracle::random_image(6, 5, gen);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x) EXPECT_EQ(bilinear_sample(img, x, y), img.pixel(x, y));
}

TEST(Resize, SameDimsIdenticalAndConstantStaysConstant) {
  std::mt19937_64 gen(3);
  const ImageBuffer img = oracle::random_image(9, 7, gen);
  EXPECT_EQ(resize(img, 9, 7), img);
  const ImageBuffer c(2, 2, Rgb{0.25, 0.5, 0.75});
  const ImageBuffer r = resize(c, 13, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 13; ++x)
      for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(r.at(x, y, ch), c.at(0, 0, ch), 1e-15);
}

TEST(Resize, MatchesSamplingOracle) {
  std::mt19937_64 gen(4);
  const ImageBuffer img = oracle::random_image(16, 16, gen);
  const ImageBuffer r = resize(img, 7, 7);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 7; ++x) {
      const auto ref = oracle::bilinear(img, (x + 0.5) * 16.0 / 7.0 - 0.5, (y + 0.5) * 16.0 / 7.0 - 0.5);
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(r.at(x, y, c), ref[c], 1e-12);
    }
}

TEST(ResizeSmallerEdge, Dimensions) {
  EXPECT_EQ(smaller_edge_dims(4000, 3000, 1440), (std::pair<int, int>{1920, 1440}));
  EXPECT_EQ(smaller_edge_dims(4000, 3000, 800), (std::pair<int, int>{1067, 800}));
  EXPECT_EQ(smaller_edge_dims(3000, 4000, 800), (std::pair<int, int>{800, 1067}));
  std::mt19937_64 gen(5);
  const ImageBuffer img = oracle::random_image(100, 100, gen);
  EXPECT_EQ(resize_smaller_edge(img, 100), img);
  EXPECT_THROW(resize_smaller_edge(img, 0), InvalidParameterError);
}

TEST(Rotate, ZeroAngleAndConstantImage) {
  std::mt19937_64 gen(6);
  const ImageBuffer img = oracle::random_image(10, 8, gen);
  EXPECT_EQ(rotate_about_center(img, 0.0, {0, 0, 0}), img);
  const ImageBuffer c(10, 8, Rgb{0.3, 0.3, 0.3});
  const ImageBuffer r = rotate_about_center(c, 33.0, {0.3, 0.3, 0.3});
  for (std::size_t i = 0; i < c.data().size(); ++i) EXPECT_NEAR(r.data()[i], 0.3, 1e-15);
}

TEST(Rotate, DeltaQuarterTurnLandsOnRotatedPixel) {
  ImageBuffer img(9, 9);
  img.set_pixel(6, 2, {1, 1, 1});
  const ImageBuffer r = rotate_about_center(img, 90.0, {0, 0, 0});
  // (x, y) -> (c - (y - c), c + (x - c)) about c = 4 with y pointing down.
  const int ex = 4 - (2 - 4), ey = 4 + (6 - 4);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) EXPECT_EQ(r.at(x, y, 0), (x == ex && y == ey) ? 1.0 : 0.0) << x << "," << y;
}

TEST(Rotate, RoundTripInteriorProperty) {
  std::mt19937_64 gen(7);
  // Smooth image so double resampling stays within tolerance.
  ImageBuffer img(40, 40);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x)
      img.set_pixel(x, y, {0.5 + 0.4 * std::sin(x * 0.2), 0.5 + 0.4 * std::cos(y * 0.15), 0.5});
  const ImageBuffer back = rotate_about_center(rotate_about_center(img, 23.0, {0, 0, 0}), -23.0, {0, 0, 0});
  for (int y = 10; y < 30; ++y)
    for (int x = 10; x < 30; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(back.at(x, y, c), img.at(x, y, c), 2e-2);
}

TEST(Photometric, IdentityIsBitwiseNoOp) {
  std::mt19937_64 gen(8);
  const ImageBuffer img = oracle::random_image(7, 7, gen);
  EXPECT_EQ(adjust_photometric(img, 1.0, 1.0, 1.0, 0.0), img);
}

TEST(Photometric, ZeroSaturationIsLuma) {
  std::mt19937_64 gen(9);
  const ImageBuffer img = oracle::random_image(7, 7, gen);
  const ImageBuffer g = adjust_photometric(img, 1.0, 1.0, 0.0, 0.0);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 7; ++x) {
      const double l = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(g.at(x, y, c), l, 1e-15);
    }
}

TEST(Photometric, BrightnessScalesMidGray) {
  const ImageBuffer img(4, 4, Rgb{0.5, 0.5, 0.5});
  const ImageBuffer b = adjust_photometric(img, 1.2, 1.0, 1.0, 0.0);
  for (double v : b.data()) EXPECT_NEAR(v, 0.6, 1e-15);
}

TEST(Photometric, RejectsNonPositiveFactorsAndBadHue) {
  const ImageBuffer img(2, 2);
  EXPECT_THROW(adjust_photometric(img, 0.0, 1.0, 1.0, 0.0), InvalidParameterError);
  EXPECT_THROW(adjust_photometric(img, 1.0, -1.0, 1.0, 0.0), InvalidParameterError);
  EXPECT_THROW(adjust_photometric(img, 1.0, 1.0, -0.1, 0.0), InvalidParameterError);
  EXPECT_THROW(adjust_photometric(img, 1.0, 1.0, 1.0, 200.0), InvalidParameterError);
}

TEST(Photometric, OutputsStayInUnitRangeProperty) {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> f(0.01, 4.0), h(-180.0, 180.0);
  for (int t = 0; t < 50; ++t) {
    const ImageBuffer img = oracle::random_image(5, 5, gen);
    const ImageBuffer out = adjust_photometric(img, f(gen), f(gen), f(gen), h(gen));
    for (double v : out.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Photometric, HueFullTurnIsNearIdentity) {
  std::mt19937_64 gen(11);
  const ImageBuffer img = oracle::random_image(5, 5, gen);
  const ImageBuffer a = adjust_photometric(adjust_photometric(img, 1.0, 1.0, 1.0, 120.0), 1.0, 1.0, 1.0, -120.0);
  for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_NEAR(a.data()[i], img.data()[i], 1e-12);
}

TEST(Pyramid, LevelsAndDimensions) {
  std::mt19937_64 gen(12);
  const ImageBuffer img = oracle::random_image(16, 16, gen);
  EXPECT_EQ(build_pyramid(img, 1).size(), 1u);
  const ImagePyramid p = build_pyramid(img, 3);
  EXPECT_EQ(p[1], resize(img, 8, 8));
  const ImageBuffer odd(13, 7, Rgb{0.2, 0.2, 0.2});
  const ImagePyramid q = build_pyramid(odd, 4);
  const int w[] = {13, 7, 4, 2}, h[] = {7, 4, 2, 1};
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(q[k].width(), w[k]);
    EXPECT_EQ(q[k].height(), h[k]);
    for (double v : q[k].data()) EXPECT_NEAR(v, 0.2, 1e-15);
  }
  EXPECT_THROW(build_pyramid(ImageBuffer(4, 4), 4), InvalidParameterError);
  EXPECT_THROW(build_pyramid(img, 0), InvalidParameterError);
}

TEST(Ppm, RoundTripQuantizesHalfUp) {
  ImageBuffer img(3, 2);
  img.set_pixel(0, 0, {0.0, 1.0, 0.5});
  img.set_pixel(2, 1, {0.5, 0.2, 0.9});
  const auto bytes = encode_ppm(img);
  const ImageBuffer back = decode_ppm(bytes);
  EXPECT_EQ(back.width(), 3);
  EXPECT_EQ(back.height(), 2);
  EXPECT_DOUBLE_EQ(back.at(0, 0, 2), 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(back.at(2, 1, 0), 128.0 / 255.0);
  EXPECT_EQ(encode_ppm(back), bytes);
}

TEST(Ppm, CommentsAndErrors) {
  const std::string text = "P6\n# a comment\n1 1\n255\nABC";
  const ImageBuffer img = decode_ppm(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  EXPECT_DOUBLE_EQ(img.at(0, 0, 0), 65.0 / 255.0);
  const std::string bad = "P5\n1 1\n255\nA";
  EXPECT_THROW(decode_ppm(std::span(reinterpret_cast<const std::uint8_t*>(bad.data()), bad.size())), IoError);
  const std::string short_data = "P6\n2 2\n255\nABC";
  EXPECT_THROW(decode_ppm(std::span(reinterpret_cast<const std::uint8_t*>(short_data.data()), short_data.size())),
               IoError);
  EXPECT_THROW(read_ppm("/nonexistent/file.ppm"), IoError);
}

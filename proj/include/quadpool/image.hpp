// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "quadpool/error.hpp"
#include "quadpool/geometry.hpp"

namespace quadpool {

using Rgb = std::array<double, 3>;

/// Dense RGB raster, row-major, interleaved channels, values in [0, 1].
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer(int width, int height, Rgb fill = {0.0, 0.0, 0.0}) : width_(width), height_(height) {
    check_dims(width, height);
    data_.resize(static_cast<std::size_t>(width) * height * kChannels);
    for (std::size_t i = 0; i < data_.size(); i += kChannels) std::copy(fill.begin(), fill.end(), data_.begin() + i);
  }

  ImageBuffer(int width, int height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height * kChannels)
      throw InvalidParameterError("image data length does not match width * height * 3");
  }

  int width() const { return width_; }
  int height() const { return height_; }

  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }
  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }

  Rgb pixel(int x, int y) const {
    const std::size_t i = index(x, y, 0);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set_pixel(int x, int y, const Rgb& rgb) {
    const std::size_t i = index(x, y, 0);
    data_[i] = rgb[0];
    data_[i + 1] = rgb[1];
    data_[i + 2] = rgb[2];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  static void check_dims(int width, int height) {
    if (width < 1 || height < 1) throw InvalidParameterError("image dimensions must be >= 1");
  }
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int width_;
  int height_;
  std::vector<double> data_;
};

/// Bilinear interpolation between pixel centers. Coordinates outside the
/// image are clamped to the pixel-center range [0, w-1] x [0, h-1].
inline Rgb bilinear_sample(const ImageBuffer& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double tx = x - x0;
  const double ty = y - y0;
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    const double top = (1.0 - tx) * img.at(x0, y0, c) + tx * img.at(x1, y0, c);
    const double bottom = (1.0 - tx) * img.at(x0, y1, c) + tx * img.at(x1, y1, c);
    out[static_cast<std::size_t>(c)] = (1.0 - ty) * top + ty * bottom;
  }
  return out;
}

inline Rgb bilinear_sample(const ImageBuffer& img, Point2 p) { return bilinear_sample(img, p.x, p.y); }

/// Bilinear resampling with aligned pixel centers:
/// src = (dst + 0.5) * (old / new) - 0.5.
inline ImageBuffer resize(const ImageBuffer& img, int new_w, int new_h) {
  if (new_w < 1 || new_h < 1) throw InvalidParameterError("resize target dimensions must be >= 1");
  if (new_w == img.width() && new_h == img.height()) return img;
  const double scale_x = static_cast<double>(img.width()) / new_w;
  const double scale_y = static_cast<double>(img.height()) / new_h;
  ImageBuffer out(new_w, new_h);
  for (int y = 0; y < new_h; ++y) {
    const double sy = (y + 0.5) * scale_y - 0.5;
    for (int x = 0; x < new_w; ++x) out.set_pixel(x, y, bilinear_sample(img, (x + 0.5) * scale_x - 0.5, sy));
  }
  return out;
}

/// Dimensions after scaling so the smaller edge equals `target`; the other
/// edge is rounded half-up and kept >= 1.
inline std::pair<int, int> smaller_edge_dims(int width, int height, int target) {
  if (target < 1) throw InvalidParameterError("smaller-edge target must be >= 1");
  auto scaled = [target](std::int64_t longer, std::int64_t shorter) {
    const std::int64_t r = (2 * longer * target + shorter) / (2 * shorter);
    return static_cast<int>(std::max<std::int64_t>(r, 1));
  };
  if (width <= height) return {target, scaled(height, width)};
  return {scaled(width, height), target};
}

inline ImageBuffer resize_smaller_edge(const ImageBuffer& img, int target) {
  const auto [w, h] = smaller_edge_dims(img.width(), img.height(), target);
  return resize(img, w, h);
}

/// Inverse-maps every output pixel through `forward`. Source points outside
/// the image extent [-0.5, w-0.5] x [-0.5, h-0.5] take `fill`.
inline ImageBuffer warp_affine(const ImageBuffer& img, const AffineTransform& forward, const Rgb& fill) {
  const AffineTransform inv = forward.inverse();
  const double max_x = img.width() - 0.5;
  const double max_y = img.height() - 0.5;
  ImageBuffer out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Point2 s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      if (s.x < -0.5 || s.x > max_x || s.y < -0.5 || s.y > max_y) {
        out.set_pixel(x, y, fill);
      } else {
        out.set_pixel(x, y, bilinear_sample(img, s));
      }
    }
  }
  return out;
}

inline Point2 image_center(const ImageBuffer& img) {
  return {0.5 * (img.width() - 1), 0.5 * (img.height() - 1)};
}

inline ImageBuffer rotate_about_center(const ImageBuffer& img, double degrees, const Rgb& fill) {
  if (degrees == 0.0) return img;
  return warp_affine(img, AffineTransform::rotation_about(image_center(img), degrees), fill);
}

// Rec. 601 luma weights.
inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

namespace detail {

inline Rgb rotate_hue(const Rgb& rgb, double degrees) {
  const double r = rgb[0], g = rgb[1], b = rgb[2];
  const double max = std::max({r, g, b});
  const double min = std::min({r, g, b});
  const double delta = max - min;
  if (delta <= 0.0) return rgb;
  double h = 0.0;  // in sixths of a turn
  if (max == r) {
    h = (g - b) / delta;
  } else if (max == g) {
    h = 2.0 + (b - r) / delta;
  } else {
    h = 4.0 + (r - g) / delta;
  }
  h += degrees / 60.0;
  h = std::fmod(h, 6.0);
  if (h < 0.0) h += 6.0;
  const double v = max;
  const double s = delta / max;
  const int sector = std::min(static_cast<int>(h), 5);
  const double f = h - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace detail

struct PhotometricSettings {
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
  double hue_degrees = 0.0;

  bool is_identity() const { return brightness == 1.0 && contrast == 1.0 && saturation == 1.0 && hue_degrees == 0.0; }
  friend bool operator==(const PhotometricSettings&, const PhotometricSettings&) = default;
};

/// Brightness (multiply), contrast (blend with mean luma), saturation (blend
/// with per-pixel luma), hue (HSV rotation), in that order, clamping to
/// [0, 1] after each step. Steps at their identity value are skipped, so the
/// identity setting returns the input unchanged.
inline ImageBuffer adjust_photometric(const ImageBuffer& img, const PhotometricSettings& s) {
  if (!(s.brightness > 0.0)) throw InvalidParameterError("brightness factor must be > 0");
  if (!(s.contrast > 0.0)) throw InvalidParameterError("contrast factor must be > 0");
  if (!(s.saturation >= 0.0)) throw InvalidParameterError("saturation factor must be >= 0");
  if (!(s.hue_degrees >= -180.0 && s.hue_degrees <= 180.0))
    throw InvalidParameterError("hue shift must lie in [-180, 180] degrees");

  ImageBuffer out = img;
  auto px = out.data();
  if (s.brightness != 1.0) {
    for (auto& v : px) v = detail::clamp01(v * s.brightness);
  }
  if (s.contrast != 1.0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < px.size(); i += 3) sum += luma(px[i], px[i + 1], px[i + 2]);
    const double mean = sum / static_cast<double>(px.size() / 3);
    for (auto& v : px) v = detail::clamp01(mean + s.contrast * (v - mean));
  }
  if (s.saturation != 1.0) {
    for (std::size_t i = 0; i < px.size(); i += 3) {
      const double l = luma(px[i], px[i + 1], px[i + 2]);
      for (std::size_t c = 0; c < 3; ++c) px[i + c] = detail::clamp01(l + s.saturation * (px[i + c] - l));
    }
  }
  if (s.hue_degrees != 0.0) {
    for (std::size_t i = 0; i < px.size(); i += 3) {
      const Rgb r = detail::rotate_hue({px[i], px[i + 1], px[i + 2]}, s.hue_degrees);
      for (std::size_t c = 0; c < 3; ++c) px[i + c] = detail::clamp01(r[c]);
    }
  }
  return out;
}

inline ImageBuffer adjust_photometric(const ImageBuffer& img, double brightness, double contrast, double saturation,
                                      double hue_degrees) {
  return adjust_photometric(img, PhotometricSettings{brightness, contrast, saturation, hue_degrees});
}

/// Level 0 is the finest; level k has dimensions ceil(level0 / 2^k).
struct ImagePyramid {
  std::vector<ImageBuffer> levels;

  std::size_t size() const { return levels.size(); }
  const ImageBuffer& operator[](std::size_t k) const { return levels[k]; }
};

inline ImagePyramid build_pyramid(const ImageBuffer& img, int num_levels) {
  if (num_levels < 1) throw InvalidParameterError("pyramid needs at least one level");
  ImagePyramid pyr;
  pyr.levels.reserve(static_cast<std::size_t>(num_levels));
  pyr.levels.push_back(img);
  for (int k = 1; k < num_levels; ++k) {
    const ImageBuffer& prev = pyr.levels.back();
    if (prev.width() == 1 && prev.height() == 1)
      throw InvalidParameterError("too many pyramid levels for a " + std::to_string(img.width()) + "x" +
                                  std::to_string(img.height()) + " image");
    pyr.levels.push_back(resize(prev, (prev.width() + 1) / 2, (prev.height() + 1) / 2));
  }
  return pyr;
}

// --- PPM (P6, maxval 255) -------------------------------------------------

inline std::vector<std::uint8_t> encode_ppm(const ImageBuffer& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + img.data().size());
  for (double v : img.data()) {
    const double scaled = std::floor(detail::clamp01(v) * 255.0 + 0.5);
    bytes.push_back(static_cast<std::uint8_t>(scaled));
  }
  return bytes;
}

inline ImageBuffer decode_ppm(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>") {
  std::size_t pos = 0;
  auto fail = [&origin](const std::string& what) -> IoError { return IoError(origin + ": " + what); };
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space_and_comments();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail("malformed PPM header");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1'000'000) throw fail("PPM header value out of range");
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw fail("not a binary PPM (P6) file");
  pos = 2;
  const long w = read_int();
  const long h = read_int();
  const long maxval = read_int();
  if (w < 1 || h < 1) throw fail("PPM has zero dimension");
  if (maxval != 255) throw fail("only maxval 255 PPM files are supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("malformed PPM header");
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (bytes.size() - pos < n) throw fail("truncated PPM pixel data");
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = bytes[pos + i] / 255.0;
  return ImageBuffer(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

inline ImageBuffer read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes, path.string());
}

inline void write_ppm(const std::filesystem::path& path, const ImageBuffer& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image '" + path.string() + "'");
  const auto bytes = encode_ppm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing image '" + path.string() + "'");
}

}  // namespace quadpool

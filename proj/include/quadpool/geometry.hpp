// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0
//
// Planar geometry for parking-space annotations. All coordinates are image
// pixels with the y axis pointing down and pixel centers at integer
// coordinates, so pixel (0, 0) covers [-0.5, 0.5] x [-0.5, 0.5].

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "quadpool/error.hpp"

namespace quadpool {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }

inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

namespace detail {

// Shoelace sum (twice the signed area). Positive for clockwise order on
// screen, i.e. with y pointing down.
inline double twice_signed_area(const std::array<Point2, 4>& v) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += cross(v[i], v[(i + 1) % 4]);
  return s;
}

inline int orientation_sign(Point2 a, Point2 b, Point2 c) {
  const double o = cross(b - a, c - a);
  return (o > 0.0) - (o < 0.0);
}

inline bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

inline bool segments_intersect(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
  const int o1 = orientation_sign(p1, p2, q1);
  const int o2 = orientation_sign(p1, p2, q2);
  const int o3 = orientation_sign(q1, q2, p1);
  const int o4 = orientation_sign(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

inline std::string describe(const std::array<Point2, 4>& v) {
  std::ostringstream os;
  for (int i = 0; i < 4; ++i) os << (i ? " " : "") << '(' << v[i].x << ',' << v[i].y << ')';
  return os.str();
}

}  // namespace detail

/// Four-vertex parking-space outline.
///
/// Construction validates the polygon (finite, simple, area at least
/// `kMinArea`) and stores it in canonical winding: clockwise on screen,
/// starting from the vertex with the smallest y, ties broken by smallest x.
class Quadrilateral {
 public:
  static constexpr double kMinArea = 1e-6;
  // y values closer than this count as tied when picking the first vertex.
  static constexpr double kStartTieTolerance = 1e-9;

  explicit Quadrilateral(const std::array<Point2, 4>& vertices) : v_(vertices) {
    for (const auto& p : v_) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw DegenerateGeometryError("quadrilateral has non-finite vertex: " + detail::describe(v_));
    }
    for (int i = 0; i < 4; ++i) {
      if (v_[i] == v_[(i + 1) % 4])
        throw DegenerateGeometryError("quadrilateral has coincident vertices: " + detail::describe(v_));
    }
    if (detail::segments_intersect(v_[0], v_[1], v_[2], v_[3]) ||
        detail::segments_intersect(v_[1], v_[2], v_[3], v_[0]))
      throw DegenerateGeometryError("quadrilateral is self-intersecting: " + detail::describe(v_));

    const double twice_area = detail::twice_signed_area(v_);
    if (std::abs(twice_area) * 0.5 < kMinArea)
      throw DegenerateGeometryError("quadrilateral area below threshold: " + detail::describe(v_));
    if (twice_area < 0.0) std::reverse(v_.begin(), v_.end());

    double min_y = v_[0].y;
    for (const auto& p : v_) min_y = std::min(min_y, p.y);
    int start = -1;
    for (int i = 0; i < 4; ++i) {
      if (v_[i].y <= min_y + kStartTieTolerance && (start < 0 || v_[i].x < v_[start].x)) start = i;
    }
    std::rotate(v_.begin(), v_.begin() + start, v_.end());
  }

  const std::array<Point2, 4>& vertices() const { return v_; }
  const Point2& operator[](std::size_t i) const { return v_[i]; }

  Point2 vertex_mean() const {
    return 0.25 * (v_[0] + v_[1] + v_[2] + v_[3]);
  }

  friend bool operator==(const Quadrilateral&, const Quadrilateral&) = default;

 private:
  std::array<Point2, 4> v_;
};

inline double quad_area(const Quadrilateral& quad) {
  return 0.5 * detail::twice_signed_area(quad.vertices());
}

/// Point-in-polygon test that also accepts points within `slack` of the
/// boundary.
inline bool contains(const Quadrilateral& quad, Point2 p, double slack = 0.0) {
  const auto& v = quad.vertices();
  bool inside = false;
  for (int i = 0, j = 3; i < 4; j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x_cross = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  if (inside || slack <= 0.0) return inside;
  for (int i = 0; i < 4; ++i) {
    const Point2 a = v[i];
    const Point2 b = v[(i + 1) % 4];
    const Point2 ab = b - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    const double t = std::clamp(((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2, 0.0, 1.0);
    const Point2 d = p - (a + t * ab);
    if (std::hypot(d.x, d.y) <= slack) return true;
  }
  return false;
}

/// Projective map of the plane, stored row-major with m[8] normalized to 1.
class Homography3x3 {
 public:
  explicit Homography3x3(const std::array<double, 9>& m) : m_(m) {
    if (!std::isfinite(m_[8]) || std::abs(m_[8]) < 1e-300)
      throw DegenerateGeometryError("homography has zero bottom-right entry");
    const double s = m_[8];
    for (auto& e : m_) e /= s;
    const double det = determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-300)
      throw DegenerateGeometryError("homography is singular");
  }

  static Homography3x3 identity() { return Homography3x3({1, 0, 0, 0, 1, 0, 0, 0, 1}); }

  double operator()(int r, int c) const { return m_[static_cast<std::size_t>(r * 3 + c)]; }
  const std::array<double, 9>& matrix() const { return m_; }

  double determinant() const {
    return m_[0] * (m_[4] * m_[8] - m_[5] * m_[7]) - m_[1] * (m_[3] * m_[8] - m_[5] * m_[6]) +
           m_[2] * (m_[3] * m_[7] - m_[4] * m_[6]);
  }

  Point2 apply(Point2 p) const {
    const double w = m_[6] * p.x + m_[7] * p.y + m_[8];
    return {(m_[0] * p.x + m_[1] * p.y + m_[2]) / w, (m_[3] * p.x + m_[4] * p.y + m_[5]) / w};
  }

  /// this * diag(sx, sy, 1): pre-scales the domain.
  Homography3x3 scale_domain(double sx, double sy) const {
    return Homography3x3({m_[0] * sx, m_[1] * sy, m_[2], m_[3] * sx, m_[4] * sy, m_[5], m_[6] * sx, m_[7] * sy,
                          m_[8]});
  }

  Homography3x3 inverse() const {
    const auto& a = m_;
    std::array<double, 9> inv{
        a[4] * a[8] - a[5] * a[7], a[2] * a[7] - a[1] * a[8], a[1] * a[5] - a[2] * a[4],
        a[5] * a[6] - a[3] * a[8], a[0] * a[8] - a[2] * a[6], a[2] * a[3] - a[0] * a[5],
        a[3] * a[7] - a[4] * a[6], a[1] * a[6] - a[0] * a[7], a[0] * a[4] - a[1] * a[3]};
    return Homography3x3(inv);
  }

  friend Homography3x3 operator*(const Homography3x3& a, const Homography3x3& b) {
    std::array<double, 9> r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r[i * 3 + j] += a(i, k) * b(k, j);
    return Homography3x3(r);
  }

 private:
  std::array<double, 9> m_;
};

/// Maps the unit square corners (0,0), (1,0), (1,1), (0,1) onto the quad's
/// vertices in canonical order.
///
/// Closed-form square-to-quad solution. Parallelograms take the affine branch,
/// so axis-aligned rectangles produce an exact scale + translation. The
/// projective denominator must stay positive over the whole square, which
/// rules out non-convex quads.
inline Homography3x3 homography_from_unit_square(const Quadrilateral& quad) {
  const auto& v = quad.vertices();
  const double sx = v[0].x - v[1].x + v[2].x - v[3].x;
  const double sy = v[0].y - v[1].y + v[2].y - v[3].y;
  if (sx == 0.0 && sy == 0.0) {
    return Homography3x3({v[1].x - v[0].x, v[2].x - v[1].x, v[0].x,  //
                          v[1].y - v[0].y, v[2].y - v[1].y, v[0].y,  //
                          0.0, 0.0, 1.0});
  }
  const double dx1 = v[1].x - v[2].x;
  const double dx2 = v[3].x - v[2].x;
  const double dy1 = v[1].y - v[2].y;
  const double dy2 = v[3].y - v[2].y;
  const double den = dx1 * dy2 - dx2 * dy1;
  if (den == 0.0 || !std::isfinite(den))
    throw DegenerateGeometryError("cannot map unit square onto quadrilateral " + detail::describe(v));
  const double g = (sx * dy2 - dx2 * sy) / den;
  const double h = (dx1 * sy - sx * dy1) / den;
  constexpr double kMinWeight = 1e-9;
  if (1.0 + g <= kMinWeight || 1.0 + h <= kMinWeight || 1.0 + g + h <= kMinWeight)
    throw DegenerateGeometryError("quadrilateral is not convex, no unit-square homography: " +
                                  detail::describe(v));
  return Homography3x3({v[1].x - v[0].x + g * v[1].x, v[3].x - v[0].x + h * v[3].x, v[0].x,  //
                        v[1].y - v[0].y + g * v[1].y, v[3].y - v[0].y + h * v[3].y, v[0].y,  //
                        g, h, 1.0});
}

/// Axis-aligned square with side max(bbox width, bbox height), centered on
/// the quad's bounding box.
inline Quadrilateral min_bounding_square(const Quadrilateral& quad) {
  const auto& v = quad.vertices();
  double min_x = v[0].x, max_x = v[0].x, min_y = v[0].y, max_y = v[0].y;
  for (const auto& p : v) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double side = std::max(max_x - min_x, max_y - min_y);
  const double cx = 0.5 * (min_x + max_x);
  const double cy = 0.5 * (min_y + max_y);
  const double half = 0.5 * side;
  return Quadrilateral({Point2{cx - half, cy - half}, Point2{cx + half, cy - half}, Point2{cx + half, cy + half},
                        Point2{cx - half, cy + half}});
}

/// x' = linear * x + translation.
struct AffineTransform {
  // Row-major 2x2.
  std::array<double, 4> linear{1.0, 0.0, 0.0, 1.0};
  Point2 translation{};

  static AffineTransform identity() { return {}; }

  static AffineTransform translate(Point2 t) { return {{1.0, 0.0, 0.0, 1.0}, t}; }

  /// Rotation by `degrees` about `center`. Positive angles turn clockwise on
  /// screen (y down). Multiples of 90 degrees use exact sines and cosines.
  static AffineTransform rotation_about(Point2 center, double degrees) {
    double c = 0.0, s = 0.0;
    const double quarter_turns = degrees / 90.0;
    if (quarter_turns == std::round(quarter_turns)) {
      const auto q = static_cast<long long>(std::round(quarter_turns));
      const int k = static_cast<int>(((q % 4) + 4) % 4);
      constexpr std::array<double, 4> kCos{1.0, 0.0, -1.0, 0.0};
      constexpr std::array<double, 4> kSin{0.0, 1.0, 0.0, -1.0};
      c = kCos[k];
      s = kSin[k];
    } else {
      const double rad = degrees * std::numbers::pi / 180.0;
      c = std::cos(rad);
      s = std::sin(rad);
    }
    // p' = R (p - center) + center
    return {{c, -s, s, c}, Point2{center.x - (c * center.x - s * center.y), center.y - (s * center.x + c * center.y)}};
  }

  /// Left-right mirror about the vertical line x = axis_x.
  static AffineTransform mirror_x(double axis_x) { return {{-1.0, 0.0, 0.0, 1.0}, Point2{2.0 * axis_x, 0.0}}; }

  double determinant() const { return linear[0] * linear[3] - linear[1] * linear[2]; }

  Point2 apply(Point2 p) const {
    return {linear[0] * p.x + linear[1] * p.y + translation.x, linear[2] * p.x + linear[3] * p.y + translation.y};
  }

  AffineTransform inverse() const {
    const double det = determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-12)
      throw DegenerateGeometryError("affine transform has singular linear part");
    const std::array<double, 4> inv{linear[3] / det, -linear[1] / det, -linear[2] / det, linear[0] / det};
    return {inv, Point2{-(inv[0] * translation.x + inv[1] * translation.y),
                        -(inv[2] * translation.x + inv[3] * translation.y)}};
  }

  /// Composition: (a * b)(p) == a.apply(b.apply(p)).
  friend AffineTransform operator*(const AffineTransform& a, const AffineTransform& b) {
    const auto& l = a.linear;
    const auto& r = b.linear;
    return {{l[0] * r[0] + l[1] * r[2], l[0] * r[1] + l[1] * r[3], l[2] * r[0] + l[3] * r[2],
             l[2] * r[1] + l[3] * r[3]},
            a.apply(b.translation)};
  }

  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

/// Maps each vertex; the result is re-canonicalized, so orientation-reversing
/// maps (mirrors) still yield clockwise winding.
inline Quadrilateral apply_transform(const Quadrilateral& quad, const AffineTransform& t) {
  const double det = t.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12)
    throw DegenerateGeometryError("affine transform has singular linear part");
  const auto& v = quad.vertices();
  return Quadrilateral({t.apply(v[0]), t.apply(v[1]), t.apply(v[2]), t.apply(v[3])});
}

/// Rescales a quad between two rasters of the same scene whose pixel grids
/// are related by resize(): pixel centers map as (x + 0.5) * s - 0.5.
inline Quadrilateral rescale_between_rasters(const Quadrilateral& quad, double sx, double sy) {
  if (sx == 1.0 && sy == 1.0) return quad;
  auto v = quad.vertices();
  for (auto& p : v) p = {(p.x + 0.5) * sx - 0.5, (p.y + 0.5) * sy - 0.5};
  return Quadrilateral(v);
}

}  // namespace quadpool

// Copyright 2026 The quadpool Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "quadpool/geometry.hpp"

using namespace quadpool;

namespace {

Quadrilateral quad(std::initializer_list<Point2> pts) {
  std::array<Point2, 4> v;
  std::copy(pts.begin(), pts.end(), v.begin());
  return Quadrilateral(v);
}

void expect_vertices_near(const Quadrilateral& q, const std::array<Point2, 4>& expected, double tol) {
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(q[k].x, expected[k].x, tol) << "vertex " << k;
    EXPECT_NEAR(q[k].y, expected[k].y, tol) << "vertex " << k;
  }
}

}  // namespace

TEST(Quadrilateral, CanonicalWindingStartsAtTopLeftClockwise) {
  // Given counter-clockwise starting elsewhere.
  const Quadrilateral q = quad({{4, 2}, {4, 0}, {0, 0}, {0, 2}});
  expect_vertices_near(q, {Point2{0, 0}, Point2{4, 0}, Point2{4, 2}, Point2{0, 2}}, 0.0);
  EXPECT_GT(detail::twice_signed_area(q.vertices()), 0.0);
}

TEST(Quadrilateral, RejectsBowTie) {
  EXPECT_THROW(quad({{0, 0}, {2, 2}, {2, 0}, {0, 2}}), DegenerateGeometryError);
}

TEST(Quadrilateral, RejectsTinyArea) {
  EXPECT_THROW(quad({{0, 0}, {1e-4, 0}, {1e-4, 1e-4}, {0, 1e-4}}), DegenerateGeometryError);
  EXPECT_THROW(quad({{0, 0}, {1, 0}, {2, 0}, {3, 0}}), DegenerateGeometryError);
}

TEST(Quadrilateral, RejectsNonFinite) {
  EXPECT_THROW(quad({{0, 0}, {NAN, 0}, {1, 1}, {0, 1}}), DegenerateGeometryError);
}

TEST(Homography, UnitSquareIsIdentity) {
  const Homography3x3 h = homography_from_unit_square(quad({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  const auto& m = h.matrix();
  const std::array<double, 9> id{1, 0, 0, 0, 1, 0, 0, 0, 1};
  for (int i = 0; i < 9; ++i) EXPECT_EQ(m[i], id[i]);
}

TEST(Homography, RectangleIsScalePlusTranslation) {
  const Homography3x3 h = homography_from_unit_square(quad({{10, 20}, {50, 20}, {50, 40}, {10, 40}}));
  const std::array<double, 9> expected{40, 0, 10, 0, 20, 20, 0, 0, 1};
  for (int i = 0; i < 9; ++i) EXPECT_EQ(h.matrix()[i], expected[i]);
}

TEST(Homography, TrapezoidMatchesLinearSystemOracle) {
  const Quadrilateral q = quad({{0, 0}, {4, 0}, {3, 2}, {1, 2}});
  const Homography3x3 h = homography_from_unit_square(q);
  const Eigen::Matrix3d ref = oracle::homography(q.vertices());
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(h(r, c), ref(r, c), 1e-12);
  const std::array<Point2, 4> corners{Point2{0, 0}, Point2{1, 0}, Point2{1, 1}, Point2{0, 1}};
  for (int k = 0; k < 4; ++k) {
    const Point2 p = h.apply(corners[k]);
    EXPECT_NEAR(p.x, q[k].x, 1e-9);
    EXPECT_NEAR(p.y, q[k].y, 1e-9);
  }
}

TEST(Homography, RoundTripOnRandomConvexQuads) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 200; ++t) {
    const Quadrilateral q = oracle::random_convex_quad(gen, -50, 150);
    const Homography3x3 h = homography_from_unit_square(q);
    const Eigen::Matrix3d ref = oracle::homography(q.vertices());
    const std::array<Point2, 4> corners{Point2{0, 0}, Point2{1, 0}, Point2{1, 1}, Point2{0, 1}};
    for (int k = 0; k < 4; ++k) {
      const Point2 p = h.apply(corners[k]);
      EXPECT_NEAR(p.x, q[k].x, 1e-9);
      EXPECT_NEAR(p.y, q[k].y, 1e-9);
    }
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(h(r, c), ref(r, c), 1e-7 * (1 + std::abs(ref(r, c))));
  }
}

TEST(Homography, RejectsNonConvexQuad) {
  // Arrowhead: simple but concave at (2, 1).
  const Quadrilateral q = quad({{0, 0}, {4, 0}, {2, 1}, {2, 4}});
  EXPECT_THROW(homography_from_unit_square(q), DegenerateGeometryError);
}

TEST(Homography, InverseComposesToIdentity) {
  std::mt19937_64 gen(9);
  const Homography3x3 h = homography_from_unit_square(oracle::random_convex_quad(gen, 0, 100));
  const Homography3x3 id = h * h.inverse();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(id(r, c), r == c ? 1.0 : 0.0, 1e-12);
}

TEST(MinBoundingSquare, SquareIsItself) {
  const Quadrilateral q = quad({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  EXPECT_EQ(min_bounding_square(q), q);
}

TEST(MinBoundingSquare, RectangleGrowsShortSide) {
  const Quadrilateral s = min_bounding_square(quad({{0, 0}, {4, 0}, {4, 2}, {0, 2}}));
  expect_vertices_near(s, {Point2{0, -1}, Point2{4, -1}, Point2{4, 3}, Point2{0, 3}}, 0.0);
}

TEST(MinBoundingSquare, RotatedQuadMatchesMinMaxOracle) {
  const Quadrilateral q = quad({{1, 0}, {3, 1}, {2, 4}, {0, 2}});
  const Quadrilateral s = min_bounding_square(q);
  expect_vertices_near(s, oracle::bounding_square(q.vertices()), 1e-12);
  EXPECT_DOUBLE_EQ(s[1].x - s[0].x, 4.0);
}

TEST(MinBoundingSquare, ContainsAllVerticesProperty) {
  std::mt19937_64 gen(13);
  for (int t = 0; t < 300; ++t) {
    const Quadrilateral q = oracle::random_convex_quad(gen, -20, 80);
    const Quadrilateral s = min_bounding_square(q);
    for (const auto& p : q.vertices()) EXPECT_TRUE(contains(s, p, 1e-9));
    EXPECT_NEAR(s[1].x - s[0].x, s[3].y - s[0].y, 1e-12);
  }
}

TEST(QuadArea, KnownShapes) {
  EXPECT_DOUBLE_EQ(quad_area(quad({{0, 0}, {1, 0}, {1, 1}, {0, 1}})), 1.0);
  EXPECT_DOUBLE_EQ(quad_area(quad({{0, 0}, {4, 0}, {4, 2}, {0, 2}})), 8.0);
  EXPECT_DOUBLE_EQ(quad_area(quad({{0, 0}, {4, 0}, {3, 2}, {1, 2}})), 6.0);
}

TEST(QuadArea, TriangulationOracleAndRigidInvariance) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(-180, 180);
  for (int t = 0; t < 200; ++t) {
    const Quadrilateral q = oracle::random_convex_quad(gen, 0, 100);
    const auto& v = q.vertices();
    auto tri = [](Point2 a, Point2 b, Point2 c) { return 0.5 * std::abs(cross(b - a, c - a)); };
    EXPECT_NEAR(quad_area(q), tri(v[0], v[1], v[2]) + tri(v[0], v[2], v[3]), 1e-9);
    const AffineTransform rot = AffineTransform::translate({7.5, -3.25}) * AffineTransform::rotation_about({10, 20}, u(gen));
    EXPECT_NEAR(quad_area(apply_transform(q, rot)) / quad_area(q), 1.0, 1e-9);
    const AffineTransform lin{{2.0, 0.5, -0.3, 1.5}, {1, 1}};
    EXPECT_NEAR(quad_area(apply_transform(q, lin)) / quad_area(q), std::abs(lin.determinant()), 1e-9);
  }
}

TEST(ApplyTransform, IdentityLeavesQuadUnchanged) {
  const Quadrilateral q = quad({{1, 0}, {3, 1}, {2, 4}, {0, 2}});
  EXPECT_EQ(apply_transform(q, AffineTransform::identity()), q);
}

TEST(ApplyTransform, QuarterTurnOfUnitSquareIsExact) {
  const Quadrilateral q = quad({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const Quadrilateral r = apply_transform(q, AffineTransform::rotation_about({0, 0}, 90.0));
  expect_vertices_near(r, {Point2{-1, 0}, Point2{0, 0}, Point2{0, 1}, Point2{-1, 1}}, 0.0);
}

TEST(ApplyTransform, RotationMatchesPerVertexMatrixOracle) {
  std::mt19937_64 gen(33);
  const Quadrilateral q = oracle::random_convex_quad(gen, 0, 64);
  const Point2 c{31.5, 31.5};
  const Quadrilateral r = apply_transform(q, AffineTransform::rotation_about(c, 17.0));
  const double a = 17.0 * 3.14159265358979323846 / 180.0;
  Eigen::Matrix2d m;
  m << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  std::vector<Point2> expected;
  for (const auto& p : q.vertices()) {
    const Eigen::Vector2d o = m * Eigen::Vector2d(p.x - c.x, p.y - c.y) + Eigen::Vector2d(c.x, c.y);
    expected.push_back({o(0), o(1)});
  }
  for (const auto& e : expected) {
    bool found = false;
    for (const auto& p : r.vertices()) found |= std::abs(p.x - e.x) < 1e-9 && std::abs(p.y - e.y) < 1e-9;
    EXPECT_TRUE(found) << e.x << "," << e.y;
  }
}

TEST(ApplyTransform, InverseRoundTripAndFlipKeepsCanonicalWinding) {
  std::mt19937_64 gen(44);
  std::uniform_real_distribution<double> u(-180, 180);
  for (int t = 0; t < 100; ++t) {
    const Quadrilateral q = oracle::random_convex_quad(gen, 0, 100);
    const AffineTransform tf = AffineTransform::rotation_about({50, 50}, u(gen)) * AffineTransform::mirror_x(40.0);
    const Quadrilateral fwd = apply_transform(q, tf);
    EXPECT_GT(detail::twice_signed_area(fwd.vertices()), 0.0);
    const Quadrilateral back = apply_transform(fwd, tf.inverse());
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(back[k].x, q[k].x, 1e-9);
      EXPECT_NEAR(back[k].y, q[k].y, 1e-9);
    }
  }
}

TEST(ApplyTransform, SingularLinearPartRejected) {
  const AffineTransform flat{{1.0, 2.0, 2.0, 4.0}, {0, 0}};
  EXPECT_THROW(apply_transform(quad({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), flat), DegenerateGeometryError);
}

TEST(RescaleBetweenRasters, UnitScaleIsNoOpAndHalvingMapsPixelEdges) {
  const Quadrilateral q = quad({{-0.5, -0.5}, {7.5, -0.5}, {7.5, 3.5}, {-0.5, 3.5}});
  EXPECT_EQ(rescale_between_rasters(q, 1.0, 1.0), q);
  const Quadrilateral h = rescale_between_rasters(q, 0.5, 0.5);
  expect_vertices_near(h, {Point2{-0.5, -0.5}, Point2{3.5, -0.5}, Point2{3.5, 1.5}, Point2{-0.5, 1.5}}, 1e-12);
}

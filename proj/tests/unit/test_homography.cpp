#include <doctest.h>

#include <cmath>
#include <random>

#include "tunnelwatch/errors.hpp"
#include "tunnelwatch/homography.hpp"

using tw::BBox;
using tw::Homography;
using tw::Point;
using tw::RoiQuad;

namespace {

RoiQuad quad(Point tl, Point tr, Point br, Point bl) { return RoiQuad{{tl, tr, br, bl}}; }

RoiQuad random_convex_quad(std::mt19937_64& rng) {
  // Rectangle corners jittered by up to 20% of the side; stays convex.
  std::uniform_real_distribution<double> size(40.0, 200.0);
  std::uniform_real_distribution<double> origin(-50.0, 50.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (;;) {
    const double w = size(rng), h = size(rng);
    const double x = origin(rng), y = origin(rng);
    const auto jig = [&](double base) { return base + 0.2 * unit(rng) * std::min(w, h); };
    RoiQuad q = quad({jig(x), jig(y)}, {jig(x + w), jig(y)}, {jig(x + w), jig(y + h)},
                     {jig(x), jig(y + h)});
    try {
      q.validate();
      return q;
    } catch (const tw::DegenerateQuad&) {
    }
  }
}

}  // namespace

TEST_CASE("unit square to unit target is the identity") {
  const Homography h =
      tw::homography_from_quad(quad({0, 0}, {1, 0}, {1, 1}, {0, 1}), 1.0, 1.0);
  CHECK((h.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("double square to unit target is a pure 0.5 scale") {
  const Homography h =
      tw::homography_from_quad(quad({0, 0}, {2, 0}, {2, 2}, {0, 2}), 1.0, 1.0);
  Eigen::Matrix3d expected = Eigen::Matrix3d::Identity();
  expected(0, 0) = 0.5;
  expected(1, 1) = 0.5;
  CHECK((h.matrix() - expected).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("shifted unit square is a pure translation") {
  const Homography h =
      tw::homography_from_quad(quad({5, 7}, {6, 7}, {6, 8}, {5, 8}), 1.0, 1.0);
  Eigen::Matrix3d expected = Eigen::Matrix3d::Identity();
  expected(0, 2) = -5.0;
  expected(1, 2) = -7.0;
  CHECK((h.matrix() - expected).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("corners land on target corners within 1e-6 px") {
  std::mt19937_64 rng(77001);
  for (int trial = 0; trial < 200; ++trial) {
    const RoiQuad q = random_convex_quad(rng);
    const double w = 400.0, h = 480.0;
    const Homography map = tw::homography_from_quad(q, w, h);
    const Point targets[4] = {{0, 0}, {w, 0}, {w, h}, {0, h}};
    for (int i = 0; i < 4; ++i) {
      const Point mapped = tw::warp_point(map, q.corners[i]);
      CHECK(std::abs(mapped.x - targets[i].x) <= 1e-6);
      CHECK(std::abs(mapped.y - targets[i].y) <= 1e-6);
    }
  }
}

TEST_CASE("warp_point basics") {
  const Homography id = Homography::identity();
  CHECK(tw::warp_point(id, {3, 4}) == Point{3, 4});

  Eigen::Matrix3d scale2 = Eigen::Matrix3d::Identity();
  scale2(0, 0) = 2.0;
  scale2(1, 1) = 2.0;
  CHECK(tw::warp_point(Homography(scale2), {1, 1}) == Point{2, 2});
}

TEST_CASE("inverse round-trips points to 1e-9") {
  std::mt19937_64 rng(77002);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const RoiQuad q = random_convex_quad(rng);
    const Homography h = tw::homography_from_quad(q, 640.0, 480.0);
    const Homography hinv = h.inverse();
    // Interior points of the quad map to finite targets.
    double wsum = 0.0, px = 0.0, py = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double wgt = 0.05 + unit(rng);
      px += wgt * q.corners[i].x;
      py += wgt * q.corners[i].y;
      wsum += wgt;
    }
    const Point p{px / wsum, py / wsum};
    const Point back = tw::warp_point(hinv, tw::warp_point(h, p));
    CHECK(std::abs(back.x - p.x) <= 1e-9);
    CHECK(std::abs(back.y - p.y) <= 1e-9);
  }
}

TEST_CASE("warp_bbox takes the axis-aligned hull") {
  const Homography id = Homography::identity();
  CHECK(tw::warp_bbox(id, BBox{1, 2, 3, 4}) == BBox{1, 2, 3, 4});

  Eigen::Matrix3d scale2 = Eigen::Matrix3d::Identity();
  scale2(0, 0) = 2.0;
  scale2(1, 1) = 2.0;
  CHECK(tw::warp_bbox(Homography(scale2), BBox{1, 1, 2, 2}) == BBox{2, 2, 4, 4});

  // 90 degree counter-clockwise rotation: (x, y) -> (-y, x).
  Eigen::Matrix3d rot;
  rot << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const BBox hull = tw::warp_bbox(Homography(rot), BBox{0, 0, 2, 1});
  CHECK(hull == BBox{-1, 0, 0, 2});
}

TEST_CASE("degenerate quads are rejected") {
  CHECK_THROWS_AS(quad({0, 0}, {1, 0}, {2, 0}, {0, 1}).validate(), tw::DegenerateQuad);
  // Crossed (non-convex) corner order.
  CHECK_THROWS_AS(quad({0, 0}, {1, 1}, {1, 0}, {0, 1}).validate(), tw::DegenerateQuad);
  CHECK_THROWS_AS(tw::homography_from_quad(quad({0, 0}, {1, 0}, {1, 1}, {0, 1}), 0.0, 1.0),
                  tw::DegenerateQuad);
}

TEST_CASE("points on the horizon raise PointAtInfinity") {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(2, 0) = 1.0;  // w = x + 1 vanishes along x = -1
  const Homography h(m);
  CHECK_THROWS_AS(tw::warp_point(h, {-1.0, 5.0}), tw::PointAtInfinity);
  CHECK_THROWS_AS(tw::warp_bbox(h, BBox{-1.0, 0, 0.5, 1}), tw::PointAtInfinity);
}

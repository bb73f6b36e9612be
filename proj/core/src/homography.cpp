#include "tunnelwatch/homography.hpp"

#include <cmath>

#include "tunnelwatch/errors.hpp"

namespace tw {

namespace {

double cross_z(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

void RoiQuad::validate() const {
  // Strict convexity: successive edge cross products share a sign and none
  // are (near) zero, which also rules out three collinear corners.
  double sign = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double z = cross_z(corners[i], corners[(i + 1) % 4], corners[(i + 2) % 4]);
    if (std::abs(z) <= 1e-9) {
      throw DegenerateQuad("roi quad has three (near-)collinear corners");
    }
    if (sign == 0.0) {
      sign = z > 0 ? 1.0 : -1.0;
    } else if (z * sign < 0.0) {
      throw DegenerateQuad("roi quad is not convex");
    }
  }
}

Homography::Homography(const Eigen::Matrix3d& m) : m_(m) {
  if (std::abs(m_(2, 2)) <= 1e-12) {
    throw DegenerateQuad("homography has vanishing normalization entry");
  }
  m_ /= m_(2, 2);
  if (std::abs(m_.determinant()) <= 1e-12) {
    throw DegenerateQuad("homography is singular");
  }
}

Homography Homography::inverse() const {
  return Homography(Eigen::Matrix3d(m_.inverse()));
}

Homography homography_from_quad(const RoiQuad& quad, double target_width, double target_height) {
  quad.validate();
  if (!(target_width > 0.0) || !(target_height > 0.0)) {
    throw DegenerateQuad("target dimensions must be positive");
  }

  const std::array<Point, 4> dst = {Point{0.0, 0.0},
                                    Point{target_width, 0.0},
                                    Point{target_width, target_height},
                                    Point{0.0, target_height}};

  // Direct linear transform on four correspondences: 8 equations in the 8
  // unknowns h00..h21 with h22 fixed to 1.
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 1> rhs;
  for (int i = 0; i < 4; ++i) {
    const double x = quad.corners[i].x;
    const double y = quad.corners[i].y;
    const double u = dst[i].x;
    const double v = dst[i].y;
    a.row(2 * i) << x, y, 1, 0, 0, 0, -x * u, -y * u;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -x * v, -y * v;
    rhs(2 * i) = u;
    rhs(2 * i + 1) = v;
  }

  const Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible()) {
    throw DegenerateQuad("4-point correspondence system is singular");
  }
  const Eigen::Matrix<double, 8, 1> h = lu.solve(rhs);

  Eigen::Matrix3d m;
  m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return Homography(m);
}

Point warp_point(const Homography& h, const Point& p) {
  const Eigen::Vector3d q = h.matrix() * Eigen::Vector3d(p.x, p.y, 1.0);
  if (std::abs(q(2)) <= 1e-12) {
    throw PointAtInfinity("point maps to infinity under homography");
  }
  return Point{q(0) / q(2), q(1) / q(2)};
}

BBox warp_bbox(const Homography& h, const BBox& b) {
  const std::array<Point, 4> corners = {Point{b.x_min, b.y_min},
                                        Point{b.x_max, b.y_min},
                                        Point{b.x_max, b.y_max},
                                        Point{b.x_min, b.y_max}};
  BBox out;
  bool first = true;
  for (const Point& c : corners) {
    const Point w = warp_point(h, c);
    if (first) {
      out = BBox{w.x, w.y, w.x, w.y};
      first = false;
    } else {
      out.x_min = std::min(out.x_min, w.x);
      out.y_min = std::min(out.y_min, w.y);
      out.x_max = std::max(out.x_max, w.x);
      out.y_max = std::max(out.y_max, w.y);
    }
  }
  return out;
}

}  // namespace tw

#pragma once

#include <Eigen/Dense>
#include <array>

#include "tunnelwatch/geometry.hpp"

namespace tw {

/// Region-of-interest quadrilateral in raw CCTV frame coordinates.
/// Corner order: top-left, top-right, bottom-right, bottom-left.
/// Must be strictly convex with no three corners collinear.
struct RoiQuad {
  std::array<Point, 4> corners;

  /// Throws DegenerateQuad if the quad is not strictly convex.
  void validate() const;
};

/// 3x3 projective map, normalized so the bottom-right entry equals 1.
class Homography {
public:
  /// Wraps a matrix, normalizing it. Throws DegenerateQuad if the matrix is
  /// singular (|det| <= 1e-12 after normalization) or h22 is zero.
  explicit Homography(const Eigen::Matrix3d& m);

  static Homography identity() { return Homography(Eigen::Matrix3d::Identity()); }

  const Eigen::Matrix3d& matrix() const { return m_; }
  Homography inverse() const;

private:
  Eigen::Matrix3d m_;
};

/// Exact 4-point perspective map sending the quad corners onto the corners
/// (0,0), (w,0), (w,h), (0,h) of the warped ROI rectangle.
/// Throws DegenerateQuad when the quad (or target size) does not determine
/// a homography.
Homography homography_from_quad(const RoiQuad& quad, double target_width, double target_height);

/// Applies the projective map to a point. Throws PointAtInfinity when the
/// homogeneous w component vanishes (|w| <= 1e-12).
Point warp_point(const Homography& h, const Point& p);

/// Axis-aligned hull of the four warped corners of b.
BBox warp_bbox(const Homography& h, const BBox& b);

}  // namespace tw

#pragma once

#include <algorithm>

namespace tw {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

/// Axis-aligned bounding box in warped-ROI pixel coordinates.
/// Screen convention: y grows downward. Invariant: x_min <= x_max, y_min <= y_max.
struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  bool valid() const { return x_min <= x_max && y_min <= y_max; }

  bool operator==(const BBox&) const = default;
};

/// Intersection area of two boxes; 0 when they do not overlap.
double intersection_area(const BBox& a, const BBox& b);

/// Intersection over Union. Total on valid boxes: returns 0 when the union
/// area is 0 (two degenerate boxes).
double iou(const BBox& a, const BBox& b);

/// Intersection over Line: overlap of the two vertical extents divided by
/// the length of their union interval (hull length when disjoint). Only the
/// y components of the boxes participate. Returns 0 when the union length is 0.
double iol(const BBox& a, const BBox& b);

/// Intersection of a box with a rectangle [0,w]x[0,h]; the result may be
/// empty (zero area) when the box lies outside.
BBox clip_to_rect(const BBox& b, double w, double h);

}  // namespace tw

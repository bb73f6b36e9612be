#include "tunnelwatch/geometry.hpp"

namespace tw {

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double iol(const BBox& a, const BBox& b) {
  const double overlap = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  // Union length of disjoint spans is the hull length so the ratio stays in [0,1].
  const double hull = std::max(a.y_max, b.y_max) - std::min(a.y_min, b.y_min);
  if (hull <= 0.0) return 0.0;
  return std::max(overlap, 0.0) / hull;
}

BBox clip_to_rect(const BBox& b, double w, double h) {
  BBox out;
  out.x_min = std::clamp(b.x_min, 0.0, w);
  out.y_min = std::clamp(b.y_min, 0.0, h);
  out.x_max = std::clamp(b.x_max, 0.0, w);
  out.y_max = std::clamp(b.y_max, 0.0, h);
  return out;
}

}  // namespace tw

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelwatch/geometry.hpp"

namespace tw {

/// Closed set of detector classes. NoFire is a distractor class (tunnel
/// lights, tail lights) that suppresses fire false alarms and never produces
/// events of its own.
enum class ObjectClass : std::uint8_t { Car, Person, Fire, NoFire };

std::string_view to_string(ObjectClass c);
std::optional<ObjectClass> object_class_from_string(std::string_view s);

/// One classified box with confidence, in warped-ROI coordinates.
struct Detection {
  BBox bbox;
  ObjectClass cls = ObjectClass::Car;
  double score = 0.0;

  bool operator==(const Detection&) const = default;
};

/// All boxes observed at one sampled frame. t is derived as frame / fps.
struct FrameDetections {
  std::uint64_t frame = 0;
  double t = 0.0;
  std::vector<Detection> detections;

  bool operator==(const FrameDetections&) const = default;
};

}  // namespace tw

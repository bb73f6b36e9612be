#include "tunnelwatch/stream.hpp"

#include <json.hpp>

namespace tw {

using Json = nlohmann::ordered_json;

std::string_view to_string(CoordinateSpace s) {
  return s == CoordinateSpace::Raw ? "Raw" : "Warped";
}

std::optional<CoordinateSpace> coordinate_space_from_string(std::string_view s) {
  if (s == "Raw") return CoordinateSpace::Raw;
  if (s == "Warped") return CoordinateSpace::Warped;
  return std::nullopt;
}

void StreamConfig::validate() const {
  if (!(fps > 0.0)) throw ConfigError("stream.fps must be > 0");
  if (frame_interval < 1) throw ConfigError("stream.frame_interval must be >= 1");
  if (roi) {
    roi->quad.validate();
    if (!(roi->target_width > 0.0) || !(roi->target_height > 0.0)) {
      throw ConfigError("stream.roi.target dimensions must be > 0");
    }
  }
}

namespace {

void require_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                  std::uint64_t line, std::string_view what) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(line, std::string(what) + " has unknown key '" + key + "'");
    }
  }
}

BBox parse_bbox(const Json& arr, std::uint64_t line) {
  if (!arr.is_array() || arr.size() != 4) {
    throw ParseError(line, "bbox must be an array of 4 numbers");
  }
  for (const auto& v : arr) {
    if (!v.is_number()) throw ParseError(line, "bbox must be an array of 4 numbers");
  }
  const BBox b{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
               arr[3].get<double>()};
  if (b.x_max < b.x_min) throw ParseError(line, "bbox has x_max < x_min");
  if (b.y_max < b.y_min) throw ParseError(line, "bbox has y_max < y_min");
  return b;
}

Detection parse_detection(const Json& obj, std::uint64_t line) {
  if (!obj.is_object()) throw ParseError(line, "detection must be an object");
  require_keys(obj, {"class", "score", "bbox"}, line, "detection");
  if (!obj.contains("class") || !obj["class"].is_string()) {
    throw ParseError(line, "detection needs a string 'class'");
  }
  if (!obj.contains("score") || !obj["score"].is_number()) {
    throw ParseError(line, "detection needs a numeric 'score'");
  }
  if (!obj.contains("bbox")) throw ParseError(line, "detection needs 'bbox'");

  Detection d;
  const std::string cls = obj["class"].get<std::string>();
  const auto parsed = object_class_from_string(cls);
  if (!parsed) throw ParseError(line, "unknown class '" + cls + "'");
  d.cls = *parsed;
  d.score = obj["score"].get<double>();
  if (!(d.score >= 0.0 && d.score <= 1.0)) {
    throw ParseError(line, "score must be in [0,1]");
  }
  d.bbox = parse_bbox(obj["bbox"], line);
  return d;
}

}  // namespace

FrameDetections parse_frame_line(const std::string& text, std::uint64_t line, double fps) {
  Json obj;
  try {
    obj = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line, "frame record must be an object");
  require_keys(obj, {"frame", "detections"}, line, "frame record");
  if (!obj.contains("frame") || !obj["frame"].is_number_unsigned()) {
    throw ParseError(line, "frame record needs an unsigned integer 'frame'");
  }
  if (!obj.contains("detections") || !obj["detections"].is_array()) {
    throw ParseError(line, "frame record needs a 'detections' array");
  }

  FrameDetections f;
  f.frame = obj["frame"].get<std::uint64_t>();
  f.t = static_cast<double>(f.frame) / fps;
  f.detections.reserve(obj["detections"].size());
  for (const auto& det : obj["detections"]) {
    f.detections.push_back(parse_detection(det, line));
  }
  return f;
}

std::optional<FrameDetections> DetectionStreamReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.empty()) continue;
    FrameDetections f = parse_frame_line(text, line_, fps_);
    if (last_frame_ && f.frame <= *last_frame_) {
      throw NonMonotonicFrame("line " + std::to_string(line_) +
                              ": frame indices must be strictly increasing");
    }
    last_frame_ = f.frame;
    return f;
  }
  return std::nullopt;
}

std::vector<FrameDetections> read_detection_stream(std::istream& in, double fps) {
  DetectionStreamReader reader(in, fps);
  std::vector<FrameDetections> frames;
  while (auto f = reader.next()) frames.push_back(std::move(*f));
  return frames;
}

std::string frame_to_json_line(const FrameDetections& f) {
  Json obj;
  obj["frame"] = f.frame;
  Json dets = Json::array();
  for (const Detection& d : f.detections) {
    Json det;
    det["class"] = std::string(to_string(d.cls));
    det["score"] = d.score;
    det["bbox"] = {d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max};
    dets.push_back(std::move(det));
  }
  obj["detections"] = std::move(dets);
  return obj.dump();
}

void write_detection_stream(std::ostream& out, const std::vector<FrameDetections>& frames) {
  for (const FrameDetections& f : frames) {
    out << frame_to_json_line(f) << '\n';
  }
}

bool keep_frame(std::uint64_t frame, int interval) {
  if (interval < 1) throw InvalidInterval("frame interval must be >= 1");
  return frame % static_cast<std::uint64_t>(interval) == 0;
}

std::vector<FrameDetections> sample_frames(const std::vector<FrameDetections>& frames,
                                           int interval) {
  std::vector<FrameDetections> out;
  for (const FrameDetections& f : frames) {
    if (keep_frame(f.frame, interval)) out.push_back(f);
  }
  return out;
}

FrameDetections apply_roi(const FrameDetections& frame, const Homography& h, double target_width,
                          double target_height) {
  FrameDetections out;
  out.frame = frame.frame;
  out.t = frame.t;
  for (const Detection& d : frame.detections) {
    const BBox warped = warp_bbox(h, d.bbox);
    const BBox clipped = clip_to_rect(warped, target_width, target_height);
    if (clipped.width() <= 0.0 || clipped.height() <= 0.0) continue;  // fully outside
    Detection kept = d;
    kept.bbox = clipped;
    out.detections.push_back(kept);
  }
  return out;
}

FrameDetections apply_roi(const FrameDetections& frame, const RoiSpec& roi) {
  const Homography h = homography_from_quad(roi.quad, roi.target_width, roi.target_height);
  return apply_roi(frame, h, roi.target_width, roi.target_height);
}

}  // namespace tw

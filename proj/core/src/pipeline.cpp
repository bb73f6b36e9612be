#include "tunnelwatch/pipeline.hpp"

#include <cmath>
#include <exception>
#include <thread>

#include <json.hpp>

#include "tunnelwatch/errors.hpp"

namespace tw {

using Json = nlohmann::ordered_json;

namespace {
constexpr double kTimeEps = 1e-9;
}

void PipelineConfig::validate() const {
  stream.validate();
  tracker.validate();
  cada.validate();
}

Pipeline::Pipeline(PipelineConfig cfg, EventSink event_sink, TrackSink track_sink)
    : cfg_(std::move(cfg)),
      tracker_([&] {
        cfg_.validate();
        // CADA needs the sample one cycle back; make sure histories cover it.
        TrackerConfig tc = cfg_.tracker;
        tc.history_retention = std::max(tc.history_retention, cfg_.cada.cycle_period + 1.0);
        return tc;
      }()),
      presence_(cfg_.cada),
      registry_(cfg_.cada),
      event_sink_(std::move(event_sink)),
      track_sink_(std::move(track_sink)) {
  if (cfg_.stream.coordinate_space == CoordinateSpace::Raw) {
    if (!cfg_.stream.roi) {
      throw ConfigError("stream.roi is required when coordinate_space is Raw");
    }
    roi_map_ = homography_from_quad(cfg_.stream.roi->quad, cfg_.stream.roi->target_width,
                                    cfg_.stream.roi->target_height);
  }
}

void Pipeline::emit(const Event& e) {
  events_.push_back(e);
  if (event_sink_) event_sink_(e);
}

void Pipeline::process(const FrameDetections& frame) {
  stats_.frames_ingested += 1;
  if (!keep_frame(frame.frame, cfg_.stream.frame_interval)) return;

  FrameDetections working = frame;
  if (roi_map_) {
    working = apply_roi(frame, *roi_map_, cfg_.stream.roi->target_width,
                        cfg_.stream.roi->target_height);
  }
  stats_.frames_processed += 1;
  stats_.detections_processed += working.detections.size();

  tracker_.step(working);

  // Cycle boundaries crossed by this frame fire first so the log stays
  // ordered by t (boundary times never exceed the frame time).
  const double cycle = cfg_.cada.cycle_period;
  while (static_cast<double>(next_cycle_) * cycle <= working.t + kTimeEps) {
    const double now = static_cast<double>(next_cycle_) * cycle;
    const auto candidates =
        evaluate_cada_cycle(tracker_.tracks(), cfg_.cada, now, cfg_.stream.sample_period());
    for (const Event& e : registry_.update_cycle(candidates)) emit(e);
    stats_.cycles_evaluated += 1;
    next_cycle_ += 1;
  }

  for (const Event& e : registry_.update_frame(presence_.observe(working))) emit(e);

  if (track_sink_) track_sink_(working, tracker_.tracks());
}

std::vector<Event> run_pipeline(const PipelineConfig& cfg,
                                const std::vector<FrameDetections>& frames, EventSink event_sink,
                                TrackSink track_sink, PipelineStats* stats) {
  Pipeline p(cfg, std::move(event_sink), std::move(track_sink));
  for (const FrameDetections& f : frames) p.process(f);
  if (stats) *stats = p.stats();
  return p.events();
}

std::vector<Event> run_pipeline_stream(const PipelineConfig& cfg, std::istream& in,
                                       EventSink event_sink, TrackSink track_sink,
                                       PipelineStats* stats) {
  Pipeline p(cfg, std::move(event_sink), std::move(track_sink));

  BoundedQueue<FrameDetections> queue(cfg.stream.queue_capacity);
  std::exception_ptr reader_error;
  std::thread reader([&] {
    try {
      DetectionStreamReader r(in, cfg.stream.fps);
      while (auto f = r.next()) queue.push(std::move(*f));
    } catch (...) {
      reader_error = std::current_exception();
    }
    queue.close();
  });

  try {
    while (auto f = queue.pop()) p.process(*f);
  } catch (...) {
    queue.close();
    reader.join();
    throw;
  }
  reader.join();
  if (reader_error) std::rethrow_exception(reader_error);

  if (stats) *stats = p.stats();
  return p.events();
}

namespace {

void check_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view path) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown config key '" + std::string(path) + "." + key + "'");
    }
  }
}

double get_number(const Json& obj, std::string_view key, double fallback, std::string_view path) {
  const std::string k(key);
  if (!obj.contains(k)) return fallback;
  if (!obj[k].is_number()) {
    throw ConfigError("config field '" + std::string(path) + "." + k + "' must be a number");
  }
  return obj[k].get<double>();
}

int get_int(const Json& obj, std::string_view key, int fallback, std::string_view path) {
  const std::string k(key);
  if (!obj.contains(k)) return fallback;
  if (!obj[k].is_number_integer()) {
    throw ConfigError("config field '" + std::string(path) + "." + k + "' must be an integer");
  }
  return obj[k].get<int>();
}

StreamConfig parse_stream_config(const Json& obj) {
  StreamConfig sc;
  check_keys(obj, {"fps", "frame_interval", "coordinate_space", "roi", "queue_capacity"},
             "stream");
  sc.fps = get_number(obj, "fps", sc.fps, "stream");
  sc.frame_interval = get_int(obj, "frame_interval", sc.frame_interval, "stream");
  if (obj.contains("coordinate_space")) {
    const auto space = coordinate_space_from_string(obj["coordinate_space"].get<std::string>());
    if (!space) throw ConfigError("stream.coordinate_space must be 'Raw' or 'Warped'");
    sc.coordinate_space = *space;
  }
  if (obj.contains("queue_capacity")) {
    sc.queue_capacity = obj["queue_capacity"].get<std::size_t>();
  }
  if (obj.contains("roi") && !obj["roi"].is_null()) {
    const Json& roi = obj["roi"];
    check_keys(roi, {"quad", "target"}, "stream.roi");
    if (!roi.contains("quad") || !roi["quad"].is_array() || roi["quad"].size() != 4) {
      throw ConfigError("stream.roi.quad must be 4 [x,y] corners");
    }
    RoiSpec spec;
    for (int i = 0; i < 4; ++i) {
      const Json& c = roi["quad"][i];
      if (!c.is_array() || c.size() != 2) {
        throw ConfigError("stream.roi.quad must be 4 [x,y] corners");
      }
      spec.quad.corners[i] = Point{c[0].get<double>(), c[1].get<double>()};
    }
    if (!roi.contains("target") || !roi["target"].is_array() || roi["target"].size() != 2) {
      throw ConfigError("stream.roi.target must be [width, height]");
    }
    spec.target_width = roi["target"][0].get<double>();
    spec.target_height = roi["target"][1].get<double>();
    sc.roi = spec;
  }
  return sc;
}

TrackerConfig parse_tracker_config(const Json& obj) {
  TrackerConfig tc;
  check_keys(obj, {"iou_gate", "max_coast", "tracked_classes", "history_retention", "kalman"},
             "tracker");
  tc.iou_gate = get_number(obj, "iou_gate", tc.iou_gate, "tracker");
  tc.max_coast = get_int(obj, "max_coast", tc.max_coast, "tracker");
  tc.history_retention = get_number(obj, "history_retention", tc.history_retention, "tracker");
  if (obj.contains("tracked_classes")) {
    if (!obj["tracked_classes"].is_array()) {
      throw ConfigError("tracker.tracked_classes must be an array of class names");
    }
    tc.tracked_classes.clear();
    for (const auto& c : obj["tracked_classes"]) {
      const auto cls = object_class_from_string(c.get<std::string>());
      if (!cls) throw ConfigError("tracker.tracked_classes has unknown class");
      tc.tracked_classes.insert(*cls);
    }
  }
  if (obj.contains("kalman")) {
    const Json& k = obj["kalman"];
    check_keys(k, {"p0_diag", "q_diag", "r_diag"}, "tracker.kalman");
    const auto load_diag = [&](std::string_view key, auto& target, std::size_t n) {
      const std::string kk(key);
      if (!k.contains(kk)) return;
      if (!k[kk].is_array() || k[kk].size() != n) {
        throw ConfigError("tracker.kalman." + kk + " must be an array of " + std::to_string(n));
      }
      for (std::size_t i = 0; i < n; ++i) target(static_cast<int>(i)) = k[kk][i].get<double>();
    };
    load_diag("p0_diag", tc.kalman.p0_diag, 7);
    load_diag("q_diag", tc.kalman.q_diag, 7);
    load_diag("r_diag", tc.kalman.r_diag, 4);
  }
  return tc;
}

CadaConfig parse_cada_config(const Json& obj) {
  CadaConfig cc;
  check_keys(obj,
             {"cycle_period", "stop_iou", "wwd_iol", "traffic_direction", "min_score",
              "presence_persistence", "direction_epsilon", "sample_tolerance"},
             "cada");
  cc.cycle_period = get_number(obj, "cycle_period", cc.cycle_period, "cada");
  cc.stop_iou = get_number(obj, "stop_iou", cc.stop_iou, "cada");
  cc.wwd_iol = get_number(obj, "wwd_iol", cc.wwd_iol, "cada");
  cc.min_score = get_number(obj, "min_score", cc.min_score, "cada");
  cc.presence_persistence =
      get_int(obj, "presence_persistence", cc.presence_persistence, "cada");
  cc.direction_epsilon = get_number(obj, "direction_epsilon", cc.direction_epsilon, "cada");
  if (obj.contains("traffic_direction")) {
    const auto dir = traffic_direction_from_string(obj["traffic_direction"].get<std::string>());
    if (!dir) {
      throw ConfigError("cada.traffic_direction must be 'Increasing_Y' or 'Decreasing_Y'");
    }
    cc.traffic_direction = *dir;
  }
  if (obj.contains("sample_tolerance") && !obj["sample_tolerance"].is_null()) {
    cc.sample_tolerance = obj["sample_tolerance"].get<double>();
  }
  return cc;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config document must be an object");
  check_keys(doc, {"stream", "tracker", "cada"}, "config");

  PipelineConfig cfg;
  if (doc.contains("stream")) cfg.stream = parse_stream_config(doc["stream"]);
  if (doc.contains("tracker")) cfg.tracker = parse_tracker_config(doc["tracker"]);
  if (doc.contains("cada")) cfg.cada = parse_cada_config(doc["cada"]);
  cfg.validate();
  return cfg;
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  Json doc;
  Json stream;
  stream["fps"] = cfg.stream.fps;
  stream["frame_interval"] = cfg.stream.frame_interval;
  stream["coordinate_space"] = std::string(to_string(cfg.stream.coordinate_space));
  if (cfg.stream.roi) {
    Json roi;
    Json quad = Json::array();
    for (const Point& p : cfg.stream.roi->quad.corners) quad.push_back({p.x, p.y});
    roi["quad"] = std::move(quad);
    roi["target"] = {cfg.stream.roi->target_width, cfg.stream.roi->target_height};
    stream["roi"] = std::move(roi);
  }
  stream["queue_capacity"] = cfg.stream.queue_capacity;
  doc["stream"] = std::move(stream);

  Json tracker;
  tracker["iou_gate"] = cfg.tracker.iou_gate;
  tracker["max_coast"] = cfg.tracker.max_coast;
  Json classes = Json::array();
  for (const ObjectClass c : cfg.tracker.tracked_classes) {
    classes.push_back(std::string(to_string(c)));
  }
  tracker["tracked_classes"] = std::move(classes);
  tracker["history_retention"] = cfg.tracker.history_retention;
  Json kalman;
  const auto dump_diag = [](const auto& v, int n) {
    Json arr = Json::array();
    for (int i = 0; i < n; ++i) arr.push_back(v(i));
    return arr;
  };
  kalman["p0_diag"] = dump_diag(cfg.tracker.kalman.p0_diag, 7);
  kalman["q_diag"] = dump_diag(cfg.tracker.kalman.q_diag, 7);
  kalman["r_diag"] = dump_diag(cfg.tracker.kalman.r_diag, 4);
  tracker["kalman"] = std::move(kalman);
  doc["tracker"] = std::move(tracker);

  Json cada;
  cada["cycle_period"] = cfg.cada.cycle_period;
  cada["stop_iou"] = cfg.cada.stop_iou;
  cada["wwd_iol"] = cfg.cada.wwd_iol;
  cada["traffic_direction"] = std::string(to_string(cfg.cada.traffic_direction));
  cada["min_score"] = cfg.cada.min_score;
  cada["presence_persistence"] = cfg.cada.presence_persistence;
  cada["direction_epsilon"] = cfg.cada.direction_epsilon;
  if (cfg.cada.sample_tolerance) {
    cada["sample_tolerance"] = *cfg.cada.sample_tolerance;
  } else {
    cada["sample_tolerance"] = nullptr;
  }
  doc["cada"] = std::move(cada);
  return doc.dump(2);
}

std::string apply_config_override(const std::string& config_json, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects key.path=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw_value = assignment.substr(eq + 1);

  Json value;
  try {
    value = Json::parse(raw_value);
  } catch (const nlohmann::json::parse_error&) {
    value = raw_value;  // unquoted strings are taken verbatim
  }

  Json doc;
  try {
    doc = config_json.empty() ? Json::object() : Json::parse(config_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("--set has an empty path segment in '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = Json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
  return doc.dump();
}

}  // namespace tw

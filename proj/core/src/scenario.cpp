#include "tunnelwatch/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "tunnelwatch/errors.hpp"

namespace tw {

using Json = nlohmann::ordered_json;

namespace {
constexpr double kTimeEps = 1e-9;
}

double SimRng::normal(double sigma) {
  const double u1 = std::max(uniform01(), 0x1.0p-53);
  const double u2 = uniform01();
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int SimRng::poisson(double lambda) {
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01();
  } while (p > limit);
  return k - 1;
}

std::size_t SimRng::index(std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  return std::min(i, n - 1);
}

namespace {

double default_enter_y(const Scenario& sc, const ActorScript& a) {
  const double half_h = 0.5 * a.box_size.second;
  if (a.speed > 0.0) return half_h;
  if (a.speed < 0.0) return sc.roi_height - half_h;
  return 0.5 * sc.roi_height;
}

[[noreturn]] void reject(std::size_t actor_index, const std::string& why) {
  throw InvalidScenario("actor " + std::to_string(actor_index + 1) + ": " + why);
}

}  // namespace

Point actor_position(const Scenario& sc, const ActorScript& actor, double t) {
  if (actor.static_at) return *actor.static_at;

  double moving_time = t - actor.enter_t;
  if (actor.stop_window) {
    moving_time = (std::min(t, actor.stop_window->start) - actor.enter_t) +
                  std::max(0.0, t - actor.stop_window->end);
  }
  const double y0 = actor.enter_y ? *actor.enter_y : default_enter_y(sc, actor);
  return Point{sc.lanes.at(static_cast<std::size_t>(actor.lane)), y0 + actor.speed * moving_time};
}

void validate_scenario(const Scenario& sc) {
  if (!(sc.duration > 0.0)) throw InvalidScenario("duration must be > 0");
  if (!(sc.fps > 0.0)) throw InvalidScenario("fps must be > 0");
  if (!(sc.roi_width > 0.0) || !(sc.roi_height > 0.0)) {
    throw InvalidScenario("roi_dims must be positive");
  }
  if (sc.rng != kSimRngId) {
    throw InvalidScenario("unsupported rng '" + sc.rng + "', expected '" +
                          std::string(kSimRngId) + "'");
  }

  const NoiseModel& nm = sc.noise;
  if (!(nm.jitter_sigma >= 0.0)) throw InvalidScenario("noise.jitter_sigma must be >= 0");
  if (!(nm.miss_prob >= 0.0 && nm.miss_prob <= 1.0)) {
    throw InvalidScenario("noise.miss_prob must be in [0,1]");
  }
  if (!(nm.false_positive_rate >= 0.0)) {
    throw InvalidScenario("noise.false_positive_rate must be >= 0");
  }
  if (!(nm.score_range.first >= 0.0 && nm.score_range.first <= nm.score_range.second &&
        nm.score_range.second <= 1.0)) {
    throw InvalidScenario("noise.score_range must be an ascending interval within [0,1]");
  }
  if (nm.false_positive_rate > 0.0 && nm.fp_classes.empty()) {
    throw InvalidScenario("noise.fp_classes must be non-empty when false positives are enabled");
  }

  for (std::size_t i = 0; i < sc.actors.size(); ++i) {
    const ActorScript& a = sc.actors[i];
    if (!(a.box_size.first > 0.0 && a.box_size.second > 0.0)) reject(i, "box_size must be positive");
    if (!(a.enter_t < a.exit_t)) reject(i, "enter_t must be before exit_t");
    if (a.enter_t < 0.0 || a.exit_t > sc.duration + kTimeEps) {
      reject(i, "actor times must lie within [0, duration]");
    }
    if (a.stop_window) {
      if (!(a.stop_window->start < a.stop_window->end)) {
        reject(i, "stop_window must be a non-empty interval");
      }
      if (a.stop_window->start < a.enter_t - kTimeEps ||
          a.stop_window->end > a.exit_t + kTimeEps) {
        reject(i, "stop_window must lie within [enter_t, exit_t]");
      }
    }

    const double half_w = 0.5 * a.box_size.first;
    const double half_h = 0.5 * a.box_size.second;

    if (a.static_at) {
      if (a.wrong_way) reject(i, "a static actor cannot be wrong_way");
      if (a.static_at->x < half_w || a.static_at->x > sc.roi_width - half_w ||
          a.static_at->y < half_h || a.static_at->y > sc.roi_height - half_h) {
        reject(i, "static_at box leaves the ROI");
      }
      continue;
    }

    if (sc.lanes.empty()) reject(i, "scenario has no lanes for a lane-based actor");
    if (a.lane < 0 || static_cast<std::size_t>(a.lane) >= sc.lanes.size()) {
      reject(i, "lane index out of range");
    }
    const double x = sc.lanes[static_cast<std::size_t>(a.lane)];
    if (x < half_w || x > sc.roi_width - half_w) reject(i, "lane center leaves the ROI");

    // The path is piecewise linear in t, so checking segment endpoints bounds it.
    std::vector<double> knots = {a.enter_t, a.exit_t};
    if (a.stop_window) {
      knots.push_back(a.stop_window->start);
      knots.push_back(a.stop_window->end);
    }
    for (const double t : knots) {
      const double y = actor_position(sc, a, std::clamp(t, a.enter_t, a.exit_t)).y;
      if (y < half_h - 1e-6 || y > sc.roi_height - half_h + 1e-6) {
        reject(i, "scripted path leaves the ROI");
      }
    }

    const bool counter_flow = sc.traffic_direction == TrafficDirection::IncreasingY
                                  ? a.speed < 0.0
                                  : a.speed > 0.0;
    if (a.cls == ObjectClass::Car && a.speed != 0.0 && counter_flow != a.wrong_way) {
      reject(i, a.wrong_way ? "wrong_way actor moves with the traffic direction"
                            : "counter-flow actor must be flagged wrong_way");
    }
    if (a.wrong_way && (a.cls != ObjectClass::Car || a.speed == 0.0)) {
      reject(i, "wrong_way requires a moving Car");
    }
  }
}

std::optional<Detection> apply_noise(const Detection& det, const NoiseModel& model, SimRng& rng) {
  Detection out = det;
  if (model.jitter_sigma > 0.0) {
    out.bbox.x_min += rng.normal(model.jitter_sigma);
    out.bbox.y_min += rng.normal(model.jitter_sigma);
    out.bbox.x_max += rng.normal(model.jitter_sigma);
    out.bbox.y_max += rng.normal(model.jitter_sigma);
    if (out.bbox.x_min > out.bbox.x_max) std::swap(out.bbox.x_min, out.bbox.x_max);
    if (out.bbox.y_min > out.bbox.y_max) std::swap(out.bbox.y_min, out.bbox.y_max);
  }
  bool dropped = false;
  if (model.miss_prob > 0.0) dropped = rng.uniform01() < model.miss_prob;
  out.score = rng.uniform(model.score_range.first, model.score_range.second);
  if (dropped) return std::nullopt;
  return out;
}

GroundTruth ground_truth_of(const Scenario& sc) {
  GroundTruth gt;
  for (std::size_t i = 0; i < sc.actors.size(); ++i) {
    const ActorScript& a = sc.actors[i];
    const auto idx = static_cast<std::uint32_t>(i + 1);
    if (a.cls == ObjectClass::Car && a.stop_window) {
      gt.entries.push_back({EventKind::Stop, a.stop_window->start, idx});
    }
    if (a.cls == ObjectClass::Car && a.wrong_way) {
      gt.entries.push_back({EventKind::WWD, a.enter_t, idx});
    }
    if (a.cls == ObjectClass::Fire) gt.entries.push_back({EventKind::Fire, a.enter_t, idx});
    if (a.cls == ObjectClass::Person) gt.entries.push_back({EventKind::Person, a.enter_t, idx});
  }
  std::sort(gt.entries.begin(), gt.entries.end(), [](const auto& x, const auto& y) {
    if (x.t != y.t) return x.t < y.t;
    if (x.kind != y.kind) return x.kind < y.kind;
    return x.actor < y.actor;
  });
  return gt;
}

std::pair<std::vector<FrameDetections>, GroundTruth> generate_stream(const Scenario& sc) {
  validate_scenario(sc);
  SimRng rng(sc.seed);

  const auto n_frames = static_cast<std::uint64_t>(std::floor(sc.duration * sc.fps + kTimeEps));
  std::vector<FrameDetections> frames;
  frames.reserve(n_frames);

  for (std::uint64_t f = 0; f < n_frames; ++f) {
    FrameDetections fd;
    fd.frame = f;
    fd.t = static_cast<double>(f) / sc.fps;

    for (const ActorScript& a : sc.actors) {
      if (fd.t < a.enter_t - kTimeEps || fd.t > a.exit_t + kTimeEps) continue;
      const Point c = actor_position(sc, a, fd.t);
      Detection det;
      det.cls = a.cls;
      det.bbox = BBox{c.x - 0.5 * a.box_size.first, c.y - 0.5 * a.box_size.second,
                      c.x + 0.5 * a.box_size.first, c.y + 0.5 * a.box_size.second};
      if (auto noisy = apply_noise(det, sc.noise, rng)) {
        fd.detections.push_back(std::move(*noisy));
      }
    }

    if (sc.noise.false_positive_rate > 0.0) {
      const int spurious = rng.poisson(sc.noise.false_positive_rate);
      for (int s = 0; s < spurious; ++s) {
        Detection det;
        det.cls = sc.noise.fp_classes[rng.index(sc.noise.fp_classes.size())];
        const double w = rng.uniform(8.0, 60.0);
        const double h = rng.uniform(8.0, 60.0);
        const double cx = rng.uniform(0.5 * w, sc.roi_width - 0.5 * w);
        const double cy = rng.uniform(0.5 * h, sc.roi_height - 0.5 * h);
        det.bbox = BBox{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
        det.score = rng.uniform(sc.noise.score_range.first, sc.noise.score_range.second);
        fd.detections.push_back(std::move(det));
      }
    }

    frames.push_back(std::move(fd));
  }

  return {std::move(frames), ground_truth_of(sc)};
}

namespace {

Scenario make_base(std::string name, double duration) {
  Scenario sc;
  sc.name = std::move(name);
  sc.duration = duration;
  sc.fps = 30.0;
  sc.roi_width = 400.0;
  sc.roi_height = 480.0;
  sc.lanes = {100.0, 200.0, 300.0};
  sc.traffic_direction = TrafficDirection::IncreasingY;
  sc.seed = 42;
  return sc;
}

ActorScript passing_car(double enter_t, int lane) {
  ActorScript a;
  a.cls = ObjectClass::Car;
  a.enter_t = enter_t;
  a.exit_t = enter_t + 7.4;  // 60 px/s traverses the 450 px usable span
  a.lane = lane;
  a.speed = 60.0;
  a.box_size = {36.0, 30.0};
  return a;
}

Scenario make_stop() {
  Scenario sc = make_base("stop", 126.0);
  ActorScript stopper;
  stopper.cls = ObjectClass::Car;
  stopper.enter_t = 0.0;
  stopper.exit_t = 126.0;
  stopper.lane = 1;
  stopper.speed = 40.0;
  stopper.stop_window = StopWindow{5.0, 126.0};
  stopper.box_size = {36.0, 30.0};
  sc.actors = {stopper, passing_car(2.0, 0), passing_car(20.0, 2), passing_car(60.0, 0)};
  return sc;
}

Scenario make_wwd() {
  Scenario sc = make_base("wwd", 29.0);
  ActorScript ghost;
  ghost.cls = ObjectClass::Car;
  ghost.enter_t = 4.0;
  ghost.exit_t = 9.4;
  ghost.lane = 1;
  ghost.speed = -70.0;
  ghost.box_size = {36.0, 30.0};
  ghost.wrong_way = true;
  sc.actors = {ghost, passing_car(0.5, 0), passing_car(12.0, 2)};
  return sc;
}

ActorScript static_actor(ObjectClass cls, Point at, std::pair<double, double> size,
                         double enter_t, double exit_t) {
  ActorScript a;
  a.cls = cls;
  a.enter_t = enter_t;
  a.exit_t = exit_t;
  a.static_at = at;
  a.box_size = size;
  return a;
}

Scenario make_fire() {
  Scenario sc = make_base("fire", 64.0);
  sc.actors = {static_actor(ObjectClass::Fire, {320.0, 120.0}, {24.0, 24.0}, 29.0, 64.0),
               passing_car(1.0, 0), passing_car(30.0, 1),
               static_actor(ObjectClass::NoFire, {50.0, 40.0}, {16.0, 12.0}, 0.0, 64.0),
               static_actor(ObjectClass::NoFire, {350.0, 440.0}, {16.0, 12.0}, 0.0, 64.0)};
  sc.noise.jitter_sigma = 0.5;
  return sc;
}

Scenario make_person() {
  Scenario sc = make_base("person", 72.0);
  sc.actors = {static_actor(ObjectClass::Person, {240.0, 300.0}, {18.0, 40.0}, 50.0, 72.0),
               passing_car(2.0, 0), passing_car(25.0, 2), passing_car(55.0, 1)};
  sc.noise.jitter_sigma = 0.5;
  return sc;
}

Scenario make_nominal() {
  Scenario sc = make_base("nominal", 120.0);
  for (int k = 0; k < 12; ++k) {
    sc.actors.push_back(passing_car(1.0 + 9.5 * k, k % 3));
  }
  sc.noise.jitter_sigma = 1.0;
  sc.noise.miss_prob = 0.05;
  return sc;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"stop", "wwd", "fire", "person", "nominal"};
}

std::optional<Scenario> builtin_scenario(std::string_view name) {
  if (name == "stop") return make_stop();
  if (name == "wwd") return make_wwd();
  if (name == "fire") return make_fire();
  if (name == "person") return make_person();
  if (name == "nominal") return make_nominal();
  return std::nullopt;
}

namespace {

Json point_json(const Point& p) { return Json::array({p.x, p.y}); }

void check_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view what) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidScenario(std::string(what) + " has unknown key '" + key + "'");
    }
  }
}

double number_field(const Json& obj, std::string_view key, std::string_view what) {
  const std::string k(key);
  if (!obj.contains(k) || !obj[k].is_number()) {
    throw InvalidScenario(std::string(what) + " needs numeric '" + k + "'");
  }
  return obj[k].get<double>();
}

}  // namespace

std::string scenario_to_json(const Scenario& sc) {
  Json doc;
  if (!sc.name.empty()) doc["name"] = sc.name;
  doc["duration"] = sc.duration;
  doc["fps"] = sc.fps;
  doc["roi_dims"] = {sc.roi_width, sc.roi_height};
  doc["lanes"] = sc.lanes;
  doc["traffic_direction"] = std::string(to_string(sc.traffic_direction));
  Json actors = Json::array();
  for (const ActorScript& a : sc.actors) {
    Json obj;
    obj["class"] = std::string(to_string(a.cls));
    obj["enter_t"] = a.enter_t;
    obj["exit_t"] = a.exit_t;
    if (!a.static_at) {
      obj["lane"] = a.lane;
      obj["speed"] = a.speed;
    }
    if (a.stop_window) obj["stop_window"] = {a.stop_window->start, a.stop_window->end};
    obj["box_size"] = {a.box_size.first, a.box_size.second};
    if (a.static_at) obj["static_at"] = point_json(*a.static_at);
    if (a.enter_y) obj["enter_y"] = *a.enter_y;
    if (a.wrong_way) obj["wrong_way"] = true;
    actors.push_back(std::move(obj));
  }
  doc["actors"] = std::move(actors);
  Json noise;
  noise["jitter_sigma"] = sc.noise.jitter_sigma;
  noise["miss_prob"] = sc.noise.miss_prob;
  noise["false_positive_rate"] = sc.noise.false_positive_rate;
  noise["score_range"] = {sc.noise.score_range.first, sc.noise.score_range.second};
  Json fp_classes = Json::array();
  for (const ObjectClass c : sc.noise.fp_classes) fp_classes.push_back(std::string(to_string(c)));
  noise["fp_classes"] = std::move(fp_classes);
  doc["noise"] = std::move(noise);
  doc["seed"] = sc.seed;
  doc["rng"] = sc.rng;
  return doc.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidScenario(std::string("invalid scenario JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidScenario("scenario document must be an object");
  check_keys(doc,
             {"name", "duration", "fps", "roi_dims", "lanes", "traffic_direction", "actors",
              "noise", "seed", "rng"},
             "scenario");

  Scenario sc;
  if (doc.contains("name")) sc.name = doc["name"].get<std::string>();
  sc.duration = number_field(doc, "duration", "scenario");
  sc.fps = number_field(doc, "fps", "scenario");
  if (!doc.contains("roi_dims") || !doc["roi_dims"].is_array() || doc["roi_dims"].size() != 2) {
    throw InvalidScenario("scenario needs 'roi_dims' as [width, height]");
  }
  sc.roi_width = doc["roi_dims"][0].get<double>();
  sc.roi_height = doc["roi_dims"][1].get<double>();
  if (doc.contains("lanes")) {
    if (!doc["lanes"].is_array()) throw InvalidScenario("'lanes' must be an array");
    sc.lanes = doc["lanes"].get<std::vector<double>>();
  }
  if (doc.contains("traffic_direction")) {
    const auto dir = traffic_direction_from_string(doc["traffic_direction"].get<std::string>());
    if (!dir) throw InvalidScenario("unknown traffic_direction");
    sc.traffic_direction = *dir;
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw InvalidScenario("'seed' must be unsigned");
    sc.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("rng")) sc.rng = doc["rng"].get<std::string>();

  if (!doc.contains("actors") || !doc["actors"].is_array()) {
    throw InvalidScenario("scenario needs an 'actors' array");
  }
  for (const auto& obj : doc["actors"]) {
    if (!obj.is_object()) throw InvalidScenario("actor must be an object");
    check_keys(obj,
               {"class", "enter_t", "exit_t", "lane", "speed", "stop_window", "box_size",
                "static_at", "enter_y", "wrong_way"},
               "actor");
    ActorScript a;
    if (!obj.contains("class")) throw InvalidScenario("actor needs 'class'");
    const auto cls = object_class_from_string(obj["class"].get<std::string>());
    if (!cls) throw InvalidScenario("actor has unknown class");
    a.cls = *cls;
    a.enter_t = number_field(obj, "enter_t", "actor");
    a.exit_t = number_field(obj, "exit_t", "actor");
    if (obj.contains("lane")) a.lane = obj["lane"].get<int>();
    if (obj.contains("speed")) a.speed = obj["speed"].get<double>();
    if (obj.contains("stop_window") && !obj["stop_window"].is_null()) {
      if (!obj["stop_window"].is_array() || obj["stop_window"].size() != 2) {
        throw InvalidScenario("'stop_window' must be [start, end]");
      }
      a.stop_window = StopWindow{obj["stop_window"][0].get<double>(),
                                 obj["stop_window"][1].get<double>()};
    }
    if (obj.contains("box_size")) {
      if (!obj["box_size"].is_array() || obj["box_size"].size() != 2) {
        throw InvalidScenario("'box_size' must be [w, h]");
      }
      a.box_size = {obj["box_size"][0].get<double>(), obj["box_size"][1].get<double>()};
    }
    if (obj.contains("static_at") && !obj["static_at"].is_null()) {
      if (!obj["static_at"].is_array() || obj["static_at"].size() != 2) {
        throw InvalidScenario("'static_at' must be [x, y]");
      }
      a.static_at = Point{obj["static_at"][0].get<double>(), obj["static_at"][1].get<double>()};
    }
    if (obj.contains("enter_y") && !obj["enter_y"].is_null()) {
      a.enter_y = obj["enter_y"].get<double>();
    }
    if (obj.contains("wrong_way")) a.wrong_way = obj["wrong_way"].get<bool>();
    sc.actors.push_back(std::move(a));
  }

  if (doc.contains("noise")) {
    const auto& obj = doc["noise"];
    if (!obj.is_object()) throw InvalidScenario("'noise' must be an object");
    check_keys(obj,
               {"jitter_sigma", "miss_prob", "false_positive_rate", "score_range", "fp_classes"},
               "noise");
    if (obj.contains("jitter_sigma")) sc.noise.jitter_sigma = obj["jitter_sigma"].get<double>();
    if (obj.contains("miss_prob")) sc.noise.miss_prob = obj["miss_prob"].get<double>();
    if (obj.contains("false_positive_rate")) {
      sc.noise.false_positive_rate = obj["false_positive_rate"].get<double>();
    }
    if (obj.contains("score_range")) {
      if (!obj["score_range"].is_array() || obj["score_range"].size() != 2) {
        throw InvalidScenario("'score_range' must be [lo, hi]");
      }
      sc.noise.score_range = {obj["score_range"][0].get<double>(),
                              obj["score_range"][1].get<double>()};
    }
    if (obj.contains("fp_classes")) {
      sc.noise.fp_classes.clear();
      for (const auto& c : obj["fp_classes"]) {
        const auto cls = object_class_from_string(c.get<std::string>());
        if (!cls) throw InvalidScenario("noise.fp_classes has unknown class");
        sc.noise.fp_classes.push_back(*cls);
      }
    }
  }

  validate_scenario(sc);
  return sc;
}

Scenario load_scenario(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string ground_truth_to_jsonl(const GroundTruth& gt) {
  std::string out;
  for (const GroundTruthEntry& e : gt.entries) {
    Json obj;
    obj["kind"] = std::string(to_string(e.kind));
    obj["t"] = e.t;
    obj["actor"] = e.actor;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

GroundTruth ground_truth_from_jsonl(std::istream& in) {
  GroundTruth gt;
  std::string text;
  std::uint64_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    Json obj;
    try {
      obj = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "ground-truth record must be an object");
    for (const auto& [key, value] : obj.items()) {
      if (key != "kind" && key != "t" && key != "actor") {
        throw ParseError(line, "ground-truth record has unknown key '" + key + "'");
      }
    }
    if (!obj.contains("kind") || !obj["kind"].is_string()) {
      throw ParseError(line, "ground-truth record needs a string 'kind'");
    }
    const auto kind = event_kind_from_string(obj["kind"].get<std::string>());
    if (!kind) throw ParseError(line, "unknown event kind");
    if (!obj.contains("t") || !obj["t"].is_number()) {
      throw ParseError(line, "ground-truth record needs numeric 't'");
    }
    GroundTruthEntry e;
    e.kind = *kind;
    e.t = obj["t"].get<double>();
    if (obj.contains("actor")) e.actor = obj["actor"].get<std::uint32_t>();
    gt.entries.push_back(e);
  }
  return gt;
}

}  // namespace tw

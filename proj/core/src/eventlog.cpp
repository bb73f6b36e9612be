#include "tunnelwatch/eventlog.hpp"

#include <json.hpp>

#include "tunnelwatch/errors.hpp"

namespace tw {

using Json = nlohmann::ordered_json;

namespace {

Json bbox_json(const BBox& b) { return Json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

BBox bbox_from_json(const Json& arr, std::uint64_t line) {
  if (!arr.is_array() || arr.size() != 4) {
    throw ParseError(line, "bbox must be an array of 4 numbers");
  }
  return BBox{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
              arr[3].get<double>()};
}

}  // namespace

std::string event_to_json_line(const Event& e) {
  Json obj;
  obj["kind"] = std::string(to_string(e.kind));
  obj["t"] = e.t;
  if (e.track_id) {
    obj["track_id"] = *e.track_id;
  } else {
    obj["track_id"] = nullptr;
  }
  Json ev;
  if (const auto* stop = std::get_if<StopEvidence>(&e.evidence)) {
    ev["iou"] = stop->iou;
    ev["prev_bbox"] = bbox_json(stop->prev_bbox);
    ev["cur_bbox"] = bbox_json(stop->cur_bbox);
  } else if (const auto* wwd = std::get_if<WwdEvidence>(&e.evidence)) {
    ev["iol"] = wwd->iol;
    ev["delta_v"] = wwd->delta_v;
    ev["prev_bbox"] = bbox_json(wwd->prev_bbox);
    ev["cur_bbox"] = bbox_json(wwd->cur_bbox);
  } else if (const auto* presence = std::get_if<PresenceEvidence>(&e.evidence)) {
    ev["bbox"] = bbox_json(presence->bbox);
    ev["score"] = presence->score;
  }
  obj["evidence"] = std::move(ev);
  return obj.dump();
}

Event parse_event_line(const std::string& text, std::uint64_t line) {
  Json obj;
  try {
    obj = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line, "event record must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (key != "kind" && key != "t" && key != "track_id" && key != "evidence") {
      throw ParseError(line, "event record has unknown key '" + key + "'");
    }
  }
  if (!obj.contains("kind") || !obj["kind"].is_string()) {
    throw ParseError(line, "event record needs a string 'kind'");
  }
  const auto kind = event_kind_from_string(obj["kind"].get<std::string>());
  if (!kind) throw ParseError(line, "unknown event kind '" + obj["kind"].get<std::string>() + "'");
  if (!obj.contains("t") || !obj["t"].is_number()) {
    throw ParseError(line, "event record needs numeric 't'");
  }

  Event e;
  e.kind = *kind;
  e.t = obj["t"].get<double>();
  if (obj.contains("track_id") && !obj["track_id"].is_null()) {
    if (!obj["track_id"].is_number_unsigned()) {
      throw ParseError(line, "track_id must be unsigned or null");
    }
    e.track_id = obj["track_id"].get<TrackId>();
  }

  const Json ev = obj.contains("evidence") ? obj["evidence"] : Json::object();
  if (!ev.is_object()) throw ParseError(line, "'evidence' must be an object");
  switch (e.kind) {
    case EventKind::Stop: {
      StopEvidence s;
      if (ev.contains("iou")) s.iou = ev["iou"].get<double>();
      if (ev.contains("prev_bbox")) s.prev_bbox = bbox_from_json(ev["prev_bbox"], line);
      if (ev.contains("cur_bbox")) s.cur_bbox = bbox_from_json(ev["cur_bbox"], line);
      e.evidence = s;
      break;
    }
    case EventKind::WWD: {
      WwdEvidence w;
      if (ev.contains("iol")) w.iol = ev["iol"].get<double>();
      if (ev.contains("delta_v")) w.delta_v = ev["delta_v"].get<double>();
      if (ev.contains("prev_bbox")) w.prev_bbox = bbox_from_json(ev["prev_bbox"], line);
      if (ev.contains("cur_bbox")) w.cur_bbox = bbox_from_json(ev["cur_bbox"], line);
      e.evidence = w;
      break;
    }
    case EventKind::Fire:
    case EventKind::Person: {
      PresenceEvidence p;
      if (ev.contains("bbox")) p.bbox = bbox_from_json(ev["bbox"], line);
      if (ev.contains("score")) p.score = ev["score"].get<double>();
      e.evidence = p;
      break;
    }
  }
  return e;
}

std::vector<Event> read_event_stream(std::istream& in) {
  std::vector<Event> events;
  std::string text;
  std::uint64_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    events.push_back(parse_event_line(text, line));
  }
  return events;
}

}  // namespace tw

#include "tunnelwatch/cada.hpp"

#include <algorithm>
#include <cmath>

#include "tunnelwatch/errors.hpp"

namespace tw {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Stop:
      return "Stop";
    case EventKind::WWD:
      return "WWD";
    case EventKind::Fire:
      return "Fire";
    case EventKind::Person:
      return "Person";
  }
  return "Stop";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
  if (s == "Stop") return EventKind::Stop;
  if (s == "WWD") return EventKind::WWD;
  if (s == "Fire") return EventKind::Fire;
  if (s == "Person") return EventKind::Person;
  return std::nullopt;
}

std::string_view to_string(TrafficDirection d) {
  return d == TrafficDirection::IncreasingY ? "Increasing_Y" : "Decreasing_Y";
}

std::optional<TrafficDirection> traffic_direction_from_string(std::string_view s) {
  if (s == "Increasing_Y") return TrafficDirection::IncreasingY;
  if (s == "Decreasing_Y") return TrafficDirection::DecreasingY;
  return std::nullopt;
}

void CadaConfig::validate() const {
  if (!(cycle_period > 0.0)) throw ConfigError("cada.cycle_period must be > 0");
  if (!(stop_iou >= 0.0 && stop_iou <= 1.0)) throw ConfigError("cada.stop_iou must be in [0,1]");
  if (!(wwd_iol >= 0.0 && wwd_iol <= 1.0)) throw ConfigError("cada.wwd_iol must be in [0,1]");
  if (!(min_score >= 0.0 && min_score <= 1.0)) throw ConfigError("cada.min_score must be in [0,1]");
  if (presence_persistence < 1) throw ConfigError("cada.presence_persistence must be >= 1");
  if (!(direction_epsilon >= 0.0)) throw ConfigError("cada.direction_epsilon must be >= 0");
  if (sample_tolerance && !(*sample_tolerance >= 0.0)) {
    throw ConfigError("cada.sample_tolerance must be >= 0");
  }
}

std::vector<Event> evaluate_cada_cycle(const std::vector<Track>& tracks, const CadaConfig& cfg,
                                       double now, double sample_period) {
  const double tol = cfg.tolerance_or_default(sample_period);
  std::vector<Event> out;

  for (const Track& tr : tracks) {
    if (tr.cls != ObjectClass::Car) continue;
    const TrackSample* cur = tr.sample_near(now, tol);
    const TrackSample* prev = tr.sample_near(now - cfg.cycle_period, tol);
    if (cur == nullptr || prev == nullptr || !(cur->t > prev->t)) continue;

    const double cycle_iou = iou(prev->bbox, cur->bbox);
    if (cycle_iou >= cfg.stop_iou) {
      out.push_back(Event{EventKind::Stop, now, tr.id,
                          StopEvidence{cycle_iou, prev->bbox, cur->bbox}});
      continue;
    }

    const double cycle_iol = iol(prev->bbox, cur->bbox);
    const double delta_v = cur->bbox.center_y() - prev->bbox.center_y();
    const bool against_flow = cfg.traffic_direction == TrafficDirection::IncreasingY
                                  ? delta_v < 0.0
                                  : delta_v > 0.0;
    if (cycle_iol < cfg.wwd_iol && against_flow && std::abs(delta_v) > cfg.direction_epsilon) {
      out.push_back(Event{EventKind::WWD, now, tr.id,
                          WwdEvidence{cycle_iol, delta_v, prev->bbox, cur->bbox}});
    }
  }

  sort_events(out);
  return out;
}

std::vector<Event> PresenceDetector::observe(const FrameDetections& frame) {
  const Detection* best_fire = nullptr;
  const Detection* best_person = nullptr;
  for (const Detection& d : frame.detections) {
    if (d.score < cfg_.min_score) continue;
    if (d.cls == ObjectClass::Fire && (best_fire == nullptr || d.score > best_fire->score)) {
      best_fire = &d;
    }
    if (d.cls == ObjectClass::Person && (best_person == nullptr || d.score > best_person->score)) {
      best_person = &d;
    }
  }

  fire_streak_ = best_fire ? fire_streak_ + 1 : 0;
  person_streak_ = best_person ? person_streak_ + 1 : 0;

  std::vector<Event> out;
  if (best_fire && fire_streak_ >= cfg_.presence_persistence) {
    out.push_back(Event{EventKind::Fire, frame.t, std::nullopt,
                        PresenceEvidence{best_fire->bbox, best_fire->score}});
  }
  if (best_person && person_streak_ >= cfg_.presence_persistence) {
    out.push_back(Event{EventKind::Person, frame.t, std::nullopt,
                        PresenceEvidence{best_person->bbox, best_person->score}});
  }
  sort_events(out);
  return out;
}

std::vector<Event> EventRegistry::update(std::map<Key, int>& state, int rearm_epochs,
                                         const std::vector<Event>& candidates) {
  std::vector<Event> emitted;

  std::vector<Key> candidate_keys;
  candidate_keys.reserve(candidates.size());
  for (const Event& e : candidates) candidate_keys.emplace_back(e.kind, e.track_id);

  // Conditions absent this epoch cool down; fully cooled keys re-arm (drop out).
  for (auto it = state.begin(); it != state.end();) {
    if (std::find(candidate_keys.begin(), candidate_keys.end(), it->first) ==
        candidate_keys.end()) {
      it->second += 1;
      if (it->second >= rearm_epochs) {
        it = state.erase(it);
        continue;
      }
    }
    ++it;
  }

  for (const Event& e : candidates) {
    const Key key{e.kind, e.track_id};
    auto it = state.find(key);
    if (it == state.end()) {
      emitted.push_back(e);
      state.emplace(key, 0);
    } else {
      it->second = 0;  // condition persists; stay suppressed
    }
  }

  sort_events(emitted);
  return emitted;
}

std::vector<Event> EventRegistry::update_cycle(const std::vector<Event>& candidates) {
  return update(cycle_state_, 1, candidates);
}

std::vector<Event> EventRegistry::update_frame(const std::vector<Event>& candidates) {
  return update(frame_state_, rearm_frames_, candidates);
}

void sort_events(std::vector<Event>& events) {
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.track_id < b.track_id;
  });
}

}  // namespace tw

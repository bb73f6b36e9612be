#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "tunnelwatch/detection.hpp"
#include "tunnelwatch/tracker.hpp"

namespace tw {

enum class EventKind : std::uint8_t { Stop, WWD, Fire, Person };

std::string_view to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(std::string_view s);

/// Normal flow direction of traffic along the warped image's vertical axis.
enum class TrafficDirection : std::uint8_t { IncreasingY, DecreasingY };

std::string_view to_string(TrafficDirection d);
std::optional<TrafficDirection> traffic_direction_from_string(std::string_view s);

struct StopEvidence {
  double iou = 0.0;
  BBox prev_bbox;
  BBox cur_bbox;
};

struct WwdEvidence {
  double iol = 0.0;
  double delta_v = 0.0;  ///< vertical center displacement over the cycle
  BBox prev_bbox;
  BBox cur_bbox;
};

struct PresenceEvidence {
  BBox bbox;
  double score = 0.0;
};

using Evidence = std::variant<StopEvidence, WwdEvidence, PresenceEvidence>;

/// An emitted incident. track_id is present for Stop/WWD and absent for the
/// presence events (Fire/Person).
struct Event {
  EventKind kind = EventKind::Stop;
  double t = 0.0;
  std::optional<TrackId> track_id;
  Evidence evidence;
};

struct CadaConfig {
  double cycle_period = 2.4;        ///< seconds between rule evaluations
  double stop_iou = 0.9;            ///< Stop when same-ID cycle IoU >= this
  double wwd_iol = 0.75;            ///< WWD when cycle IoL < this and direction reversed
  TrafficDirection traffic_direction = TrafficDirection::IncreasingY;
  double min_score = 0.5;           ///< presence confidence floor
  int presence_persistence = 1;     ///< consecutive sampled frames for Fire/Person
  double direction_epsilon = 1.0;   ///< min |delta v| in px to call a direction
  /// Window around `now` / `now - cycle_period` within which a history sample
  /// counts as cycle-aligned. Unset: half a sampling period, filled by the
  /// pipeline from the stream config.
  std::optional<double> sample_tolerance;

  double tolerance_or_default(double sample_period) const {
    return sample_tolerance ? *sample_tolerance : 0.5 * sample_period;
  }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// One CADA pass over the live Car tracks at cycle boundary `now`. For each
/// track with a sample at `now` and one near `now - cycle_period`: Stop when
/// the cycle IoU clears stop_iou, else WWD when the cycle IoL falls below
/// wwd_iol and the vertical motion opposes traffic_direction by more than
/// direction_epsilon. Tracks lacking a previous-cycle sample emit nothing.
/// Stop is checked first so a track never gets both labels in one cycle.
std::vector<Event> evaluate_cada_cycle(const std::vector<Track>& tracks, const CadaConfig& cfg,
                                       double now, double sample_period);

/// Consecutive-frame persistence filter for Fire/Person presence. NoFire
/// detections never qualify.
class PresenceDetector {
public:
  explicit PresenceDetector(CadaConfig cfg) : cfg_(std::move(cfg)) {}

  /// Feed one sampled frame; returns the presence conditions that hold at it.
  std::vector<Event> observe(const FrameDetections& frame);

private:
  CadaConfig cfg_;
  int fire_streak_ = 0;
  int person_streak_ = 0;
};

/// Alarm dedup: an event of a given (kind, track-or-global) key is emitted
/// once; the key re-arms after its condition has been absent for one full
/// cycle (Stop/WWD) or presence_persistence frames (Fire/Person).
class EventRegistry {
public:
  explicit EventRegistry(const CadaConfig& cfg)
      : rearm_frames_(cfg.presence_persistence) {}

  /// Conditions that hold at a cycle boundary (Stop/WWD candidates).
  std::vector<Event> update_cycle(const std::vector<Event>& candidates);
  /// Conditions that hold at a sampled frame (Fire/Person candidates).
  std::vector<Event> update_frame(const std::vector<Event>& candidates);

private:
  using Key = std::pair<EventKind, std::optional<TrackId>>;
  // An entry exists while its key is disarmed; the value counts consecutive
  // epochs the condition has been absent.
  std::vector<Event> update(std::map<Key, int>& state, int rearm_epochs,
                            const std::vector<Event>& candidates);

  std::map<Key, int> cycle_state_;
  std::map<Key, int> frame_state_;
  int rearm_frames_ = 1;
};

/// Orders events by (t, kind, track_id); used before emission so logs are
/// reproducible independent of evaluation order.
void sort_events(std::vector<Event>& events);

}  // namespace tw

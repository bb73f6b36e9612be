#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "tunnelwatch/detection.hpp"
#include "tunnelwatch/geometry.hpp"
#include "tunnelwatch/kalman.hpp"

namespace tw {

using TrackId = std::uint64_t;

struct TrackerConfig {
  /// Minimum IoU for a prediction-detection pair to count as the same object.
  double iou_gate = 0.3;
  /// Consecutive unmatched steps a track survives before deletion.
  int max_coast = 0;
  /// Classes eligible for tracking; detections of other classes pass through
  /// without an ID.
  std::set<ObjectClass> tracked_classes = {ObjectClass::Car};
  /// Seconds of matched history kept per track.
  double history_retention = 5.0;
  KalmanParams kalman;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct TrackSample {
  double t = 0.0;
  BBox bbox;
};

/// A persistent identity. IDs are assigned once at birth and never reused
/// within a tracker instance.
struct Track {
  TrackId id = 0;
  ObjectClass cls = ObjectClass::Car;
  KalmanBoxState state;
  /// Matched (timestamp, detection box) samples, strictly increasing in t.
  std::vector<TrackSample> history;
  int hits = 0;   ///< consecutive matched steps
  int coast = 0;  ///< consecutive unmatched steps

  /// History sample nearest to time t within +/- tolerance, if any.
  const TrackSample* sample_near(double t, double tolerance) const;
};

struct MatchResult {
  std::vector<std::pair<TrackId, std::size_t>> matches;  ///< (track id, detection index)
  std::vector<TrackId> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

/// Hungarian assignment on cost = 1 - IoU; assigned pairs below the gate are
/// demoted to unmatched on both sides. Every input appears exactly once
/// across the three outputs.
MatchResult match_by_iou(const std::vector<std::pair<TrackId, BBox>>& predicted,
                         const std::vector<BBox>& detections, double gate);

/// Single-stream multi-object tracker: per-class Kalman prediction, IoU-gated
/// Hungarian matching, immediate ID assignment for new detections and
/// deletion after max_coast unmatched steps.
class Tracker {
public:
  explicit Tracker(TrackerConfig cfg = {});

  /// Advances the tracker by one sampled frame. Returns (detection index,
  /// track id) for every detection of a tracked class. Frame timestamps must
  /// be strictly increasing; throws NonMonotonicTime otherwise.
  std::vector<std::pair<std::size_t, TrackId>> step(const FrameDetections& frame);

  const std::vector<Track>& tracks() const { return tracks_; }

  /// Next ID that would be assigned; IDs start at 1.
  TrackId next_id() const { return next_id_; }

private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  TrackId next_id_ = 1;
  std::optional<double> last_t_;
};

}  // namespace tw

#include "tunnelwatch/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "tunnelwatch/errors.hpp"
#include "tunnelwatch/hungarian.hpp"

namespace tw {

void TrackerConfig::validate() const {
  if (!(iou_gate >= 0.0 && iou_gate <= 1.0)) {
    throw ConfigError("tracker.iou_gate must be in [0,1]");
  }
  if (max_coast < 0) {
    throw ConfigError("tracker.max_coast must be >= 0");
  }
  if (!(history_retention > 0.0)) {
    throw ConfigError("tracker.history_retention must be > 0");
  }
}

const TrackSample* Track::sample_near(double t, double tolerance) const {
  const TrackSample* best = nullptr;
  double best_dist = tolerance;
  for (const TrackSample& s : history) {
    const double d = std::abs(s.t - t);
    if (d <= best_dist) {
      best = &s;
      best_dist = d;
    }
  }
  return best;
}

MatchResult match_by_iou(const std::vector<std::pair<TrackId, BBox>>& predicted,
                         const std::vector<BBox>& detections, double gate) {
  MatchResult out;
  const int n = static_cast<int>(predicted.size());
  const int m = static_cast<int>(detections.size());

  Eigen::MatrixXd overlap(n, m);
  Eigen::MatrixXd cost(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      overlap(i, j) = iou(predicted[i].second, detections[j]);
      cost(i, j) = 1.0 - overlap(i, j);
    }
  }

  std::vector<char> track_matched(n, 0), det_matched(m, 0);
  for (const auto& [row, col] : hungarian_assign(cost)) {
    if (overlap(row, col) < gate) continue;  // below-gate pairs stay unmatched
    out.matches.emplace_back(predicted[row].first, static_cast<std::size_t>(col));
    track_matched[row] = 1;
    det_matched[col] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (!track_matched[i]) out.unmatched_tracks.push_back(predicted[i].first);
  }
  for (int j = 0; j < m; ++j) {
    if (!det_matched[j]) out.unmatched_detections.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::vector<std::pair<std::size_t, TrackId>> Tracker::step(const FrameDetections& frame) {
  if (last_t_ && !(frame.t > *last_t_)) {
    throw NonMonotonicTime("frame timestamps must be strictly increasing");
  }
  last_t_ = frame.t;

  std::vector<std::pair<std::size_t, TrackId>> assignments;

  for (const ObjectClass cls : cfg_.tracked_classes) {
    std::vector<std::size_t> track_idx;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
      if (tracks_[i].cls == cls) track_idx.push_back(i);
    }
    std::vector<std::size_t> det_idx;
    for (std::size_t j = 0; j < frame.detections.size(); ++j) {
      const Detection& d = frame.detections[j];
      // Zero-area boxes are legal on the wire but carry no trackable shape.
      if (d.cls == cls && d.bbox.width() > 0.0 && d.bbox.height() > 0.0) det_idx.push_back(j);
    }
    if (track_idx.empty() && det_idx.empty()) continue;

    // Predict one sampled step ahead. An area velocity that would cross zero
    // is clamped first so the predicted box stays well formed.
    std::vector<std::pair<TrackId, BBox>> predicted;
    predicted.reserve(track_idx.size());
    for (const std::size_t i : track_idx) {
      Track& tr = tracks_[i];
      if (tr.state.mean(2) + tr.state.mean(6) <= 0.0) tr.state.mean(6) = 0.0;
      tr.state = kalman_predict(tr.state, 1, cfg_.kalman);
      predicted.emplace_back(tr.id, state_bbox(tr.state));
    }

    std::vector<BBox> det_boxes;
    det_boxes.reserve(det_idx.size());
    for (const std::size_t j : det_idx) det_boxes.push_back(frame.detections[j].bbox);

    const MatchResult matched = match_by_iou(predicted, det_boxes, cfg_.iou_gate);

    for (const auto& [id, local_det] : matched.matches) {
      const std::size_t det_j = det_idx[local_det];
      for (const std::size_t i : track_idx) {
        Track& tr = tracks_[i];
        if (tr.id != id) continue;
        tr.state = kalman_update(tr.state, bbox_to_observation(frame.detections[det_j].bbox),
                                 cfg_.kalman);
        tr.hits += 1;
        tr.coast = 0;
        tr.history.push_back(TrackSample{frame.t, frame.detections[det_j].bbox});
        break;
      }
      assignments.emplace_back(det_j, id);
    }

    for (const TrackId id : matched.unmatched_tracks) {
      for (const std::size_t i : track_idx) {
        Track& tr = tracks_[i];
        if (tr.id != id) continue;
        tr.coast += 1;
        tr.hits = 0;
        break;
      }
    }

    for (const std::size_t local_det : matched.unmatched_detections) {
      const std::size_t det_j = det_idx[local_det];
      Track tr;
      tr.id = next_id_++;
      tr.cls = cls;
      tr.state = kalman_init(bbox_to_observation(frame.detections[det_j].bbox), cfg_.kalman);
      tr.hits = 1;
      tr.history.push_back(TrackSample{frame.t, frame.detections[det_j].bbox});
      tracks_.push_back(std::move(tr));
      assignments.emplace_back(det_j, tracks_.back().id);
    }
  }

  std::erase_if(tracks_, [this](const Track& tr) { return tr.coast > cfg_.max_coast; });

  // Keep histories bounded; CADA only ever looks one cycle back.
  const double horizon = frame.t - cfg_.history_retention;
  for (Track& tr : tracks_) {
    auto first_kept = std::find_if(tr.history.begin(), tr.history.end(),
                                   [horizon](const TrackSample& s) { return s.t >= horizon; });
    tr.history.erase(tr.history.begin(), first_kept);
  }

  std::sort(assignments.begin(), assignments.end());
  return assignments;
}

}  // namespace tw

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tunnelwatch/cada.hpp"
#include "tunnelwatch/geometry.hpp"
#include "tunnelwatch/scenario.hpp"

namespace tw {

struct ScoredBox {
  BBox bbox;
  double score = 0.0;
};

struct ApResult {
  double ap = 0.0;
  /// Set when both detections and truth are empty; ap is then reported as 1.
  bool degenerate = false;
};

/// Precision-recall interpolation variant. AllPoint integrates the exact
/// monotone envelope; ElevenPoint averages the envelope at recalls
/// 0.0, 0.1, ..., 1.0.
enum class ApInterpolation : std::uint8_t { AllPoint, ElevenPoint };

/// Average Precision over a set of images at a fixed IoU match threshold.
/// detections[i] and truth[i] belong to image i. Detections are ranked by
/// descending score; each greedily takes the highest-IoU unmatched truth box
/// of its image at or above the threshold. AP is the area under the
/// precision-recall curve with precision made monotone from the right.
/// Depends on scores only through their ranking.
ApResult average_precision(const std::vector<std::vector<ScoredBox>>& detections,
                           const std::vector<std::vector<BBox>>& truth, double iou_thresh,
                           ApInterpolation interpolation = ApInterpolation::AllPoint);

struct LatencyEntry {
  GroundTruthEntry truth;
  std::optional<Event> matched;  ///< earliest same-kind event inside the window
  double latency = 0.0;          ///< detected_t - onset_t; meaningful when matched
};

struct LatencyReport {
  std::vector<LatencyEntry> entries;  ///< one per ground-truth event
  std::vector<Event> false_positives;
  double max_latency = 0.0;
  std::size_t matched_count = 0;
  std::size_t missed_count = 0;
};

/// Matches each ground-truth event to the earliest emitted event of the same
/// kind within [onset, onset + match_window]. Matching is one-to-one;
/// unmatched truths are missed, unmatched emissions are false positives.
LatencyReport score_latency(const std::vector<Event>& emitted, const GroundTruth& truth,
                            double match_window);

struct RunSummary {
  bool pass = false;
  std::string table;  ///< aligned human-readable report
};

/// Pass iff every truth event matched with latency <= pass_threshold and,
/// when strict_false_positives is set, no unmatched events were emitted.
RunSummary summarize_run(const LatencyReport& report, double pass_threshold,
                         bool strict_false_positives = true);

/// Machine-readable form of the report (JSON document).
std::string latency_report_to_json(const LatencyReport& report, double pass_threshold);

}  // namespace tw

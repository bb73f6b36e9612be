#pragma once

#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "tunnelwatch/cada.hpp"
#include "tunnelwatch/stream.hpp"
#include "tunnelwatch/tracker.hpp"

namespace tw {

struct PipelineConfig {
  StreamConfig stream;
  TrackerConfig tracker;
  CadaConfig cada;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses a config JSON document; missing sections take the defaults above.
/// Unknown keys are rejected with the dotted field path.
PipelineConfig pipeline_config_from_json(const std::string& text);
std::string pipeline_config_to_json(const PipelineConfig& cfg);

/// Applies one `--set path.to.field=value` style override onto a config
/// document. Values parse as JSON scalars, falling back to a string.
std::string apply_config_override(const std::string& config_json, const std::string& assignment);

/// Called for every emitted event, in emission order.
using EventSink = std::function<void(const Event&)>;
/// Called after every processed (sampled) frame with the live tracks.
using TrackSink = std::function<void(const FrameDetections&, const std::vector<Track>&)>;

struct PipelineStats {
  std::uint64_t frames_ingested = 0;
  std::uint64_t frames_processed = 0;
  std::uint64_t detections_processed = 0;
  std::uint64_t cycles_evaluated = 0;
};

/// The end-to-end engine: frame sampling, optional ROI warping, tracking,
/// periodic CADA evaluation and presence detection, alarm dedup.
/// Single-writer: feed one stream sequentially per instance.
class Pipeline {
public:
  explicit Pipeline(PipelineConfig cfg, EventSink event_sink = {}, TrackSink track_sink = {});

  /// Feeds one full-rate input frame; sampling happens inside.
  void process(const FrameDetections& frame);

  const std::vector<Event>& events() const { return events_; }
  const Tracker& tracker() const { return tracker_; }
  const PipelineStats& stats() const { return stats_; }

private:
  void emit(const Event& e);

  PipelineConfig cfg_;
  std::optional<Homography> roi_map_;
  Tracker tracker_;
  PresenceDetector presence_;
  EventRegistry registry_;
  EventSink event_sink_;
  TrackSink track_sink_;
  std::vector<Event> events_;
  PipelineStats stats_;
  std::uint64_t next_cycle_ = 1;
};

/// Runs a pipeline over an in-memory stream.
std::vector<Event> run_pipeline(const PipelineConfig& cfg,
                                const std::vector<FrameDetections>& frames,
                                EventSink event_sink = {}, TrackSink track_sink = {},
                                PipelineStats* stats = nullptr);

/// Runs a pipeline over a JSONL detection stream. Parsing runs ahead of
/// processing on a reader thread through a bounded queue
/// (stream.queue_capacity frames deep). Parse errors propagate to the caller.
std::vector<Event> run_pipeline_stream(const PipelineConfig& cfg, std::istream& in,
                                       EventSink event_sink = {}, TrackSink track_sink = {},
                                       PipelineStats* stats = nullptr);

}  // namespace tw

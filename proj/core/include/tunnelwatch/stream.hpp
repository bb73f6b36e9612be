#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tunnelwatch/detection.hpp"
#include "tunnelwatch/errors.hpp"
#include "tunnelwatch/homography.hpp"

namespace tw {

/// Space the incoming boxes live in. Raw streams are warped into ROI
/// coordinates on ingestion; Warped streams pass through.
enum class CoordinateSpace : std::uint8_t { Raw, Warped };

std::string_view to_string(CoordinateSpace s);
std::optional<CoordinateSpace> coordinate_space_from_string(std::string_view s);

struct RoiSpec {
  RoiQuad quad;
  double target_width = 0.0;
  double target_height = 0.0;
};

struct StreamConfig {
  double fps = 30.0;       ///< source frame rate
  int frame_interval = 6;  ///< keep every c-th frame
  std::optional<RoiSpec> roi;
  CoordinateSpace coordinate_space = CoordinateSpace::Warped;
  std::size_t queue_capacity = 64;  ///< read-ahead depth between parser and pipeline

  double sample_period() const { return frame_interval / fps; }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Incremental JSON Lines reader for detection streams. Schema is strict:
/// unknown keys are rejected and invariants are checked per record, with
/// errors naming the 1-based line. Frame indices must be strictly increasing.
class DetectionStreamReader {
public:
  DetectionStreamReader(std::istream& in, double fps) : in_(in), fps_(fps) {}

  /// Next frame in file order, or nullopt at end of input.
  /// Throws ParseError / NonMonotonicFrame.
  std::optional<FrameDetections> next();

private:
  std::istream& in_;
  double fps_ = 30.0;
  std::uint64_t line_ = 0;
  std::optional<std::uint64_t> last_frame_;
};

/// Parses one frame record; `line` is used for error reporting only.
FrameDetections parse_frame_line(const std::string& text, std::uint64_t line, double fps);

std::vector<FrameDetections> read_detection_stream(std::istream& in, double fps);

/// One JSONL record, without the trailing newline. Serialization is
/// deterministic; parse(serialize(f)) == f for valid frames.
std::string frame_to_json_line(const FrameDetections& f);
void write_detection_stream(std::ostream& out, const std::vector<FrameDetections>& frames);

/// True when a frame index survives keep-1-of-c sampling (index = 0 mod c).
/// Throws InvalidInterval when c < 1.
bool keep_frame(std::uint64_t frame, int interval);

std::vector<FrameDetections> sample_frames(const std::vector<FrameDetections>& frames,
                                           int interval);

/// Warps every box into the target rectangle. Boxes entirely outside the
/// target are dropped; straddling boxes are clipped to [0,w]x[0,h].
FrameDetections apply_roi(const FrameDetections& frame, const Homography& h, double target_width,
                          double target_height);
FrameDetections apply_roi(const FrameDetections& frame, const RoiSpec& roi);

/// Single-producer single-consumer bounded FIFO; lets parsing run ahead of
/// processing by at most `capacity` frames.
template <typename T>
class BoundedQueue {
public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  void push(T value) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [this] { return items_.size() < capacity_ || closed_; });
    if (closed_) return;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
  }

  /// Blocks until an item is available or the queue is closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [this] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T value = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return value;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
};

}  // namespace tw

#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tunnelwatch/cada.hpp"
#include "tunnelwatch/detection.hpp"

namespace tw {

/// Generator identifier recorded in scenario files. The engine is the
/// standard mt19937_64 (bit-exact across platforms); uniforms take the top
/// 53 bits, normals use Box-Muller (two uniforms per draw, cosine branch),
/// Poisson counts use Knuth multiplication.
inline constexpr std::string_view kSimRngId = "mt19937_64/box-muller/v1";

/// Deterministic source for all scenario randomness.
class SimRng {
public:
  explicit SimRng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Normal(0, sigma^2); consumes exactly two engine draws.
  double normal(double sigma);

  /// Poisson(lambda) by Knuth multiplication; draw count varies with the sample.
  int poisson(double lambda);

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);

private:
  std::mt19937_64 engine_;
};

struct NoiseModel {
  double jitter_sigma = 0.0;         ///< px std-dev added to each box coordinate
  double miss_prob = 0.0;            ///< per-detection drop probability
  double false_positive_rate = 0.0;  ///< expected spurious detections per frame
  std::pair<double, double> score_range = {0.55, 0.95};
  /// Classes spurious detections draw from.
  std::vector<ObjectClass> fp_classes = {ObjectClass::Car, ObjectClass::NoFire};
};

struct StopWindow {
  double start = 0.0;
  double end = 0.0;
};

/// One scripted actor. Lane-based actors move along y at `speed` px/s from
/// `enter_y` (defaulted to the near edge of travel); `static_at` pins the
/// box center instead (fires, persons out of vehicle).
struct ActorScript {
  ObjectClass cls = ObjectClass::Car;
  double enter_t = 0.0;
  double exit_t = 0.0;
  int lane = 0;
  double speed = 0.0;  ///< px/s along +y or -y; sign encodes direction
  std::optional<StopWindow> stop_window;
  std::pair<double, double> box_size = {36.0, 30.0};  ///< (w, h) px
  std::optional<Point> static_at;
  std::optional<double> enter_y;  ///< center y at enter_t
  bool wrong_way = false;         ///< must match speed sign vs traffic direction
};

struct Scenario {
  std::string name;
  double duration = 60.0;  ///< seconds
  double fps = 30.0;
  double roi_width = 400.0;
  double roi_height = 480.0;
  std::vector<double> lanes;  ///< lane center x positions
  TrafficDirection traffic_direction = TrafficDirection::IncreasingY;
  std::vector<ActorScript> actors;
  NoiseModel noise;
  std::uint64_t seed = 42;
  std::string rng = std::string(kSimRngId);
};

struct GroundTruthEntry {
  EventKind kind = EventKind::Stop;
  double t = 0.0;         ///< onset (occurrence) time
  std::uint32_t actor = 0;  ///< 1-based index into the scenario's actor list
};

struct GroundTruth {
  std::vector<GroundTruthEntry> entries;
};

/// Throws InvalidScenario naming the violated invariant: bad time spans,
/// unknown lanes, paths leaving the ROI, wrong_way flags inconsistent with
/// speed sign and traffic direction, or an unsupported rng identifier.
void validate_scenario(const Scenario& sc);

/// Scripted box center at time t (t within the actor's span). Stop windows
/// freeze the position; enter_y defaults to the near edge of travel.
Point actor_position(const Scenario& sc, const ActorScript& actor, double t);

/// Single noisy detection for a scripted box, or nullopt when dropped.
/// Jitter draws happen only when jitter_sigma > 0 and the miss draw only when
/// miss_prob > 0; the score is always sampled from score_range.
std::optional<Detection> apply_noise(const Detection& det, const NoiseModel& model, SimRng& rng);

/// Compiles a scenario into a full-rate detection stream plus its ground
/// truth schedule. Pure function of (scenario, seed): identical inputs yield
/// byte-identical serialized streams.
std::pair<std::vector<FrameDetections>, GroundTruth> generate_stream(const Scenario& sc);

/// Ground truth alone (never affected by the noise model).
GroundTruth ground_truth_of(const Scenario& sc);

/// Named scenarios mirroring the four tunnel accident recordings plus an
/// event-free nominal-traffic run.
std::vector<std::string> builtin_scenario_names();
std::optional<Scenario> builtin_scenario(std::string_view name);

/// Scenario JSON document (mirrors the struct field for field).
std::string scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(std::istream& in);

/// Ground-truth JSONL: {"kind": "...", "t": <float>, "actor": <uint>}.
std::string ground_truth_to_jsonl(const GroundTruth& gt);
GroundTruth ground_truth_from_jsonl(std::istream& in);

}  // namespace tw

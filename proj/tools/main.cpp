// tunnelwatch: detection-stream incident engine.
//   run       stream frames through tracking + CADA and log events
//   simulate  compile a scenario into a detection stream + ground truth
//   evaluate  score an event log against ground truth

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tunnelwatch/errors.hpp"
#include "tunnelwatch/eventlog.hpp"
#include "tunnelwatch/metrics.hpp"
#include "tunnelwatch/pipeline.hpp"
#include "tunnelwatch/scenario.hpp"
#include "tunnelwatch/stream.hpp"

namespace {

enum ExitCode { kOk = 0, kEvaluationFail = 1, kConfigError = 2, kParseError = 3 };

enum class LogLevel { Quiet = 0, Error = 1, Info = 2, Debug = 3 };

LogLevel log_level() {
  const char* env = std::getenv("TUNNELWATCH_LOG");
  if (env == nullptr) return LogLevel::Info;
  const std::string v(env);
  if (v == "quiet") return LogLevel::Quiet;
  if (v == "error") return LogLevel::Error;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

void log_at(LogLevel lvl, const std::string& msg) {
  if (log_level() >= lvl) std::fprintf(stderr, "tunnelwatch: %s\n", msg.c_str());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tw::ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

tw::Scenario resolve_scenario(const std::string& ref, std::optional<std::uint64_t> seed) {
  tw::Scenario sc;
  if (auto builtin = tw::builtin_scenario(ref)) {
    sc = std::move(*builtin);
  } else if (std::filesystem::exists(ref)) {
    sc = tw::scenario_from_json(read_file(ref));
  } else {
    throw tw::InvalidScenario("unknown scenario '" + ref +
                              "' (not a builtin name or a readable file)");
  }
  if (seed) sc.seed = *seed;
  return sc;
}

tw::PipelineConfig load_config(const std::string& config_path,
                               const std::vector<std::string>& overrides) {
  std::string doc = config_path.empty() ? std::string("{}") : read_file(config_path);
  for (const std::string& assignment : overrides) {
    doc = tw::apply_config_override(doc, assignment);
  }
  return tw::pipeline_config_from_json(doc);
}

// Line-buffered event writer so downstream consumers see alarms immediately.
class EventLogWriter {
public:
  explicit EventLogWriter(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::trunc);
      if (!file_) throw tw::ConfigError("cannot open '" + path + "' for writing");
      out_ = &file_;
    } else {
      out_ = &std::cout;
    }
  }

  void write(const tw::Event& e) {
    (*out_) << tw::event_to_json_line(e) << '\n';
    out_->flush();
  }

private:
  std::ofstream file_;
  std::ostream* out_ = nullptr;
};

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& input, const std::string& scenario_ref,
            std::optional<std::uint64_t> seed, const std::string& out_path,
            const std::string& tracks_path) {
  const tw::PipelineConfig cfg = load_config(config_path, overrides);

  EventLogWriter events(out_path);
  std::ofstream tracks_file;
  tw::TrackSink track_sink;
  if (!tracks_path.empty()) {
    tracks_file.open(tracks_path, std::ios::trunc);
    if (!tracks_file) throw tw::ConfigError("cannot open '" + tracks_path + "' for writing");
    track_sink = [&tracks_file](const tw::FrameDetections& f, const std::vector<tw::Track>& ts) {
      nlohmann::ordered_json obj;
      obj["frame"] = f.frame;
      obj["t"] = f.t;
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const tw::Track& tr : ts) {
        nlohmann::ordered_json rec;
        rec["id"] = tr.id;
        rec["class"] = std::string(tw::to_string(tr.cls));
        if (!tr.history.empty()) {
          const tw::BBox& b = tr.history.back().bbox;
          rec["bbox"] = {b.x_min, b.y_min, b.x_max, b.y_max};
        }
        arr.push_back(std::move(rec));
      }
      obj["tracks"] = std::move(arr);
      tracks_file << obj.dump() << '\n';
    };
  }

  const tw::EventSink sink = [&events](const tw::Event& e) { events.write(e); };

  tw::PipelineStats stats;
  std::size_t n_events = 0;
  if (!scenario_ref.empty()) {
    const tw::Scenario sc = resolve_scenario(scenario_ref, seed);
    auto [frames, truth] = tw::generate_stream(sc);
    n_events = tw::run_pipeline(cfg, frames, sink, track_sink, &stats).size();
  } else if (input == "-") {
    n_events = tw::run_pipeline_stream(cfg, std::cin, sink, track_sink, &stats).size();
  } else {
    std::ifstream in(input);
    if (!in) throw tw::ConfigError("cannot open '" + input + "'");
    n_events = tw::run_pipeline_stream(cfg, in, sink, track_sink, &stats).size();
  }

  log_at(LogLevel::Info, "processed " + std::to_string(stats.frames_processed) + "/" +
                             std::to_string(stats.frames_ingested) + " frames, " +
                             std::to_string(stats.cycles_evaluated) + " cycles, " +
                             std::to_string(n_events) + " events");
  return kOk;
}

int cmd_simulate(const std::string& scenario_ref, std::optional<std::uint64_t> seed,
                 const std::string& out_path, const std::string& truth_path) {
  const tw::Scenario sc = resolve_scenario(scenario_ref, seed);
  auto [frames, truth] = tw::generate_stream(sc);

  if (out_path.empty() || out_path == "-") {
    tw::write_detection_stream(std::cout, frames);
  } else {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw tw::ConfigError("cannot open '" + out_path + "' for writing");
    tw::write_detection_stream(out, frames);
  }
  if (!truth_path.empty()) {
    std::ofstream out(truth_path, std::ios::trunc);
    if (!out) throw tw::ConfigError("cannot open '" + truth_path + "' for writing");
    out << tw::ground_truth_to_jsonl(truth);
  }
  log_at(LogLevel::Info, "simulated '" + (sc.name.empty() ? scenario_ref : sc.name) + "': " +
                             std::to_string(frames.size()) + " frames, " +
                             std::to_string(truth.entries.size()) + " ground-truth events");
  return kOk;
}

int cmd_evaluate(const std::string& events_path, const std::string& truth_path, double window,
                 const std::string& report_path) {
  std::vector<tw::Event> events;
  if (events_path == "-") {
    events = tw::read_event_stream(std::cin);
  } else {
    std::ifstream in(events_path);
    if (!in) throw tw::ConfigError("cannot open '" + events_path + "'");
    events = tw::read_event_stream(in);
  }
  std::ifstream tin(truth_path);
  if (!tin) throw tw::ConfigError("cannot open '" + truth_path + "'");
  const tw::GroundTruth truth = tw::ground_truth_from_jsonl(tin);

  const tw::LatencyReport report = tw::score_latency(events, truth, window);
  const tw::RunSummary summary = tw::summarize_run(report, window);
  std::cout << summary.table;
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::trunc);
    if (!out) throw tw::ConfigError("cannot open '" + report_path + "' for writing");
    out << tw::latency_report_to_json(report, window) << '\n';
  }
  return summary.pass ? kOk : kEvaluationFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tunnelwatch - tunnel CCTV detection-stream incident engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::string input = "-";
  std::string scenario_ref;
  std::string out_path;
  std::string truth_path;
  std::string tracks_path;
  std::string report_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  double window = 10.0;

  CLI::App* run = app.add_subcommand("run", "Run the incident pipeline over a detection stream");
  run->add_option("--config", config_path, "Pipeline config JSON");
  run->add_option("--input", input, "Detection stream JSONL path, or - for stdin");
  run->add_option("--scenario", scenario_ref, "Builtin scenario name or scenario file to run on");
  run->add_option("--seed", seed, "Scenario seed override");
  run->add_option("--out", out_path, "Event log path (default stdout)");
  run->add_option("--tracks", tracks_path, "Optional per-frame track dump JSONL");
  run->add_option("--set", overrides, "Config override key.path=value")->take_all();

  CLI::App* simulate = app.add_subcommand("simulate", "Compile a scenario to a detection stream");
  simulate->add_option("--scenario", scenario_ref, "Builtin scenario name or scenario file")
      ->required();
  simulate->add_option("--seed", seed, "Seed override");
  simulate->add_option("--out", out_path, "Stream JSONL path (default stdout)");
  simulate->add_option("--truth", truth_path, "Ground-truth JSONL path");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score an event log against ground truth");
  evaluate->add_option("--input", input, "Event log JSONL path, or - for stdin");
  evaluate->add_option("--truth", truth_path, "Ground-truth JSONL path")->required();
  evaluate->add_option("--window", window, "Match window in seconds (default 10)");
  evaluate->add_option("--out", report_path, "Machine-readable report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (run->parsed()) {
      if (!scenario_ref.empty() && run->count("--input") > 0) {
        throw tw::ConfigError("--input and --scenario are mutually exclusive");
      }
      return cmd_run(config_path, overrides, input, scenario_ref, seed, out_path, tracks_path);
    }
    if (simulate->parsed()) {
      return cmd_simulate(scenario_ref, seed, out_path, truth_path);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(input, truth_path, window, report_path);
    }
  } catch (const tw::ParseError& e) {
    log_at(LogLevel::Error, std::string("parse error: ") + e.what());
    return kParseError;
  } catch (const tw::NonMonotonicFrame& e) {
    log_at(LogLevel::Error, std::string("parse error: ") + e.what());
    return kParseError;
  } catch (const tw::ConfigError& e) {
    log_at(LogLevel::Error, std::string("config error: ") + e.what());
    return kConfigError;
  } catch (const tw::InvalidScenario& e) {
    log_at(LogLevel::Error, std::string("scenario error: ") + e.what());
    return kConfigError;
  } catch (const tw::Error& e) {
    log_at(LogLevel::Error, e.what());
    return kConfigError;
  }
  return kOk;
}

#include "tunnelwatch/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <tuple>

#include <json.hpp>

namespace tw {

using Json = nlohmann::ordered_json;

ApResult average_precision(const std::vector<std::vector<ScoredBox>>& detections,
                           const std::vector<std::vector<BBox>>& truth, double iou_thresh,
                           ApInterpolation interpolation) {
  std::size_t n_truth = 0;
  for (const auto& boxes : truth) n_truth += boxes.size();

  struct Ranked {
    double score;
    std::size_t image;
    std::size_t index;
  };
  std::vector<Ranked> ranked;
  for (std::size_t img = 0; img < detections.size(); ++img) {
    for (std::size_t i = 0; i < detections[img].size(); ++i) {
      ranked.push_back({detections[img][i].score, img, i});
    }
  }
  if (ranked.empty() && n_truth == 0) return {1.0, true};
  if (ranked.empty() || n_truth == 0) return {0.0, false};

  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.image, a.index) < std::tie(b.image, b.index);
  });

  std::vector<std::vector<char>> taken(truth.size());
  for (std::size_t img = 0; img < truth.size(); ++img) taken[img].assign(truth[img].size(), 0);

  std::vector<char> is_tp(ranked.size(), 0);
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const Ranked& r = ranked[k];
    if (r.image >= truth.size()) continue;  // image with no truth entry: FP
    const auto& candidates = truth[r.image];
    double best_iou = 0.0;
    std::size_t best = candidates.size();
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (taken[r.image][j]) continue;
      const double v = iou(detections[r.image][r.index].bbox, candidates[j]);
      if (v >= iou_thresh && v > best_iou) {
        best_iou = v;
        best = j;
      }
    }
    if (best < candidates.size()) {
      taken[r.image][best] = 1;
      is_tp[k] = 1;
    }
  }

  // Precision-recall points at every rank, then the running max from the
  // right gives the interpolated precision.
  std::vector<double> precision(ranked.size()), recall(ranked.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (is_tp[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_truth);
  }

  if (interpolation == ApInterpolation::ElevenPoint) {
    double total = 0.0;
    for (int step = 0; step <= 10; ++step) {
      const double r = 0.1 * step;
      double pmax = 0.0;
      for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (recall[k] >= r - 1e-12) pmax = std::max(pmax, precision[k]);
      }
      total += pmax;
    }
    return {total / 11.0, false};
  }

  double ap = 0.0;
  double pmax = 0.0;
  for (std::size_t k = ranked.size(); k-- > 0;) {
    pmax = std::max(pmax, precision[k]);
    const double prev_recall = k == 0 ? 0.0 : recall[k - 1];
    if (recall[k] != prev_recall) {
      ap += (recall[k] - prev_recall) * pmax;
    }
  }
  return {ap, false};
}

LatencyReport score_latency(const std::vector<Event>& emitted, const GroundTruth& truth,
                            double match_window) {
  LatencyReport report;

  std::vector<Event> events = emitted;
  sort_events(events);
  std::vector<char> used(events.size(), 0);

  std::vector<GroundTruthEntry> entries = truth.entries;
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.kind != b.kind) return a.kind < b.kind;
    return a.actor < b.actor;
  });

  for (const GroundTruthEntry& gt : entries) {
    LatencyEntry entry;
    entry.truth = gt;
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (used[i] || events[i].kind != gt.kind) continue;
      if (events[i].t < gt.t || events[i].t > gt.t + match_window) continue;
      used[i] = 1;
      entry.matched = events[i];
      entry.latency = events[i].t - gt.t;
      break;
    }
    if (entry.matched) {
      report.matched_count += 1;
      report.max_latency = std::max(report.max_latency, entry.latency);
    } else {
      report.missed_count += 1;
    }
    report.entries.push_back(std::move(entry));
  }

  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!used[i]) report.false_positives.push_back(events[i]);
  }
  return report;
}

RunSummary summarize_run(const LatencyReport& report, double pass_threshold,
                         bool strict_false_positives) {
  RunSummary out;
  out.pass = report.missed_count == 0 &&
             (!strict_false_positives || report.false_positives.empty());
  for (const LatencyEntry& e : report.entries) {
    if (e.matched && e.latency > pass_threshold) out.pass = false;
  }

  std::string table;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-8s %10s %10s %10s  %s\n", "kind", "onset", "detected",
                "latency", "status");
  table += buf;
  for (const LatencyEntry& e : report.entries) {
    if (e.matched) {
      const bool late = e.latency > pass_threshold;
      std::snprintf(buf, sizeof(buf), "%-8s %10.2f %10.2f %10.2f  %s\n",
                    std::string(to_string(e.truth.kind)).c_str(), e.truth.t, e.matched->t,
                    e.latency, late ? "LATE" : "ok");
    } else {
      std::snprintf(buf, sizeof(buf), "%-8s %10.2f %10s %10s  %s\n",
                    std::string(to_string(e.truth.kind)).c_str(), e.truth.t, "-", "-", "MISSED");
    }
    table += buf;
  }
  std::snprintf(buf, sizeof(buf), "false positives: %zu\n", report.false_positives.size());
  table += buf;
  std::snprintf(buf, sizeof(buf), "max latency: %.2f s  window: %.2f s  -> %s\n",
                report.max_latency, pass_threshold, out.pass ? "PASS" : "FAIL");
  table += buf;
  out.table = std::move(table);
  return out;
}

std::string latency_report_to_json(const LatencyReport& report, double pass_threshold) {
  const RunSummary summary = summarize_run(report, pass_threshold);
  Json doc;
  doc["pass"] = summary.pass;
  doc["window"] = pass_threshold;
  doc["max_latency"] = report.max_latency;
  doc["matched"] = report.matched_count;
  doc["missed"] = report.missed_count;
  Json entries = Json::array();
  for (const LatencyEntry& e : report.entries) {
    Json obj;
    obj["kind"] = std::string(to_string(e.truth.kind));
    obj["onset"] = e.truth.t;
    if (e.matched) {
      obj["detected"] = e.matched->t;
      obj["latency"] = e.latency;
    } else {
      obj["detected"] = nullptr;
      obj["latency"] = nullptr;
    }
    entries.push_back(std::move(obj));
  }
  doc["entries"] = std::move(entries);
  Json fps_json = Json::array();
  for (const Event& e : report.false_positives) {
    Json obj;
    obj["kind"] = std::string(to_string(e.kind));
    obj["t"] = e.t;
    fps_json.push_back(std::move(obj));
  }
  doc["false_positives"] = std::move(fps_json);
  return doc.dump(2);
}

}  // namespace tw

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "tunnelwatch/metrics.hpp"

using tw::BBox;
using tw::Event;
using tw::EventKind;
using tw::GroundTruth;
using tw::ScoredBox;

namespace {

using Dets = std::vector<std::vector<ScoredBox>>;
using Truths = std::vector<std::vector<BBox>>;

// Independent AP oracle: materialize the full ranked TP/FP list, then walk
// every distinct recall level and take the best precision at or beyond it.
double brute_force_ap(const Dets& detections, const Truths& truth, double thresh) {
  std::size_t n_truth = 0;
  for (const auto& t : truth) n_truth += t.size();

  std::vector<std::tuple<double, std::size_t, std::size_t>> order;
  for (std::size_t img = 0; img < detections.size(); ++img) {
    for (std::size_t i = 0; i < detections[img].size(); ++i) {
      order.emplace_back(detections[img][i].score, img, i);
    }
  }
  if (order.empty() && n_truth == 0) return 1.0;
  if (order.empty() || n_truth == 0) return 0.0;
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });

  std::vector<std::vector<char>> used(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) used[i].assign(truth[i].size(), 0);

  std::vector<int> tp_flags;
  for (const auto& [score, img, idx] : order) {
    int flag = 0;
    if (img < truth.size()) {
      double best = thresh;
      std::size_t pick = truth[img].size();
      for (std::size_t j = 0; j < truth[img].size(); ++j) {
        if (used[img][j]) continue;
        const double v = tw::iou(detections[img][idx].bbox, truth[img][j]);
        if (v >= best && (pick == truth[img].size() || v > best)) {
          best = v;
          pick = j;
        }
      }
      if (pick < truth[img].size()) {
        used[img][pick] = 1;
        flag = 1;
      }
    }
    tp_flags.push_back(flag);
  }

  const std::size_t n = tp_flags.size();
  std::vector<double> prec(n), rec(n);
  int tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += tp_flags[k];
    prec[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    rec[k] = static_cast<double>(tp) / static_cast<double>(n_truth);
  }

  double ap = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (rec[k] == prev) continue;
    double pmax = 0.0;
    for (std::size_t j = k; j < n; ++j) pmax = std::max(pmax, prec[j]);
    ap += (rec[k] - prev) * pmax;
    prev = rec[k];
  }
  return ap;
}

BBox cell(int i) {
  // Disjoint 10x10 boxes on a grid.
  const double x = 20.0 * (i % 10);
  const double y = 20.0 * (i / 10);
  return BBox{x, y, x + 10, y + 10};
}

Event event_at(EventKind kind, double t) {
  Event e;
  e.kind = kind;
  e.t = t;
  return e;
}

}  // namespace

TEST_CASE("average precision corner cases") {
  SUBCASE("every truth detected once, no false positives") {
    const Truths truth = {{cell(0), cell(1)}};
    const Dets dets = {{{cell(0), 0.9}, {cell(1), 0.8}}};
    const auto r = tw::average_precision(dets, truth, 0.5);
    CHECK(r.ap == 1.0);
    CHECK(!r.degenerate);
  }

  SUBCASE("no detections with truth present") {
    const auto r = tw::average_precision({{}}, {{cell(0)}}, 0.5);
    CHECK(r.ap == 0.0);
  }

  SUBCASE("detections with no truth") {
    const auto r = tw::average_precision({{{cell(0), 0.9}}}, {{}}, 0.5);
    CHECK(r.ap == 0.0);
  }

  SUBCASE("both empty is reported as degenerate 1.0") {
    const auto r = tw::average_precision({{}}, {{}}, 0.5);
    CHECK(r.ap == 1.0);
    CHECK(r.degenerate);
  }
}

TEST_CASE("ranked [TP, FP, TP] over two truths gives AP = 5/6") {
  const Truths truth = {{cell(0), cell(1)}};
  const Dets dets = {{
      {cell(0), 0.9},  // TP at rank 1
      {cell(5), 0.8},  // FP at rank 2
      {cell(1), 0.7},  // TP at rank 3
  }};
  const auto r = tw::average_precision(dets, truth, 0.5);
  CHECK(std::abs(r.ap - 5.0 / 6.0) <= 1e-12);
  CHECK(std::abs(r.ap - brute_force_ap(dets, truth, 0.5)) <= 1e-12);
}

TEST_CASE("AP equals the brute-force oracle on random instances") {
  std::mt19937_64 rng(271828);
  std::uniform_int_distribution<int> n_images(1, 3);
  std::uniform_int_distribution<int> n_dets(0, 20);
  std::uniform_int_distribution<int> n_truth(0, 10);
  std::uniform_int_distribution<int> slot(0, 11);
  std::uniform_real_distribution<double> wiggle(-3.0, 3.0);
  std::uniform_int_distribution<int> score_step(0, 9);

  for (int trial = 0; trial < 200; ++trial) {
    const int images = n_images(rng);
    Dets dets(static_cast<std::size_t>(images));
    Truths truth(static_cast<std::size_t>(images));
    const int total_truth = n_truth(rng);
    for (int j = 0; j < total_truth; ++j) {
      truth[static_cast<std::size_t>(j % images)].push_back(cell(slot(rng)));
    }
    const int total_dets = n_dets(rng);
    for (int j = 0; j < total_dets; ++j) {
      const BBox base = cell(slot(rng));
      const double dx = wiggle(rng), dy = wiggle(rng);
      // Quantized scores force ties to stress deterministic ranking.
      dets[static_cast<std::size_t>(j % images)].push_back(
          {BBox{base.x_min + dx, base.y_min + dy, base.x_max + dx, base.y_max + dy},
           0.1 * score_step(rng)});
    }

    const double got = tw::average_precision(dets, truth, 0.5).ap;
    const double want = brute_force_ap(dets, truth, 0.5);
    CHECK(std::abs(got - want) <= 1e-12);
  }
}

TEST_CASE("eleven-point interpolation averages the envelope at fixed recalls") {
  const Truths truth = {{cell(0), cell(1)}};
  const Dets dets = {{
      {cell(0), 0.9},  // TP
      {cell(5), 0.8},  // FP
      {cell(1), 0.7},  // TP
  }};
  // Envelope: precision 1 up to recall 0.5, then 2/3 up to recall 1.
  const double want = (6.0 * 1.0 + 5.0 * (2.0 / 3.0)) / 11.0;
  const auto r = tw::average_precision(dets, truth, 0.5, tw::ApInterpolation::ElevenPoint);
  CHECK(std::abs(r.ap - want) <= 1e-12);
}

TEST_CASE("AP depends on scores only through their ranking") {
  const Truths truth = {{cell(0), cell(1), cell(2)}};
  Dets dets = {{{cell(0), 0.9}, {cell(7), 0.6}, {cell(1), 0.3}}};
  const double base = tw::average_precision(dets, truth, 0.5).ap;

  Dets transformed = dets;
  for (auto& image : transformed) {
    for (auto& d : image) d.score = std::exp(4.0 * d.score) / 100.0;
  }
  CHECK(tw::average_precision(transformed, truth, 0.5).ap == base);
}

TEST_CASE("adding a false positive never raises AP; a top TP never lowers it") {
  const Truths truth = {{cell(0), cell(1), cell(2)}};
  Dets dets = {{{cell(0), 0.9}, {cell(6), 0.5}, {cell(1), 0.4}}};
  const double base = tw::average_precision(dets, truth, 0.5).ap;

  Dets with_fp = dets;
  with_fp[0].push_back({cell(8), 0.7});
  CHECK(tw::average_precision(with_fp, truth, 0.5).ap <= base + 1e-12);

  Dets with_tp = dets;
  with_tp[0].push_back({cell(2), 0.99});
  CHECK(tw::average_precision(with_tp, truth, 0.5).ap >= base - 1e-12);
}

TEST_CASE("score_latency reproduces the reference occurrence/detection gaps") {
  GroundTruth truth;
  truth.entries = {{EventKind::Stop, 5.0, 1},
                   {EventKind::WWD, 4.0, 2},
                   {EventKind::Fire, 29.0, 3},
                   {EventKind::Person, 50.0, 4}};
  const std::vector<Event> events = {event_at(EventKind::Stop, 7.0),
                                     event_at(EventKind::WWD, 12.0),
                                     event_at(EventKind::Fire, 29.0),
                                     event_at(EventKind::Person, 50.0)};

  const auto report = tw::score_latency(events, truth, 10.0);
  REQUIRE(report.entries.size() == 4);
  CHECK(report.matched_count == 4);
  CHECK(report.missed_count == 0);
  CHECK(report.false_positives.empty());

  std::map<EventKind, double> latency;
  for (const auto& e : report.entries) latency[e.truth.kind] = e.latency;
  CHECK(latency[EventKind::Stop] == 2.0);
  CHECK(latency[EventKind::WWD] == 8.0);
  CHECK(latency[EventKind::Fire] == 0.0);
  CHECK(latency[EventKind::Person] == 0.0);
  CHECK(report.max_latency == 8.0);

  CHECK(tw::summarize_run(report, 10.0).pass);
}

TEST_CASE("missed events and false positives fail the run") {
  GroundTruth truth;
  truth.entries = {{EventKind::Stop, 5.0, 1}};

  SUBCASE("empty event log means missed") {
    const auto report = tw::score_latency({}, truth, 10.0);
    CHECK(report.missed_count == 1);
    CHECK(!tw::summarize_run(report, 10.0).pass);
    CHECK(tw::summarize_run(report, 10.0).table.find("MISSED") != std::string::npos);
  }

  SUBCASE("an event outside the window is both a miss and a false positive") {
    const auto report = tw::score_latency({event_at(EventKind::Stop, 16.0)}, truth, 10.0);
    CHECK(report.missed_count == 1);
    CHECK(report.false_positives.size() == 1);
    CHECK(!tw::summarize_run(report, 10.0).pass);
  }

  SUBCASE("matched but late fails the threshold") {
    const auto report = tw::score_latency({event_at(EventKind::Stop, 16.0)}, truth, 12.0);
    CHECK(report.matched_count == 1);
    CHECK(report.entries[0].latency == 11.0);
    CHECK(!tw::summarize_run(report, 10.0).pass);
    CHECK(tw::summarize_run(report, 12.0).pass);
  }

  SUBCASE("a spurious fire is a false positive") {
    const auto report = tw::score_latency(
        {event_at(EventKind::Stop, 7.0), event_at(EventKind::Fire, 8.0)}, truth, 10.0);
    CHECK(report.matched_count == 1);
    CHECK(report.false_positives.size() == 1);
    CHECK(!tw::summarize_run(report, 10.0).pass);
    // Lenient mode tolerates extra emissions as long as nothing is missed.
    CHECK(tw::summarize_run(report, 10.0, false).pass);
  }
}

TEST_CASE("latency matching is one-to-one and earliest-first") {
  GroundTruth truth;
  truth.entries = {{EventKind::Stop, 1.0, 1}, {EventKind::Stop, 2.0, 2}};
  const std::vector<Event> events = {event_at(EventKind::Stop, 3.0)};
  const auto report = tw::score_latency(events, truth, 10.0);
  CHECK(report.matched_count == 1);
  CHECK(report.missed_count == 1);
  REQUIRE(report.entries[0].matched.has_value());
  CHECK(report.entries[0].truth.t == 1.0);  // earliest truth takes the event
  CHECK(!report.entries[1].matched.has_value());

  // An event must not be detected before it occurs.
  for (const auto& e : report.entries) {
    if (e.matched) CHECK(e.latency >= 0.0);
  }
}

TEST_CASE("report JSON carries the verdict") {
  GroundTruth truth;
  truth.entries = {{EventKind::Stop, 5.0, 1}};
  const auto report = tw::score_latency({event_at(EventKind::Stop, 7.0)}, truth, 10.0);
  const std::string json = tw::latency_report_to_json(report, 10.0);
  CHECK(json.find("\"pass\": true") != std::string::npos);
  CHECK(json.find("\"latency\": 2.0") != std::string::npos);
}

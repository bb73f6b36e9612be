#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <vector>

#include "tunnelwatch/geometry.hpp"
#include "tunnelwatch/hungarian.hpp"
#include "tunnelwatch/pipeline.hpp"
#include "tunnelwatch/scenario.hpp"
#include "tunnelwatch/tracker.hpp"

namespace {

std::vector<tw::BBox> random_boxes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 400.0);
  std::uniform_real_distribution<double> side(10.0, 60.0);
  std::vector<tw::BBox> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = coord(rng), y = coord(rng);
    out.push_back(tw::BBox{x, y, x + side(rng), y + side(rng)});
  }
  return out;
}

void BM_Iou(benchmark::State& state) {
  const auto boxes = random_boxes(1024, 1);
  std::size_t i = 0;
  for (auto _ : state) {
    const double v = tw::iou(boxes[i & 1023], boxes[(i + 7) & 1023]);
    benchmark::DoNotOptimize(v);
    ++i;
  }
}
BENCHMARK(BM_Iou);

void BM_Iol(benchmark::State& state) {
  const auto boxes = random_boxes(1024, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    const double v = tw::iol(boxes[i & 1023], boxes[(i + 7) & 1023]);
    benchmark::DoNotOptimize(v);
    ++i;
  }
}
BENCHMARK(BM_Iol);

void BM_Hungarian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(static_cast<std::uint64_t>(n));
  std::uniform_real_distribution<double> value(0.0, 1.0);
  Eigen::MatrixXd cost(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) cost(i, j) = value(rng);
  }
  for (auto _ : state) {
    auto pairs = tw::hungarian_assign(cost);
    benchmark::DoNotOptimize(pairs);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_Hungarian)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_TrackerStep(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  const auto boxes = random_boxes(k, 3);
  for (auto _ : state) {
    state.PauseTiming();
    tw::Tracker tracker;
    state.ResumeTiming();
    for (int step = 0; step < 20; ++step) {
      tw::FrameDetections frame;
      frame.frame = static_cast<std::uint64_t>(step);
      frame.t = 0.2 * step;
      for (const tw::BBox& b : boxes) {
        tw::BBox moved = b;
        moved.y_min += 8.0 * step;
        moved.y_max += 8.0 * step;
        frame.detections.push_back(tw::Detection{moved, tw::ObjectClass::Car, 0.9});
      }
      auto ids = tracker.step(frame);
      benchmark::DoNotOptimize(ids);
    }
  }
  state.SetItemsProcessed(state.iterations() * 20 * static_cast<std::int64_t>(k));
}
BENCHMARK(BM_TrackerStep)->Arg(1)->Arg(8)->Arg(32);

tw::Scenario short_traffic() {
  tw::Scenario sc;
  sc.duration = 20.0;
  sc.fps = 30.0;
  sc.roi_width = 400;
  sc.roi_height = 480;
  sc.lanes = {100.0, 200.0, 300.0};
  for (int k = 0; k < 3; ++k) {
    tw::ActorScript car;
    car.cls = tw::ObjectClass::Car;
    car.enter_t = 1.0 + 6.0 * k;
    car.exit_t = std::min(car.enter_t + 7.4, sc.duration);
    car.lane = k;
    car.speed = 60.0;
    car.box_size = {36.0, 30.0};
    sc.actors.push_back(car);
  }
  sc.noise.jitter_sigma = 1.0;
  sc.noise.miss_prob = 0.05;
  return sc;
}

void BM_PipelineTraffic(benchmark::State& state) {
  const auto [frames, truth] = tw::generate_stream(short_traffic());
  for (auto _ : state) {
    auto events = tw::run_pipeline({}, frames);
    benchmark::DoNotOptimize(events);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames.size()));
}
BENCHMARK(BM_PipelineTraffic);

void BM_ScenarioGeneration(benchmark::State& state) {
  const tw::Scenario sc = short_traffic();
  for (auto _ : state) {
    auto stream = tw::generate_stream(sc);
    benchmark::DoNotOptimize(stream);
  }
}
BENCHMARK(BM_ScenarioGeneration);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "riskmap/context.hpp"
#include "riskmap/deviation.hpp"
#include "riskmap/feature_map.hpp"
#include "riskmap/kmeans.hpp"
#include "riskmap/synth.hpp"
#include "riskmap/trajectory.hpp"

namespace {

using namespace riskmap;

KinematicTrajectory make_annotated(int trip_index, int points) {
  PopulationConfig cfg;
  cfg.points_per_trajectory = points;
  const auto profile = make_profile("bench", Archetype::Safe, 1);
  const auto gen = generate_trajectory(profile, cfg, trip_index, {38.0, -95.0}, -360);
  KinematicTrajectory kt = derive_kinematics(gen.trajectory);
  kt.daylight = Daylight::Day;
  kt.road_annotated = true;
  detect_turns(kt);
  return kt;
}

void BM_DeriveKinematics(benchmark::State& state) {
  PopulationConfig cfg;
  cfg.points_per_trajectory = static_cast<int>(state.range(0));
  const auto profile = make_profile("bench", Archetype::Safe, 1);
  const auto gen = generate_trajectory(profile, cfg, 0, {38.0, -95.0}, -360);
  for (auto _ : state) {
    benchmark::DoNotOptimize(derive_kinematics(gen.trajectory));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DeriveKinematics)->Arg(180)->Arg(1800);

void BM_DetectTurns(benchmark::State& state) {
  auto kt = make_annotated(0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(detect_turns(kt));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectTurns)->Arg(180)->Arg(1800);

void BM_BuildRawFeatureMap(benchmark::State& state) {
  const auto kt = make_annotated(0, static_cast<int>(state.range(0)));
  const auto& spec = spec_by_id("T1");
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_raw_feature_map(kt, spec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildRawFeatureMap)->Arg(180)->Arg(1800);

void BM_HistogramMatrix(benchmark::State& state) {
  const auto& spec = spec_by_id("T1");
  std::vector<FeatureMap> maps;
  for (int i = 0; i < state.range(0); ++i) {
    maps.push_back(build_raw_feature_map(make_annotated(i, 180), spec));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(obtain_histogram_matrix(maps, 10));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HistogramMatrix)->Arg(30)->Arg(100);

void BM_HellingerDifference(benchmark::State& state) {
  const auto& spec = spec_by_id("T1");
  std::vector<FeatureMap> a, b;
  for (int i = 0; i < 50; ++i) {
    a.push_back(build_raw_feature_map(make_annotated(i, 180), spec));
    b.push_back(build_raw_feature_map(make_annotated(i + 50, 180), spec));
  }
  const auto ha = obtain_histogram_matrix(a, 10);
  const auto hb = obtain_histogram_matrix(b, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(obtain_difference(ha, hb));
  }
}
BENCHMARK(BM_HellingerDifference);

void BM_KMeansDeviationMaps(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < state.range(0); ++i) {
    std::vector<double> v(400);
    const double center = i % 2 == 0 ? -0.1 : 0.1;
    for (auto& x : v) x = center + noise(rng);
    points.push_back(std::move(v));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmeans(points, 2, 1, 10));
  }
}
BENCHMARK(BM_KMeansDeviationMaps)->Arg(100)->Arg(400);

}  // namespace

BENCHMARK_MAIN();

// Serial reference vs OpenMP kernel for the data-parallel stages.

#include <random>

#include <benchmark/benchmark.h>

#include "wildannot/normals.hpp"
#include "wildannot/parallel.hpp"
#include "wildannot/pr_eval.hpp"
#include "wildannot/submap.hpp"
#include "wildannot/synth.hpp"
#include "wildannot/visibility.hpp"

namespace wa = wildannot;

namespace {

const wa::SyntheticScene& forest() {
  static const wa::SyntheticScene scene = [] {
    wa::ForestSpec spec;
    spec.half_extent = 15.0;
    return wa::gen_forest(spec, 1);
  }();
  return scene;
}

const wa::Trajectory& path() {
  static const wa::Trajectory t =
      wa::straight_trajectory({-5, 0, 1.5}, {5, 0, 1.5}, 0.0, 10.0, 10.0);
  return t;
}

wa::DescriptorSet descriptors(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::uniform_real_distribution<double> pos(0.0, 500.0);
  wa::DescriptorSet set;
  set.vectors.resize(static_cast<Eigen::Index>(n), 256);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 256; ++k) set.vectors(static_cast<Eigen::Index>(i), k) = g(rng);
    set.ids.push_back(i);
    set.poses.emplace_back(Eigen::Quaterniond::Identity(), Eigen::Vector3d(pos(rng), pos(rng), 0));
    set.sequence_labels.push_back(i % 2 ? "V-01" : "V-02");
    set.timestamps.push_back(static_cast<double>(i));
  }
  return set;
}

void BM_NormalsSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(wa::estimate_normals_serial(forest().map));
  state.SetItemsProcessed(state.iterations() * forest().map.size());
}

void BM_NormalsParallel(benchmark::State& state) {
  wa::set_num_jobs(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(wa::estimate_normals(forest().map));
  state.SetItemsProcessed(state.iterations() * forest().map.size());
  wa::set_num_jobs(0);
}

void BM_SubmapsSerial(benchmark::State& state) {
  const wa::SubmapSpec spec;
  for (auto _ : state) {
    for (double t : wa::submap_center_times(path(), spec.stride)) {
      benchmark::DoNotOptimize(wa::extract_submap(forest().map, wa::interpolate_pose(path(), t), spec));
    }
  }
}

void BM_SubmapsParallel(benchmark::State& state) {
  wa::set_num_jobs(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(wa::extract_submap_sequence(forest().map, path(), wa::SubmapSpec{}));
  }
  wa::set_num_jobs(0);
}

void BM_RecallSerial(benchmark::State& state) {
  const auto q = descriptors(500, 1), db = descriptors(4000, 2);
  wa::EvalConfig config;
  config.mode = wa::EvalMode::kInter;
  for (auto _ : state) benchmark::DoNotOptimize(wa::evaluate_recall_serial(q, db, config));
}

void BM_RecallParallel(benchmark::State& state) {
  const auto q = descriptors(500, 1), db = descriptors(4000, 2);
  wa::EvalConfig config;
  config.mode = wa::EvalMode::kInter;
  wa::set_num_jobs(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(wa::evaluate_recall(q, db, config));
  wa::set_num_jobs(0);
}

void BM_OracleBruteForce(benchmark::State& state) {
  wa::SphereSpec spec;
  spec.count = 2000;
  const wa::SyntheticScene scene = wa::gen_sphere(spec, 3);
  const wa::CameraRig rig = wa::forward_looking_rig(160, 120, 80);
  const wa::Pose cam = rig.camera_pose(wa::Pose(Eigen::Quaterniond::Identity(), {-20, 0, 0}));
  for (auto _ : state) {
    benchmark::DoNotOptimize(wa::oracle_visibility_brute_force(scene, cam, rig, scene.spacing));
  }
}

void BM_OracleBinned(benchmark::State& state) {
  wa::SphereSpec spec;
  spec.count = 2000;
  const wa::SyntheticScene scene = wa::gen_sphere(spec, 3);
  const wa::CameraRig rig = wa::forward_looking_rig(160, 120, 80);
  const wa::Pose cam = rig.camera_pose(wa::Pose(Eigen::Quaterniond::Identity(), {-20, 0, 0}));
  wa::set_num_jobs(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(wa::oracle_visibility(scene, cam, rig, scene.spacing));
  }
  wa::set_num_jobs(0);
}

void BM_VisibleFrame(benchmark::State& state) {
  static const wa::NormalEstimate normals = wa::estimate_normals(forest().map);
  const wa::CameraRig rig = wa::forward_looking_rig();
  const wa::Pose cam = rig.camera_pose(wa::interpolate_pose(path(), 5.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(wa::visible_points(forest().map, normals, cam, rig, wa::GhprConfig{}));
  }
}

}  // namespace

BENCHMARK(BM_NormalsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NormalsParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SubmapsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SubmapsParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RecallSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RecallParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleBruteForce)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleBinned)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VisibleFrame)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "moransac/dpc.hpp"
#include "moransac/merge.hpp"
#include "moransac/ransac.hpp"
#include "moransac/synth.hpp"
#include "moransac/voting_net.hpp"

using namespace moransac;

namespace {

Scene bench_scene(int objects, std::uint64_t seed) {
  SceneSpec spec;
  spec.object_count = objects;
  spec.points_per_face = 400;
  spec.seed = seed;
  return gen_scene(spec);
}

}  // namespace

static void BM_RansacPlane(benchmark::State& state) {
  const Scene scene = bench_scene(0, 7);
  RansacParams params;
  params.inlier_threshold = 0.005;
  params.min_inliers = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ransac_plane(scene.cloud.positions, params));
  }
}
BENCHMARK(BM_RansacPlane);

static void BM_SequentialMultiplane(benchmark::State& state) {
  const Scene scene = bench_scene(static_cast<int>(state.range(0)), 11);
  RansacParams params;
  params.inlier_threshold = 0.005;
  params.min_inliers = 80;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sequential_multiplane(scene.cloud, params, 16));
  }
}
BENCHMARK(BM_SequentialMultiplane)->Arg(2)->Arg(5);

static void BM_NetForward(benchmark::State& state) {
  const Scene scene = bench_scene(3, 13);
  const VotingNet net(VotingNetConfig{}, 0);
  const Eigen::MatrixXd feats = make_features(scene.cloud);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(feats, false));
  }
  state.SetItemsProcessed(state.iterations() * feats.rows());
}
BENCHMARK(BM_NetForward);

static void BM_InferAndMerge(benchmark::State& state) {
  const Scene scene = bench_scene(4, 17);
  const VotingNet net(VotingNetConfig{}, 0);
  InferParams params;
  params.k_per_split = 32;
  MergeParams merge;
  for (auto _ : state) {
    const auto dicts = infer_subplanes(&net, scene.cloud, params);
    benchmark::DoNotOptimize(two_stage_merge(dicts, scene.cloud, merge));
  }
}
BENCHMARK(BM_InferAndMerge);

#include <benchmark/benchmark.h>

#include <random>

#include "moransac/kdtree.hpp"
#include "moransac/normals.hpp"
#include "moransac/sampling.hpp"

using namespace moransac;

namespace {

PointCloud random_cloud(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  PointCloud cloud;
  cloud.positions.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    cloud.positions.emplace_back(uni(rng), uni(rng), uni(rng));
  }
  return cloud;
}

}  // namespace

static void BM_KdTreeKnn(benchmark::State& state) {
  const PointCloud cloud = random_cloud(static_cast<int>(state.range(0)), 1);
  const KdTree tree(cloud.positions);
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree.knn(cloud.positions[q % cloud.size()], 30));
    ++q;
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KdTreeKnn)->RangeMultiplier(4)->Range(1024, 65536)->Complexity();

static void BM_FarthestPointSample(benchmark::State& state) {
  const PointCloud cloud = random_cloud(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(farthest_point_sample(cloud.positions, 64, 0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FarthestPointSample)->RangeMultiplier(4)->Range(1024, 32768)->Complexity();

static void BM_VoxelDownsample(benchmark::State& state) {
  const PointCloud cloud = random_cloud(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(voxel_downsample(cloud, 0.02));
  }
}
BENCHMARK(BM_VoxelDownsample)->Arg(8192)->Arg(32768);

static void BM_EstimateNormals(benchmark::State& state) {
  const PointCloud cloud = random_cloud(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_normals(cloud, 30));
  }
}
BENCHMARK(BM_EstimateNormals)->Arg(2048)->Arg(8192);

BENCHMARK_MAIN();

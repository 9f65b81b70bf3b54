#include "moransac/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace moransac {

std::vector<int> farthest_point_sample(const std::vector<Vec3>& points, int k,
                                       std::uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (k > n) {
    throw InsufficientPointsError("farthest point sampling: k=" + std::to_string(k) +
                                  " exceeds " + std::to_string(n) + " points");
  }
  if (k <= 0) return {};
  std::mt19937_64 rng(seed);
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(k));
  const int first = std::uniform_int_distribution<int>(0, n - 1)(rng);
  picked.push_back(first);

  std::vector<double> min_d2(static_cast<std::size_t>(n),
                             std::numeric_limits<double>::infinity());
  for (int step = 1; step < k; ++step) {
    const Vec3& last = points[static_cast<std::size_t>(picked.back())];
    int best = -1;
    double best_d2 = -1;
    for (int i = 0; i < n; ++i) {
      const double d2 = (points[static_cast<std::size_t>(i)] - last).squaredNorm();
      if (d2 < min_d2[static_cast<std::size_t>(i)]) min_d2[static_cast<std::size_t>(i)] = d2;
      if (min_d2[static_cast<std::size_t>(i)] > best_d2) {
        best_d2 = min_d2[static_cast<std::size_t>(i)];
        best = i;
      }
    }
    picked.push_back(best);
  }
  return picked;
}

namespace {

using VoxelKey = std::array<std::int64_t, 3>;

VoxelKey voxel_key(const Vec3& p, const Vec3& origin, double voxel) {
  return {static_cast<std::int64_t>(std::floor((p.x() - origin.x()) / voxel)),
          static_cast<std::int64_t>(std::floor((p.y() - origin.y()) / voxel)),
          static_cast<std::int64_t>(std::floor((p.z() - origin.z()) / voxel))};
}

std::size_t count_voxels(const PointCloud& cloud, double voxel) {
  Vec3 origin = cloud.positions.front();
  for (const Vec3& p : cloud.positions) origin = origin.cwiseMin(p);
  std::map<VoxelKey, int> seen;
  for (const Vec3& p : cloud.positions) seen.emplace(voxel_key(p, origin, voxel), 0);
  return seen.size();
}

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0)) throw InputError("voxel edge length must be positive");
  if (cloud.empty()) return {};
  Vec3 origin = cloud.positions.front();
  for (const Vec3& p : cloud.positions) origin = origin.cwiseMin(p);

  struct Acc {
    int order;
    int count = 0;
    Vec3 pos = Vec3::Zero();
    Vec3 color = Vec3::Zero();
    Vec3 normal = Vec3::Zero();
    int first = 0;
  };
  std::map<VoxelKey, Acc> cells;
  int next_order = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const VoxelKey key = voxel_key(cloud.positions[i], origin, voxel);
    auto [it, inserted] = cells.try_emplace(key);
    Acc& acc = it->second;
    if (inserted) {
      acc.order = next_order++;
      acc.first = static_cast<int>(i);
    }
    acc.count += 1;
    acc.pos += cloud.positions[i];
    if (cloud.has_colors()) acc.color += cloud.colors[i];
    if (cloud.has_normals()) acc.normal += cloud.normals[i];
  }

  std::vector<const Acc*> ordered(cells.size());
  for (const auto& [key, acc] : cells) ordered[static_cast<std::size_t>(acc.order)] = &acc;

  PointCloud out;
  out.positions.reserve(cells.size());
  if (cloud.has_colors()) out.colors.reserve(cells.size());
  if (cloud.has_normals()) out.normals.reserve(cells.size());
  for (const Acc* acc : ordered) {
    out.positions.push_back(acc->pos / acc->count);
    if (cloud.has_colors()) out.colors.push_back(acc->color / acc->count);
    if (cloud.has_normals()) {
      Vec3 n = acc->normal;
      const double len = n.norm();
      // Averaged normals can cancel out; fall back to the first member's.
      out.normals.push_back(len > 1e-9 ? Vec3(n / len)
                                       : cloud.normals[static_cast<std::size_t>(acc->first)]);
    }
  }
  return out;
}

PointCloud voxel_downsample_to_count(const PointCloud& cloud, int target,
                                     double tolerance) {
  if (target <= 0) throw InputError("target point count must be positive");
  if (static_cast<int>(cloud.size()) <= target) return cloud;

  Vec3 lo = cloud.positions.front();
  Vec3 hi = lo;
  for (const Vec3& p : cloud.positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double vmin = 1e-7;
  double vmax = std::max((hi - lo).norm(), 1e-6);
  const auto within = [&](std::size_t count) {
    return std::abs(static_cast<double>(count) - target) <= tolerance * target;
  };

  double best_voxel = vmax;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 48; ++iter) {
    const double v = std::sqrt(vmin * vmax);
    const std::size_t count = count_voxels(cloud, v);
    const double gap = std::abs(static_cast<double>(count) - target);
    if (gap < best_gap) {
      best_gap = gap;
      best_voxel = v;
    }
    if (within(count)) break;
    if (static_cast<int>(count) > target) {
      vmin = v;  // too many voxels: grow them
    } else {
      vmax = v;
    }
  }
  return voxel_downsample(cloud, best_voxel);
}

}  // namespace moransac

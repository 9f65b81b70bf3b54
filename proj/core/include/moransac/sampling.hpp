#pragma once

#include <cstdint>
#include <vector>

#include "moransac/point_cloud.hpp"

namespace moransac {

/// Farthest point sampling. The first index is drawn from the seeded RNG;
/// each next index maximizes the minimum distance to the selected set, ties
/// broken toward the lower index. Throws InsufficientPointsError if k > N.
std::vector<int> farthest_point_sample(const std::vector<Vec3>& points, int k,
                                       std::uint64_t seed);

/// One point per occupied voxel at the centroid of its members; colors and
/// normals are averaged (normals re-normalized). The grid is anchored at the
/// cloud's axis-aligned minimum corner. Output voxels appear in first-member
/// order.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Bisects the voxel edge length until the downsampled count lands within
/// tolerance (default 5%) of target; returns the input unchanged when it is
/// already at or below target. Falls back to the closest count reached if the
/// tolerance window sits inside an occupancy plateau.
PointCloud voxel_downsample_to_count(const PointCloud& cloud, int target,
                                     double tolerance = 0.05);

}  // namespace moransac
